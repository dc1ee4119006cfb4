// ----------------------------------------------------------------------------
// Copyright 2026 The rulprior Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rulprior/tensor.hpp"

namespace rulprior::data {

inline constexpr std::size_t kSettingCount = 3;
inline constexpr std::size_t kSensorCount = 21;
inline constexpr std::size_t kRecordFields = 2 + kSettingCount + kSensorCount;

/// One line of a C-MAPSS file.
struct RawRecord {
  int unit_id = 0;
  int cycle = 0;
  std::array<double, kSettingCount> settings{};
  std::array<double, kSensorCount> sensors{};
};

enum class SeriesKind { Training, Test };

/// All records of one unit, ordered by cycle.
struct EngineSeries {
  int unit_id = 0;
  std::vector<RawRecord> records;
  std::optional<int> total_life;  // run-to-failure series only
  std::optional<int> truth_rul;   // pruned series, from the RUL file

  std::size_t length() const noexcept { return records.size(); }
};

/// Which columns feed the model: 1-based sensor numbers plus the first
/// `settings` operational settings.
struct FeatureSpec {
  std::vector<int> sensor_indices;
  int settings = 3;

  static FeatureSpec defaults();
  std::size_t count() const noexcept { return sensor_indices.size() + static_cast<std::size_t>(settings); }
  /// Throws ErrorKind::Config on out-of-range or empty selections.
  void validate() const;
  /// Selected values of one record: settings first, then sensors in the
  /// listed order.
  std::vector<double> extract(const RawRecord& r) const;
};

struct NormalizationStats {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t size() const noexcept { return min.size(); }
};

struct TimeWindow {
  int unit_id = 0;
  int window_id = 0;  // 1-based position of the window within its unit
  nn::Tensor values;  // [T, F]
  double rul_target = 0.0;
};

struct WindowedUnit {
  int unit_id = 0;
  std::optional<int> total_life;
  std::optional<int> truth_rul;
  std::vector<TimeWindow> windows;
};

/// Everything the model stages need from preprocessing.
struct WindowedDataset {
  SeriesKind kind = SeriesKind::Training;
  FeatureSpec features;
  NormalizationStats stats;
  std::size_t window_length = 0;
  double rul_cap = 125.0;
  std::vector<WindowedUnit> units;

  std::size_t window_count() const noexcept;
};

/// Parses whitespace-separated C-MAPSS text. Fields beyond the 26th are
/// ignored and blank lines skipped. Units come out in ascending id order.
/// Throws ErrorKind::Parse (with the 1-based line number) on malformed lines
/// and ErrorKind::Validation when a unit's cycles are not contiguous.
std::vector<EngineSeries> parse_cmapss(std::istream& in, SeriesKind kind);
std::vector<EngineSeries> parse_cmapss_file(const std::string& path, SeriesKind kind);

/// Shortest decimal text that reads back to the same 26 values.
std::string format_record(const RawRecord& r);

/// Assigns the k-th RUL line to the k-th series.
void attach_truth_rul(std::vector<EngineSeries>& series, const std::vector<std::string>& rul_lines);
std::vector<std::string> read_lines(std::istream& in);

NormalizationStats fit_minmax(const std::vector<EngineSeries>& training, const FeatureSpec& spec);

/// (v - min) / (max - min), clamped to [0, 1]; constant features map to 0.
void apply_minmax(std::vector<double>& row, const NormalizationStats& stats);
nn::Tensor apply_minmax(const nn::Tensor& values, const NormalizationStats& stats);

/// min(cap, total_life - cycle). Throws ErrorKind::Domain if the cycle lies
/// outside 1..total_life or cap <= 0.
double piecewise_rul(int total_life, int cycle, double cap);

/// Stride-1 windows of `window_length` rows. Series shorter than the window
/// are left-padded by repeating their first record, giving one window.
/// Targets use total_life for training series and length + truth_rul for
/// pruned ones.
std::vector<TimeWindow> make_windows(const EngineSeries& series, std::size_t window_length,
                                     const FeatureSpec& spec, const NormalizationStats& stats,
                                     double cap);

WindowedDataset make_dataset(const std::vector<EngineSeries>& series, SeriesKind kind,
                             std::size_t window_length, const FeatureSpec& spec,
                             const NormalizationStats& stats, double cap);

// Versioned JSON layout; see README for the schema.
std::string dataset_to_json(const WindowedDataset& ds);
WindowedDataset dataset_from_json(const std::string& text);

}  // namespace rulprior::data
