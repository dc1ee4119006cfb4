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

#include "rulprior/data_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <string_view>

#include "json.hpp"
#include "rulprior/errors.hpp"

namespace rulprior::data {
namespace {

using nlohmann::json;

constexpr int kDatasetFormatVersion = 1;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

double parse_double(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": non-numeric field '" +
                               std::string(field) + "'");
  }
  return v;
}

int parse_int(std::string_view field, std::size_t line_no) {
  const double v = parse_double(field, line_no);
  if (v != std::floor(v) || v < 1.0 || v > 1e9) {
    fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected a positive integer, got '" +
                               std::string(field) + "'");
  }
  return static_cast<int>(v);
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const char* kind_name(SeriesKind kind) { return kind == SeriesKind::Training ? "train" : "test"; }

}  // namespace

FeatureSpec FeatureSpec::defaults() {
  return FeatureSpec{{2, 3, 4, 7, 8, 9, 11, 12, 13, 14, 15, 17, 20, 21}, 3};
}

void FeatureSpec::validate() const {
  if (settings < 0 || settings > static_cast<int>(kSettingCount)) {
    fail(ErrorKind::Config, "settings count must lie in 0..3");
  }
  for (int s : sensor_indices) {
    if (s < 1 || s > static_cast<int>(kSensorCount)) {
      fail(ErrorKind::Config, "sensor index " + std::to_string(s) + " outside 1..21");
    }
  }
  if (count() == 0) fail(ErrorKind::Config, "feature selection is empty");
}

std::vector<double> FeatureSpec::extract(const RawRecord& r) const {
  std::vector<double> out;
  out.reserve(count());
  for (int i = 0; i < settings; ++i) out.push_back(r.settings[static_cast<std::size_t>(i)]);
  for (int s : sensor_indices) out.push_back(r.sensors[static_cast<std::size_t>(s - 1)]);
  return out;
}

std::size_t WindowedDataset::window_count() const noexcept {
  std::size_t n = 0;
  for (const auto& u : units) n += u.windows.size();
  return n;
}

std::vector<EngineSeries> parse_cmapss(std::istream& in, SeriesKind kind) {
  std::map<int, EngineSeries> by_unit;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() < kRecordFields) {
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected at least 26 fields, got " +
                                 std::to_string(fields.size()));
    }
    RawRecord r;
    r.unit_id = parse_int(fields[0], line_no);
    r.cycle = parse_int(fields[1], line_no);
    for (std::size_t i = 0; i < kSettingCount; ++i) r.settings[i] = parse_double(fields[2 + i], line_no);
    for (std::size_t i = 0; i < kSensorCount; ++i) {
      r.sensors[i] = parse_double(fields[2 + kSettingCount + i], line_no);
    }
    EngineSeries& s = by_unit[r.unit_id];
    s.unit_id = r.unit_id;
    s.records.push_back(r);
  }

  std::vector<EngineSeries> out;
  out.reserve(by_unit.size());
  for (auto& [id, s] : by_unit) {
    std::stable_sort(s.records.begin(), s.records.end(),
                     [](const RawRecord& a, const RawRecord& b) { return a.cycle < b.cycle; });
    for (std::size_t i = 1; i < s.records.size(); ++i) {
      if (s.records[i].cycle != s.records[i - 1].cycle + 1) {
        fail(ErrorKind::Validation, "unit " + std::to_string(id) + ": cycles are not contiguous (" +
                                        std::to_string(s.records[i - 1].cycle) + " then " +
                                        std::to_string(s.records[i].cycle) + ")");
      }
    }
    if (kind == SeriesKind::Training) s.total_life = static_cast<int>(s.records.size());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<EngineSeries> parse_cmapss_file(const std::string& path, SeriesKind kind) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  try {
    return parse_cmapss(in, kind);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string format_record(const RawRecord& r) {
  std::string out = std::to_string(r.unit_id) + " " + std::to_string(r.cycle);
  for (double v : r.settings) out += " " + shortest(v);
  for (double v : r.sensors) out += " " + shortest(v);
  return out;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!split_fields(line).empty()) lines.push_back(line);
  }
  return lines;
}

void attach_truth_rul(std::vector<EngineSeries>& series, const std::vector<std::string>& rul_lines) {
  if (series.size() != rul_lines.size()) {
    fail(ErrorKind::Validation, "RUL file has " + std::to_string(rul_lines.size()) +
                                    " values for " + std::to_string(series.size()) + " units");
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto fields = split_fields(rul_lines[k]);
    if (fields.empty()) fail(ErrorKind::Parse, "RUL line " + std::to_string(k + 1) + " is empty");
    const double v = parse_double(fields[0], k + 1);
    if (v < 0.0 || v != std::floor(v)) {
      fail(ErrorKind::Parse, "RUL line " + std::to_string(k + 1) + ": expected a non-negative integer");
    }
    series[k].truth_rul = static_cast<int>(v);
  }
}

NormalizationStats fit_minmax(const std::vector<EngineSeries>& training, const FeatureSpec& spec) {
  spec.validate();
  NormalizationStats stats;
  bool first = true;
  for (const auto& s : training) {
    for (const auto& r : s.records) {
      const auto row = spec.extract(r);
      if (first) {
        stats.min = row;
        stats.max = row;
        first = false;
        continue;
      }
      for (std::size_t j = 0; j < row.size(); ++j) {
        stats.min[j] = std::min(stats.min[j], row[j]);
        stats.max[j] = std::max(stats.max[j], row[j]);
      }
    }
  }
  if (first) fail(ErrorKind::Domain, "cannot fit normalization on zero records");
  return stats;
}

void apply_minmax(std::vector<double>& row, const NormalizationStats& stats) {
  if (row.size() != stats.size()) {
    fail(ErrorKind::Domain, "row has " + std::to_string(row.size()) + " features, stats have " +
                                std::to_string(stats.size()));
  }
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double range = stats.max[j] - stats.min[j];
    const double v = range > 0.0 ? (row[j] - stats.min[j]) / range : 0.0;
    row[j] = std::clamp(v, 0.0, 1.0);
  }
}

nn::Tensor apply_minmax(const nn::Tensor& values, const NormalizationStats& stats) {
  nn::Tensor out = values;
  std::vector<double> row(values.cols());
  for (std::size_t i = 0; i < values.rows(); ++i) {
    std::copy(values.row(i).begin(), values.row(i).end(), row.begin());
    apply_minmax(row, stats);
    for (std::size_t j = 0; j < row.size(); ++j) out(i, j) = row[j];
  }
  return out;
}

double piecewise_rul(int total_life, int cycle, double cap) {
  if (!(cap > 0.0)) fail(ErrorKind::Domain, "RUL cap must be positive");
  if (cycle < 1 || cycle > total_life) {
    fail(ErrorKind::Domain, "cycle " + std::to_string(cycle) + " outside 1.." + std::to_string(total_life));
  }
  return std::min(cap, static_cast<double>(total_life - cycle));
}

std::vector<TimeWindow> make_windows(const EngineSeries& series, std::size_t window_length,
                                     const FeatureSpec& spec, const NormalizationStats& stats,
                                     double cap) {
  if (series.records.empty()) {
    fail(ErrorKind::Domain, "unit " + std::to_string(series.unit_id) + " has no records");
  }
  if (window_length == 0) fail(ErrorKind::Domain, "window length must be positive");
  if (spec.count() != stats.size()) fail(ErrorKind::Domain, "feature spec and stats disagree");

  const int length = static_cast<int>(series.length());
  int life = 0;
  if (series.total_life) {
    life = *series.total_life;
  } else if (series.truth_rul) {
    life = length + *series.truth_rul;
  } else {
    fail(ErrorKind::Domain, "unit " + std::to_string(series.unit_id) +
                                " has neither a total life nor a ground-truth RUL");
  }

  std::vector<std::vector<double>> rows;
  rows.reserve(series.length());
  for (const auto& r : series.records) {
    auto row = spec.extract(r);
    apply_minmax(row, stats);
    rows.push_back(std::move(row));
  }
  const std::size_t pad = series.length() < window_length ? window_length - series.length() : 0;
  if (pad > 0) rows.insert(rows.begin(), pad, rows.front());

  const std::size_t count = rows.size() - window_length + 1;
  const std::size_t features = spec.count();
  std::vector<TimeWindow> windows;
  windows.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    TimeWindow tw;
    tw.unit_id = series.unit_id;
    tw.window_id = static_cast<int>(w + 1);
    tw.values = nn::Tensor::matrix(window_length, features);
    for (std::size_t t = 0; t < window_length; ++t) {
      for (std::size_t j = 0; j < features; ++j) tw.values(t, j) = rows[w + t][j];
    }
    // Position of the window's last row within the (unpadded) series.
    const int last_index = static_cast<int>(w + window_length - pad);
    tw.rul_target = piecewise_rul(life, last_index, cap);
    windows.push_back(std::move(tw));
  }
  return windows;
}

WindowedDataset make_dataset(const std::vector<EngineSeries>& series, SeriesKind kind,
                             std::size_t window_length, const FeatureSpec& spec,
                             const NormalizationStats& stats, double cap) {
  WindowedDataset ds;
  ds.kind = kind;
  ds.features = spec;
  ds.stats = stats;
  ds.window_length = window_length;
  ds.rul_cap = cap;
  for (const auto& s : series) {
    WindowedUnit u;
    u.unit_id = s.unit_id;
    u.total_life = s.total_life;
    u.truth_rul = s.truth_rul;
    u.windows = make_windows(s, window_length, spec, stats, cap);
    ds.units.push_back(std::move(u));
  }
  return ds;
}

std::string dataset_to_json(const WindowedDataset& ds) {
  json units = json::array();
  for (const auto& u : ds.units) {
    json windows = json::array();
    for (const auto& w : u.windows) {
      json rows = json::array();
      for (std::size_t t = 0; t < w.values.rows(); ++t) {
        rows.push_back(std::vector<double>(w.values.row(t).begin(), w.values.row(t).end()));
      }
      windows.push_back({{"window_id", w.window_id}, {"rul_target", w.rul_target}, {"values", rows}});
    }
    json unit = {{"unit_id", u.unit_id}, {"windows", windows}};
    unit["total_life"] = u.total_life ? json(*u.total_life) : json(nullptr);
    unit["truth_rul"] = u.truth_rul ? json(*u.truth_rul) : json(nullptr);
    units.push_back(std::move(unit));
  }
  json doc = {
      {"format", "rulprior.windows"},
      {"version", kDatasetFormatVersion},
      {"kind", kind_name(ds.kind)},
      {"window_length", ds.window_length},
      {"rul_cap", ds.rul_cap},
      {"features", {{"sensors", ds.features.sensor_indices}, {"settings", ds.features.settings}}},
      {"stats", {{"min", ds.stats.min}, {"max", ds.stats.max}}},
      {"units", units},
  };
  return doc.dump();
}

WindowedDataset dataset_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "rulprior.windows") fail(ErrorKind::Validation, "not a windowed dataset file");
    if (doc.at("version").get<int>() != kDatasetFormatVersion) {
      fail(ErrorKind::Validation, "unsupported windowed dataset version");
    }
    WindowedDataset ds;
    ds.kind = doc.at("kind") == "train" ? SeriesKind::Training : SeriesKind::Test;
    ds.window_length = doc.at("window_length").get<std::size_t>();
    ds.rul_cap = doc.at("rul_cap").get<double>();
    ds.features.sensor_indices = doc.at("features").at("sensors").get<std::vector<int>>();
    ds.features.settings = doc.at("features").at("settings").get<int>();
    ds.features.validate();
    ds.stats.min = doc.at("stats").at("min").get<std::vector<double>>();
    ds.stats.max = doc.at("stats").at("max").get<std::vector<double>>();
    const std::size_t features = ds.features.count();
    if (ds.stats.min.size() != features || ds.stats.max.size() != features) {
      fail(ErrorKind::Validation, "normalization stats do not match the feature count");
    }
    for (const auto& ju : doc.at("units")) {
      WindowedUnit u;
      u.unit_id = ju.at("unit_id").get<int>();
      if (!ju.at("total_life").is_null()) u.total_life = ju.at("total_life").get<int>();
      if (!ju.at("truth_rul").is_null()) u.truth_rul = ju.at("truth_rul").get<int>();
      for (const auto& jw : ju.at("windows")) {
        TimeWindow w;
        w.unit_id = u.unit_id;
        w.window_id = jw.at("window_id").get<int>();
        w.rul_target = jw.at("rul_target").get<double>();
        const auto rows = jw.at("values").get<std::vector<std::vector<double>>>();
        if (rows.size() != ds.window_length) fail(ErrorKind::Validation, "window has the wrong length");
        w.values = nn::Tensor::matrix(ds.window_length, features);
        for (std::size_t t = 0; t < rows.size(); ++t) {
          if (rows[t].size() != features) fail(ErrorKind::Validation, "window row has the wrong width");
          for (std::size_t j = 0; j < features; ++j) w.values(t, j) = rows[t][j];
        }
        u.windows.push_back(std::move(w));
      }
      ds.units.push_back(std::move(u));
    }
    return ds;
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, std::string("malformed windowed dataset: ") + e.what());
  }
}

}  // namespace rulprior::data
