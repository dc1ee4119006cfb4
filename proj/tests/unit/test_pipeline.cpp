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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rulprior/errors.hpp"
#include "rulprior/metrics.hpp"
#include "rulprior/pipeline.hpp"
#include "rulprior/run_config.hpp"
#include "rulprior/rulprior.h"
#include "rulprior/synthetic.hpp"

namespace rulprior {
namespace {

namespace fs = std::filesystem;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

TEST(Presets, Fd001) {
  const auto c = resolve_config(std::nullopt, {{"dataset", "FD001"}});
  EXPECT_EQ(c.model.epochs, 100u);
  EXPECT_EQ(c.model.batch_size, 100u);
  EXPECT_EQ(c.model.window_length, 20u);
  EXPECT_EQ(c.model.codebook_size, 25u);
  EXPECT_EQ(c.prior.lambda, 0.9);
  EXPECT_EQ(c.neighbors, 30u);
  EXPECT_EQ(c.model.latent_sequences, 10u);
  EXPECT_EQ(c.model.latent_dim, 32u);
  EXPECT_EQ(c.model.learning_rate, 2e-4);
  EXPECT_EQ(c.model.rul_cap, 125.0);
  EXPECT_EQ(c.model.features, 17u);
  EXPECT_EQ(c.train_file, (fs::path(".") / "train_FD001.txt").string());
}

TEST(Presets, Fd004) {
  const auto c = resolve_config(std::nullopt, {{"dataset", "FD004"}});
  EXPECT_EQ(c.model.epochs, 150u);
  EXPECT_EQ(c.model.batch_size, 256u);
  EXPECT_EQ(c.model.window_length, 10u);
  EXPECT_EQ(c.model.codebook_size, 60u);
  EXPECT_EQ(c.prior.lambda, 0.99);
}

TEST(Presets, OthersAndUnknown) {
  EXPECT_EQ(resolve_config(std::nullopt, {{"dataset", "FD002"}}).model.codebook_size, 45u);
  EXPECT_EQ(resolve_config(std::nullopt, {{"dataset", "FD003"}}).model.window_length, 20u);
  EXPECT_EQ(kind_of([] { resolve_config(std::nullopt, {{"dataset", "FD009"}}); }), ErrorKind::Config);
}

TEST(Presets, Precedence) {
  const std::string file = R"({"dataset": "FD001", "epochs": 7, "k": 12, "lambda": 0.5})";
  auto c = resolve_config(file, {{"epochs", "1"}});
  EXPECT_EQ(c.model.epochs, 1u);
  EXPECT_EQ(c.neighbors, 12u);
  EXPECT_EQ(c.prior.lambda, 0.5);
  EXPECT_EQ(c.model.codebook_size, 25u);
  c = resolve_config(file, {{"dataset", "FD004"}});
  EXPECT_EQ(c.model.codebook_size, 60u);
  EXPECT_EQ(c.model.epochs, 7u);
}

TEST(Presets, BadValues) {
  EXPECT_EQ(kind_of([] { resolve_config(std::nullopt, {{"epochs", "ten"}}); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { resolve_config(std::nullopt, {{"nonsense", "1"}}); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { resolve_config("{", {}); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { resolve_config(std::nullopt, {{"k", "0"}}).validate(); }), ErrorKind::Config);
}

TEST(Presets, GetMirrorsSet) {
  RunConfig c;
  c.set("sensors", "2,3,4");
  c.set("lambda", "0.25");
  EXPECT_EQ(c.get("sensors"), "2,3,4");
  EXPECT_EQ(c.get("lambda"), "0.25");
  EXPECT_EQ(c.get("model"), (fs::path(".") / "model.json").string());
}

// A small end-to-end run on a synthetic fleet.
class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "rulprior_pipeline_test";
    fs::remove_all(dir_);
    synthetic::FleetOptions o;
    o.train_units = 6;
    o.test_units = 3;
    o.seed = 4;
    synthetic::write_fleet(synthetic::generate(o), dir_.string(), "SYN");
  }

  static std::map<std::string, std::string> overrides(const std::string& out) {
    return {{"train-file", (dir_ / "train_SYN.txt").string()},
            {"test-file", (dir_ / "test_SYN.txt").string()},
            {"rul-file", (dir_ / "RUL_SYN.txt").string()},
            {"out", (dir_ / out).string()},
            {"sensors", "2,3,4"},
            {"settings", "0"},
            {"window", "8"},
            {"codebook", "6"},
            {"latent-sequences", "3"},
            {"latent-dim", "4"},
            {"model-dim", "12"},
            {"encoder-layers", "1"},
            {"decoder-layers", "1"},
            {"epochs", "1"},
            {"batch", "64"},
            {"k", "5"}};
  }

  static RunConfig config(const std::string& out, std::map<std::string, std::string> extra = {}) {
    auto o = overrides(out);
    for (auto& [k, v] : extra) o[k] = v;
    return resolve_config(std::nullopt, o);
  }

  static void run_all(const RunConfig& c) {
    pipeline::preprocess(c);
    pipeline::train(c);
    pipeline::build_library(c);
    pipeline::predict(c);
    pipeline::evaluate(c);
  }

  static fs::path dir_;
};

fs::path PipelineTest::dir_;

TEST_F(PipelineTest, EndToEnd) {
  const auto c = config("run", {{"intermediate-predictions", "true"}});
  const auto summary = pipeline::preprocess(c);
  const auto train_series = data::parse_cmapss_file(c.train_file, data::SeriesKind::Training);
  std::size_t expected = 0;
  for (const auto& s : train_series) expected += s.length() - 8 + 1;
  EXPECT_EQ(summary.train_windows, expected);
  EXPECT_EQ(summary.train_units, 6u);
  EXPECT_EQ(summary.test_units, 3u);

  pipeline::train(c);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "training_log.csv"));
  const auto lib = pipeline::build_library(c);
  EXPECT_EQ(lib.size(), expected);
  const auto reloaded = similarity::library_from_json(pipeline::read_file(c.library_path()));
  EXPECT_EQ(reloaded.size(), expected);

  const auto preds = pipeline::predict(c);
  ASSERT_EQ(preds.units.size(), 3u);
  for (const auto& p : preds.units) {
    EXPECT_GE(p.predicted, 0.0);
    EXPECT_LE(p.predicted, 125.0);
  }
  EXPECT_FALSE(preds.trajectory.empty());
  EXPECT_TRUE(fs::exists(dir_ / "run" / "trajectories.csv"));

  const auto report = pipeline::evaluate(c);
  EXPECT_EQ(report.count(), 3u);
  for (std::size_t i = 1; i < report.count(); ++i) EXPECT_LE(report.units[i - 1].truth, report.units[i].truth);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "sorted_predictions.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "run" / "report.json"));
}

TEST_F(PipelineTest, RerunIsByteIdentical) {
  const auto a = config("det_a");
  const auto b = config("det_b");
  run_all(a);
  run_all(b);
  for (const char* f : {"train_windows.json", "test_windows.json", "model.json", "library.json", "predictions.csv"}) {
    EXPECT_EQ(pipeline::read_file(a.out_path(f)), pipeline::read_file(b.out_path(f))) << f;
  }
}

TEST_F(PipelineTest, MissingRulFileNamesPath) {
  const auto c = config("norul", {{"rul-file", (dir_ / "absent.txt").string()}});
  try {
    pipeline::preprocess(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("absent.txt"), std::string::npos);
  }
}

TEST_F(PipelineTest, MismatchedArtifactsAreRejected) {
  const auto c = config("mismatch");
  run_all(c);
  const auto other = config("mismatch", {{"codebook", "7"}});
  EXPECT_EQ(kind_of([&] { pipeline::build_library(other); }), ErrorKind::Validation);

  const auto other_dir = config("mismatch_b", {{"codebook", "7"}});
  pipeline::preprocess(other_dir);
  pipeline::train(other_dir);
  auto cross = c;
  cross.model_file = other_dir.model_path();
  EXPECT_EQ(kind_of([&] { pipeline::predict(cross); }), ErrorKind::Validation);

  // Same N_e but a different model: fingerprint check.
  const auto reseeded = config("mismatch_c", {{"seed", "9"}});
  pipeline::preprocess(reseeded);
  pipeline::train(reseeded);
  cross.model_file = reseeded.model_path();
  EXPECT_EQ(kind_of([&] { pipeline::predict(cross); }), ErrorKind::Validation);
}

TEST_F(PipelineTest, EvaluateRejectsUnknownUnits) {
  const auto c = config("ids");
  run_all(c);
  pipeline::write_file(c.out_path(pipeline::kPredictionsFile), "unit_id,predicted_rul\n1,10\n2,20\n9,30\n");
  EXPECT_EQ(kind_of([&] { pipeline::evaluate(c); }), ErrorKind::Validation);
  pipeline::write_file(c.out_path(pipeline::kPredictionsFile), "unit_id,predicted_rul\n1,10\n");
  EXPECT_EQ(kind_of([&] { pipeline::evaluate(c); }), ErrorKind::Validation);
}

TEST(PredictionsCsv, RoundTrip) {
  const std::vector<pipeline::UnitPrediction> p{{1, 12.5}, {2, 0.1}};
  const auto back = pipeline::predictions_from_csv(pipeline::predictions_to_csv(p));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].predicted, 0.1);
  EXPECT_THROW(pipeline::predictions_from_csv("unit_id,predicted_rul\n1;2\n"), Error);
}

TEST(Synthetic, FleetShape) {
  synthetic::FleetOptions o;
  const auto f = synthetic::generate(o);
  ASSERT_EQ(f.train.size(), 40u);
  ASSERT_EQ(f.test.size(), 10u);
  for (const auto& s : f.train) {
    EXPECT_GE(*s.total_life, 80);
    EXPECT_LE(*s.total_life, 150);
  }
  for (const auto& s : f.test) {
    EXPECT_GE(*s.truth_rul, 10);
    EXPECT_LE(*s.truth_rul, 120);
    EXPECT_GE(s.length(), 1u);
  }
  EXPECT_EQ(synthetic::generate(o).train[3].records[10].sensors, f.train[3].records[10].sensors);
}

TEST(CApi, StatusCodesAndMessages) {
  double out = 0.0;
  const double p[] = {1.0, 0.0}, q[] = {0.0, 1.0};
  EXPECT_EQ(rp_js(p, q, 2, &out), RP_OK);
  EXPECT_NEAR(out, std::log(2.0), 1e-12);
  EXPECT_STREQ(rp_last_error(), "");
  const double bad[] = {0.7, 0.7};
  EXPECT_EQ(rp_kl(bad, q, 2, &out), RP_ERR_VALIDATION);
  EXPECT_STRNE(rp_last_error(), "");
  const double pred[] = {1, 2}, truth[] = {0, 0};
  EXPECT_EQ(rp_rmse(pred, truth, 2, &out), RP_OK);
  EXPECT_NEAR(out, std::sqrt(2.5), 1e-12);
  EXPECT_EQ(rp_phm_score(pred, truth, 0, &out), RP_ERR_VALIDATION);
  EXPECT_EQ(rp_model_load("/nonexistent/model.json", nullptr), RP_ERR_USAGE);
  rp_model* m = nullptr;
  EXPECT_EQ(rp_model_load("/nonexistent/model.json", &m), RP_ERR_VALIDATION);
  EXPECT_EQ(m, nullptr);
}

TEST(CApi, ConfigResolution) {
  const char* keys[] = {"dataset", "epochs"};
  const char* values[] = {"FD004", "1"};
  rp_config* cfg = nullptr;
  ASSERT_EQ(rp_config_resolve(nullptr, keys, values, 2, &cfg), RP_OK);
  char buf[32];
  size_t needed = 0;
  ASSERT_EQ(rp_config_get(cfg, "codebook", buf, sizeof buf, &needed), RP_OK);
  EXPECT_STREQ(buf, "60");
  EXPECT_EQ(needed, 3u);
  ASSERT_EQ(rp_config_get(cfg, "epochs", buf, sizeof buf, nullptr), RP_OK);
  EXPECT_STREQ(buf, "1");
  EXPECT_EQ(rp_config_get(cfg, "bogus", buf, sizeof buf, nullptr), RP_ERR_USAGE);
  rp_config_free(cfg);

  const char* bad_keys[] = {"epochs"};
  const char* bad_values[] = {"-3"};
  EXPECT_EQ(rp_config_resolve(nullptr, bad_keys, bad_values, 1, &cfg), RP_ERR_USAGE);
  EXPECT_EQ(cfg, nullptr);
}

}  // namespace
}  // namespace rulprior
