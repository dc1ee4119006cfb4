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

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rulprior/rulprior.h"

namespace {

struct Flags {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  bool intermediate = false;
};

void print_line(const char* line, void*) { std::printf("%s\n", line); }

int report(rp_status s) {
  if (s != RP_OK) std::fprintf(stderr, "error: %s\n", rp_last_error());
  return static_cast<int>(s);
}

void add_string(CLI::App* cmd, Flags& flags, const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>("--" + key, [&flags, key](const std::string& v) { flags.overrides[key] = v; },
                                        help);
}

void add_run_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON configuration file");
  add_string(cmd, flags, "dataset", "FD001, FD002, FD003 or FD004 (selects the preset)");
  add_string(cmd, flags, "data-dir", "directory holding the dataset files");
  add_string(cmd, flags, "train-file", "run-to-failure training file");
  add_string(cmd, flags, "test-file", "pruned test file");
  add_string(cmd, flags, "rul-file", "ground-truth RUL of the test units");
  add_string(cmd, flags, "out", "output directory");
  add_string(cmd, flags, "model", "model file (default <out>/model.json)");
  add_string(cmd, flags, "library", "library file (default <out>/library.json)");
  add_string(cmd, flags, "seed", "random seed");
  add_string(cmd, flags, "epochs", "training epochs");
  add_string(cmd, flags, "batch", "mini-batch size");
  add_string(cmd, flags, "window", "window length T");
  add_string(cmd, flags, "codebook", "codebook size N_e");
  add_string(cmd, flags, "latent-sequences", "latent sequences per window S");
  add_string(cmd, flags, "latent-dim", "codebook vector width E");
  add_string(cmd, flags, "model-dim", "Transformer width");
  add_string(cmd, flags, "ffn-hidden", "feed-forward hidden width");
  add_string(cmd, flags, "encoder-layers", "encoder blocks");
  add_string(cmd, flags, "encoder-heads", "encoder attention heads");
  add_string(cmd, flags, "decoder-layers", "decoder blocks");
  add_string(cmd, flags, "decoder-heads", "decoder attention heads");
  add_string(cmd, flags, "beta", "commitment weight");
  add_string(cmd, flags, "learning-rate", "Adam learning rate");
  add_string(cmd, flags, "rul-cap", "piecewise RUL cap");
  add_string(cmd, flags, "position-origin", "0 or 1, first position index");
  add_string(cmd, flags, "lambda", "EMA weight of the previous transition matrix");
  add_string(cmd, flags, "epsilon", "transition regularization");
  add_string(cmd, flags, "tolerance", "steady-state residual tolerance");
  add_string(cmd, flags, "max-iterations", "steady-state iteration limit");
  add_string(cmd, flags, "k", "neighbors per query");
  add_string(cmd, flags, "sensors", "comma-separated sensor numbers");
  add_string(cmd, flags, "settings", "operational settings used as features (0-3)");
  cmd->add_flag("--intermediate-predictions", flags.intermediate, "also write per-window RUL trajectories");
}

int run_stage(const Flags& flags, rp_status (*stage)(const rp_config*, rp_log_fn, void*)) {
  std::vector<const char*> keys, values;
  auto overrides = flags.overrides;
  if (flags.intermediate) overrides["intermediate-predictions"] = "true";
  for (const auto& [k, v] : overrides) {
    keys.push_back(k.c_str());
    values.push_back(v.c_str());
  }
  rp_config* cfg = nullptr;
  rp_status s = rp_config_resolve(flags.config_path.empty() ? nullptr : flags.config_path.c_str(), keys.data(),
                                  values.data(), keys.size(), &cfg);
  if (s != RP_OK) return report(s);
  s = stage(cfg, print_line, nullptr);
  rp_config_free(cfg);
  return report(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RUL estimation from Markov priors over vector-quantized latent states"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rp_version());

  struct Stage {
    const char* name;
    const char* help;
    rp_status (*fn)(const rp_config*, rp_log_fn, void*);
  };
  const Stage stages[] = {
      {"preprocess", "window and normalize the raw files", rp_cmd_preprocess},
      {"train", "train the model on the training windows", rp_cmd_train},
      {"build-library", "compute training priors and store them with their RUL", rp_cmd_build_library},
      {"predict", "predict the RUL of every test unit", rp_cmd_predict},
      {"evaluate", "score the predictions against the ground truth", rp_cmd_evaluate},
  };
  std::vector<Flags> flags(std::size(stages));
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < std::size(stages); ++i) {
    commands.push_back(app.add_subcommand(stages[i].name, stages[i].help));
    add_run_flags(commands.back(), flags[i]);
  }

  std::string synth_dir = ".", synth_tag = "SYN";
  std::uint64_t synth_seed = 0;
  std::size_t synth_train = 40, synth_test = 10;
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic run-to-failure fleet");
  synth->add_option("--out", synth_dir, "output directory");
  synth->add_option("--tag", synth_tag, "file name suffix");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--train-units", synth_train, "run-to-failure units");
  synth->add_option("--test-units", synth_test, "pruned units");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return RP_ERR_USAGE;
  }

  if (synth->parsed()) {
    return report(rp_synth(synth_dir.c_str(), synth_tag.c_str(), synth_seed, synth_train, synth_test));
  }
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (commands[i]->parsed()) return run_stage(flags[i], stages[i].fn);
  }
  return RP_ERR_USAGE;
}
