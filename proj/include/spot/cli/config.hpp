#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "spot/agent/spot_agent.hpp"
#include "spot/agent/train.hpp"
#include "spot/cvae/cvae.hpp"
#include "spot/data/generate.hpp"
#include "spot/finetune/finetune.hpp"

namespace spot::cli {

struct TabularSweep {
  std::size_t mdps = 100;
  std::size_t states = 6;
  std::size_t actions = 4;
  double gamma = 0.9;
  std::vector<double> eps = {0.0, 0.05, 0.1, 0.2};
};

// Everything a command may need. Every field has a default, and the
// resolved value is written as config.json next to each command's outputs.
struct RunConfig {
  std::string env = "pointmaze";
  std::string regime = "stitch";
  std::size_t dataset_size = 50'000;
  bool normalize = true;
  data::GenerateOptions generate;

  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2};

  // "cvae" or "gaussian".
  std::string density = "cvae";
  cvae::CvaeConfig vae;

  agent::SpotConfig spot;
  std::vector<double> lambda_grid;
  std::vector<std::size_t> l_values = {1, 5, 10};
  agent::BcConfig bc;
  finetune::FinetuneConfig finetune;

  // Analysis-time density profile (percentiles of log pi_beta).
  agent::ProfileOptions profile;
  TabularSweep tabular;
  std::size_t eval_episodes = 20;
  std::size_t calibration_episodes = 100;
};

// Defaults for `env`, with the SPOT settings and lambda grid of its reward
// kind. Throws ConfigError for an unknown env.
RunConfig default_config(const std::string& env);

nlohmann::ordered_json to_json(const RunConfig& config);
// Applies the keys of `overrides` on top of `base`. Unknown keys and values
// of the wrong type are ConfigErrors.
RunConfig apply_overrides(RunConfig base, const nlohmann::json& overrides);
// Parses a config file; a missing file is an IoError, malformed JSON a
// ConfigError. The "env" key (if any) picks the defaults it overrides.
RunConfig load_config(const std::string& path);

// Checks cross-field consistency and the per-section validate() calls.
void validate(const RunConfig& config);

}  // namespace spot::cli
