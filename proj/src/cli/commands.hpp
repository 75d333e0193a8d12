#pragma once

// Option bundles filled by the argument parser and the command bodies that
// consume them. Optional fields override the resolved config only when set.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spot::cli {

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct GenDataOptions {
  CommonOptions common;
  std::string env;
  std::string regime;
  std::optional<std::size_t> size;
  bool raw = false;
};

struct TrainVaeOptions {
  CommonOptions common;
  std::string data;
  std::optional<std::size_t> iterations;
  std::string kind;
};

struct TrainSpotOptions {
  CommonOptions common;
  std::string data;
  std::string vae;
  std::optional<double> lambda;
  std::optional<std::size_t> steps;
};

struct FinetuneOptions {
  CommonOptions common;
  std::string agent;
  std::string env;
  std::string data;
  std::optional<std::size_t> steps;
  bool scratch = false;
};

struct EvalOptions {
  CommonOptions common;
  std::string agent;
  std::string policy;
  std::string env;
  std::optional<std::size_t> episodes;
};

struct TrainBcOptions {
  CommonOptions common;
  std::string data;
  std::optional<std::size_t> steps;
};

struct CalibrateOptions {
  CommonOptions common;
  std::string env;
  std::optional<std::size_t> episodes;
};

struct TabularBoundOptions {
  CommonOptions common;
  std::optional<std::size_t> mdps;
};

struct DensityProfileOptions {
  CommonOptions common;
  std::string data;
  std::string vae;
  std::vector<std::string> agents;
  std::vector<std::string> policies;
  std::optional<std::size_t> states;
  std::optional<std::size_t> samples;
};

struct SweepOptions {
  CommonOptions common;
  std::string data;
  std::string vae;
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> steps;
  std::size_t jobs = 1;
  bool save_agents = false;
};

struct LEffectOptions {
  CommonOptions common;
  std::string data;
  std::string vae;
  std::vector<std::size_t> ls;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> steps;
  std::optional<double> lambda;
  std::size_t jobs = 1;
};

void cmd_gen_data(const GenDataOptions& o, std::ostream& out);
void cmd_train_vae(const TrainVaeOptions& o, std::ostream& out);
void cmd_train_spot(const TrainSpotOptions& o, std::ostream& out);
void cmd_finetune(const FinetuneOptions& o, std::ostream& out);
void cmd_eval(const EvalOptions& o, std::ostream& out);
void cmd_train_bc(const TrainBcOptions& o, std::ostream& out);
void cmd_calibrate(const CalibrateOptions& o, std::ostream& out);
void cmd_tabular_bound(const TabularBoundOptions& o, std::ostream& out);
void cmd_density_profile(const DensityProfileOptions& o, std::ostream& out);
void cmd_lambda_sweep(const SweepOptions& o, std::ostream& out);
void cmd_l_effect(const LEffectOptions& o, std::ostream& out);

}  // namespace spot::cli
