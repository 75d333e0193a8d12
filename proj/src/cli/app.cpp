#include "spot/cli/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <ostream>
#include <sstream>

#include "commands.hpp"

namespace spot::cli {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return kExitConfig;
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kFormat: return kExitFormat;
    case ErrorKind::kDimension: return kExitDimension;
    case ErrorKind::kNumeric: return kExitNumeric;
    case ErrorKind::kContract: return kExitContract;
    case ErrorKind::kShape: return kExitShape;
    case ErrorKind::kEmptySupport: return kExitEmptySupport;
  }
  return kExitOther;
}

std::string error_line(const std::string& kind, int code, const std::string& message) {
  std::string escaped;
  for (char c : message) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += (c == '\n') ? ' ' : c;
  }
  return "error: kind=" + kind + " code=" + std::to_string(code) + " message=\"" + escaped +
         "\"";
}

namespace {

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON file of config overrides");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Run seed");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Supported policy optimization for offline RL", "spot"};
  app.require_subcommand(1);
  std::function<void()> action;

  GenDataOptions gen;
  auto* c_gen = app.add_subcommand("gen-data", "Generate an offline dataset");
  add_common(c_gen, gen.common);
  c_gen->add_option("--env", gen.env, "pointmaze or pendulum");
  c_gen->add_option("--regime", gen.regime, "expert, medium, mixed or stitch");
  c_gen->add_option("--size", gen.size, "Number of transitions");
  c_gen->add_flag("--raw", gen.raw, "Skip state normalization");
  c_gen->callback([&] { action = [&] { cmd_gen_data(gen, out); }; });

  TrainVaeOptions vae;
  auto* c_vae = app.add_subcommand("train-vae", "Fit the behavior density");
  add_common(c_vae, vae.common);
  c_vae->add_option("--data", vae.data, "Dataset file")->required();
  c_vae->add_option("--iterations", vae.iterations, "Gradient steps");
  c_vae->add_option("--kind", vae.kind, "cvae or gaussian");
  c_vae->callback([&] { action = [&] { cmd_train_vae(vae, out); }; });

  TrainSpotOptions spot;
  auto* c_spot = app.add_subcommand("train-spot", "Offline policy training");
  add_common(c_spot, spot.common);
  c_spot->add_option("--data", spot.data, "Dataset file")->required();
  c_spot->add_option("--vae", spot.vae, "Density checkpoint")->required();
  c_spot->add_option("--lambda", spot.lambda, "Constraint weight");
  c_spot->add_option("--steps", spot.steps, "Gradient steps");
  c_spot->callback([&] { action = [&] { cmd_train_spot(spot, out); }; });

  FinetuneOptions ft;
  auto* c_ft = app.add_subcommand("finetune", "Online fine-tuning of an offline agent");
  add_common(c_ft, ft.common);
  c_ft->add_option("--agent", ft.agent, "Agent checkpoint")->required();
  c_ft->add_option("--data", ft.data, "Offline dataset seeding the buffer")->required();
  c_ft->add_option("--env", ft.env, "Environment (defaults to the dataset's)");
  c_ft->add_option("--steps", ft.steps, "Online environment steps");
  c_ft->add_flag("--scratch", ft.scratch,
                 "Train a fresh agent online with lambda 0 and an empty buffer");
  c_ft->callback([&] { action = [&] { cmd_finetune(ft, out); }; });

  EvalOptions ev;
  auto* c_ev = app.add_subcommand("eval", "Evaluate a policy");
  add_common(c_ev, ev.common);
  c_ev->add_option("--agent", ev.agent, "Agent checkpoint");
  c_ev->add_option("--policy", ev.policy, "Policy checkpoint");
  c_ev->add_option("--env", ev.env, "Environment")->required();
  c_ev->add_option("--episodes", ev.episodes, "Episodes");
  c_ev->callback([&] { action = [&] { cmd_eval(ev, out); }; });

  TrainBcOptions bc;
  auto* c_bc = app.add_subcommand("train-bc", "Behavior cloning baseline");
  add_common(c_bc, bc.common);
  c_bc->add_option("--data", bc.data, "Dataset file")->required();
  c_bc->add_option("--steps", bc.steps, "Gradient steps");
  c_bc->callback([&] { action = [&] { cmd_train_bc(bc, out); }; });

  CalibrateOptions cal;
  auto* c_cal = app.add_subcommand("calibrate", "Measure random and expert reference returns");
  add_common(c_cal, cal.common);
  c_cal->add_option("--env", cal.env, "Environment (default: all)");
  c_cal->add_option("--episodes", cal.episodes, "Episodes per policy");
  c_cal->callback([&] { action = [&] { cmd_calibrate(cal, out); }; });

  auto* c_an = app.add_subcommand("analyze", "Analyses");
  c_an->require_subcommand(1);

  TabularBoundOptions tb;
  auto* c_tb = c_an->add_subcommand("tabular-bound", "Supported backup gap vs bound");
  add_common(c_tb, tb.common);
  c_tb->add_option("--mdps", tb.mdps, "Number of random MDPs");
  c_tb->callback([&] { action = [&] { cmd_tabular_bound(tb, out); }; });

  DensityProfileOptions dp;
  auto* c_dp = c_an->add_subcommand("density-profile", "Percentiles of log behavior density");
  add_common(c_dp, dp.common);
  c_dp->add_option("--data", dp.data, "Dataset file")->required();
  c_dp->add_option("--vae", dp.vae, "Density checkpoint");
  c_dp->add_option("--agent", dp.agents, "Agent checkpoint (repeatable)");
  c_dp->add_option("--policy", dp.policies, "Policy checkpoint (repeatable)");
  c_dp->add_option("--states", dp.states, "Dataset states profiled");
  c_dp->add_option("--samples", dp.samples, "Latent samples per estimate");
  c_dp->callback([&] { action = [&] { cmd_density_profile(dp, out); }; });

  SweepOptions sw;
  auto* c_sw = c_an->add_subcommand("lambda-sweep", "Train over a lambda grid and seeds");
  add_common(c_sw, sw.common);
  c_sw->add_option("--data", sw.data, "Dataset file")->required();
  c_sw->add_option("--vae", sw.vae, "Density checkpoint")->required();
  c_sw->add_option("--lambdas", sw.lambdas, "Lambda grid")->delimiter(',');
  c_sw->add_option("--seeds", sw.seeds, "Seeds")->delimiter(',');
  c_sw->add_option("--steps", sw.steps, "Gradient steps per run");
  c_sw->add_option("--jobs", sw.jobs, "Concurrent runs");
  c_sw->add_flag("--save-agents", sw.save_agents, "Keep every trained agent");
  c_sw->callback([&] { action = [&] { cmd_lambda_sweep(sw, out); }; });

  LEffectOptions le;
  auto* c_le = c_an->add_subcommand("l-effect", "Score vs latent samples L");
  add_common(c_le, le.common);
  c_le->add_option("--data", le.data, "Dataset file")->required();
  c_le->add_option("--vae", le.vae, "Density checkpoint")->required();
  c_le->add_option("--ls", le.ls, "Values of L")->delimiter(',');
  c_le->add_option("--seeds", le.seeds, "Seeds")->delimiter(',');
  c_le->add_option("--steps", le.steps, "Gradient steps per run");
  c_le->add_option("--lambda", le.lambda, "Constraint weight");
  c_le->add_option("--jobs", le.jobs, "Concurrent runs");
  c_le->callback([&] { action = [&] { cmd_l_effect(le, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    // --help at any level prints that level's usage.
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_line("usage", kExitUsage, e.what()) << '\n';
    return kExitUsage;
  }

  try {
    action();
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    err << error_line(to_string(e.kind()), code, e.what()) << '\n';
    return code;
  } catch (const std::exception& e) {
    err << error_line("other", kExitOther, e.what()) << '\n';
    return kExitOther;
  }
  return kExitOk;
}

}  // namespace spot::cli
