#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "spot/agent/policy.hpp"
#include "spot/agent/spot_agent.hpp"
#include "spot/agent/train.hpp"
#include "spot/cli/artifacts.hpp"
#include "spot/cli/config.hpp"
#include "spot/cvae/cvae.hpp"
#include "spot/cvae/density.hpp"
#include "spot/cvae/gaussian.hpp"
#include "spot/data/dataset.hpp"
#include "spot/data/generate.hpp"
#include "spot/envs/env.hpp"
#include "spot/envs/reference.hpp"
#include "spot/errors.hpp"
#include "spot/finetune/finetune.hpp"
#include "spot/tabular/mdp.hpp"

namespace spot::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Every command records this many trailing loss values at most.
constexpr std::size_t kLossStride = 100;

std::ostringstream csv() {
  std::ostringstream os;
  os << std::setprecision(17);
  return os;
}

// Config for one command: defaults of `env`, then the --config file, then
// flags (applied by the caller). When `env` comes from an input artifact,
// a config file naming a different env is rejected.
RunConfig resolve(const CommonOptions& common, const std::string& env,
                  bool env_from_artifact) {
  json file = json::object();
  if (!common.config.empty()) {
    std::ifstream in(common.config);
    if (!in) throw IoError("cannot open config file '" + common.config + "'");
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("malformed config '" + common.config + "': " + e.what());
    }
    if (!file.is_object()) throw ConfigError("config must be a JSON object");
  }
  std::string file_env;
  if (const auto it = file.find("env"); it != file.end()) {
    if (!it->is_string()) throw ConfigError("config key 'env' must be a string");
    file_env = it->get<std::string>();
  }
  if (env_from_artifact && !file_env.empty() && file_env != env) {
    throw ConfigError("config env '" + file_env + "' does not match input env '" + env + "'");
  }
  const std::string chosen = !env.empty() ? env : (!file_env.empty() ? file_env : "pointmaze");
  file.erase("env");
  RunConfig c = apply_overrides(default_config(chosen), file);
  c.env = chosen;
  if (common.seed) c.seed = *common.seed;
  return c;
}

std::shared_ptr<const cvae::BehaviorDensity> read_density(const std::string& path) {
  return std::shared_ptr<const cvae::BehaviorDensity>(cvae::load_density(path));
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string(flag) + " is required");
}

void check_env_fits(const envs::EnvSpec& spec, std::size_t state_dim,
                    std::size_t action_dim, const std::string& what) {
  if (spec.state_dim != state_dim || spec.action_dim != action_dim) {
    throw DimensionError(what + " has dims (" + std::to_string(state_dim) + ", " +
                         std::to_string(action_dim) + ") but env " + spec.name +
                         " has (" + std::to_string(spec.state_dim) + ", " +
                         std::to_string(spec.action_dim) + ")");
  }
}

std::string loss_csv(const std::vector<double>& trace) {
  std::ostringstream os = csv();
  os << "iteration,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if ((i + 1) % kLossStride == 0 || i + 1 == trace.size()) {
      os << i + 1 << ',' << trace[i] << '\n';
    }
  }
  return os.str();
}

std::string records_text(const agent::TrainLog& log, const std::string& run_id) {
  std::ostringstream lines;
  log.write_lines(lines);
  std::istringstream in(lines.str());
  std::string out, line;
  while (std::getline(in, line)) out += "run=" + run_id + ' ' + line + '\n';
  return out;
}

void write_training_outputs(RunRecorder& rec, const agent::SpotAgent& agent,
                            const agent::TrainLog& log) {
  agent::save_agent(rec.dir() / "agent.ckpt", agent);
  rec.add_output_file("agent.ckpt");
  rec.add_output("records.log", records_text(log, rec.run_id()));
  std::ostringstream summary;
  log.write_summary_csv(summary);
  rec.add_output("summary.csv", summary.str());
}

// Runs fn(0..n-1) on up to `jobs` threads; rethrows the first failure in
// index order.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct SweepResult {
  double percentile5 = 0.0;
  double normalized_score = 0.0;
  double goal_rate = 0.0;
};

// Offline training followed by a final evaluation and constraint profile.
SweepResult train_and_score(const data::OfflineDataset& ds,
                            std::shared_ptr<const cvae::BehaviorDensity> density,
                            const agent::SpotConfig& config,
                            const agent::ProfileOptions& profile, std::uint64_t seed,
                            const fs::path& save_to) {
  const agent::OfflineRun run = agent::train_offline(ds, std::move(density), config, seed);
  const auto env = envs::make_env(ds.env_name());
  const agent::PolicyEvaluation ev = agent::evaluate(
      run.agent.policy(), *env, config.eval_episodes, agent::seeded_stream(seed, 2)());
  std::mt19937_64 rng = agent::seeded_stream(seed, 5);
  const agent::ProfileSummary p =
      agent::constraint_strength_profile(run.agent, ds, profile, rng);
  if (!save_to.empty()) agent::save_agent(save_to, run.agent);
  return {p.p5, ev.normalized_score, ev.goal_rate};
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::string label(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

void cmd_gen_data(const GenDataOptions& o, std::ostream& out) {
  RunConfig c = resolve(o.common, o.env, false);
  if (!o.regime.empty()) c.regime = o.regime;
  if (o.size) c.dataset_size = *o.size;
  if (o.raw) c.normalize = false;
  validate(c);
  RunRecorder rec("gen-data", resolve_output_dir(o.common.out, "gen-data"), to_json(c), c.seed);
  data::OfflineDataset ds =
      data::generate(c.env, data::parse_regime(c.regime), c.dataset_size, c.seed, c.generate);
  if (c.normalize) ds = data::normalize_states(ds);
  data::save_dataset(rec.dir() / "dataset.bin", ds);
  rec.add_output_file("dataset.bin");

  std::ostringstream stats = csv();
  stats << "transitions,episodes,mean_return,normalized_score\n";
  stats << ds.size() << ',' << ds.episodes().size() << ',';
  try {
    const double r = data::mean_episode_return(ds);
    stats << r << ',' << envs::normalized_score(r, c.env) << '\n';
  } catch (const ContractError&) {
    // Stitch data holds no complete trajectory.
    stats << "nan,nan\n";
  }
  rec.add_output("dataset_stats.csv", stats.str());
  rec.finish();
  out << "gen-data: " << ds.size() << " transitions -> " << (rec.dir() / "dataset.bin").string()
      << '\n';
}

void cmd_train_vae(const TrainVaeOptions& o, std::ostream& out) {
  require(o.data, "--data");
  const data::OfflineDataset ds = data::load_dataset(o.data);
  RunConfig c = resolve(o.common, ds.env_name(), true);
  if (o.iterations) c.vae.iterations = *o.iterations;
  if (!o.kind.empty()) c.density = o.kind;
  validate(c);
  RunRecorder rec("train-vae", resolve_output_dir(o.common.out, "train-vae"), to_json(c), c.seed);
  rec.add_input("data", o.data);
  std::vector<double> trace;
  if (c.density == "cvae") {
    cvae::VaeTrainResult r = cvae::train_vae(ds, c.vae, c.seed);
    cvae::save_density(rec.dir() / "density.ckpt", r.model);
    trace = std::move(r.loss_trace);
  } else {
    cvae::GaussianTrainResult r = cvae::gaussian_density_baseline(ds, c.vae, c.seed);
    cvae::save_density(rec.dir() / "density.ckpt", r.model);
    trace = std::move(r.loss_trace);
  }
  rec.add_output_file("density.ckpt");
  rec.add_output("loss.csv", loss_csv(trace));
  rec.finish();
  out << "train-vae: " << c.density << " model, final loss "
      << (trace.empty() ? 0.0 : trace.back()) << " -> "
      << (rec.dir() / "density.ckpt").string() << '\n';
}

void cmd_train_spot(const TrainSpotOptions& o, std::ostream& out) {
  require(o.data, "--data");
  require(o.vae, "--vae");
  const data::OfflineDataset ds = data::load_dataset(o.data);
  RunConfig c = resolve(o.common, ds.env_name(), true);
  if (o.lambda) c.spot.lambda = *o.lambda;
  if (o.steps) c.spot.steps = *o.steps;
  if (c.spot.steps > 0 && c.spot.eval_interval > c.spot.steps) c.spot.eval_interval = c.spot.steps;
  validate(c);
  const auto density = read_density(o.vae);
  RunRecorder rec("train-spot", resolve_output_dir(o.common.out, "train-spot"), to_json(c),
                  c.seed);
  rec.add_input("data", o.data);
  rec.add_input("vae", o.vae);
  const agent::OfflineRun run = agent::train_offline(ds, density, c.spot, c.seed);
  write_training_outputs(rec, run.agent, run.log);
  rec.finish();
  out << "train-spot: lambda " << c.spot.lambda << ", " << run.agent.update_count()
      << " updates";
  if (!run.log.evals().empty()) {
    out << ", final normalized score " << run.log.evals().back().normalized_score;
  }
  out << " -> " << (rec.dir() / "summary.csv").string() << '\n';
}

void cmd_finetune(const FinetuneOptions& o, std::ostream& out) {
  require(o.agent, "--agent");
  require(o.data, "--data");
  agent::SpotAgent start = agent::load_agent(o.agent);
  const data::OfflineDataset ds = data::load_dataset(o.data);
  const std::string env_name = o.env.empty() ? ds.env_name() : o.env;
  const auto env = envs::make_env(env_name);
  check_env_fits(env->spec(), start.state_dim(), start.bounds().dim(), "agent");
  check_env_fits(env->spec(), ds.state_dim(), ds.action_dim(), "dataset");
  if (env_name != ds.env_name()) {
    throw ConfigError("env '" + env_name + "' does not match dataset env '" + ds.env_name() + "'");
  }
  RunConfig c = resolve(o.common, env_name, true);
  if (o.steps) c.finetune.steps = *o.steps;
  validate(c);
  RunRecorder rec("finetune", resolve_output_dir(o.common.out, "finetune"), to_json(c), c.seed);
  rec.add_input("agent", o.agent);
  rec.add_input("data", o.data);
  rec.add_note("mode", o.scratch ? "from_scratch" : "finetune");
  finetune::FinetuneRun run =
      o.scratch ? finetune::from_scratch_baseline(env_name, start.density_ptr(), start.config(),
                                                  start.stats(), c.finetune, c.seed)
                : finetune::finetune(std::move(start), ds, c.finetune, c.seed);
  write_training_outputs(rec, run.agent, run.log);
  rec.finish();
  out << "finetune" << (o.scratch ? " (from scratch)" : "") << ": " << c.finetune.steps
      << " online steps";
  if (!run.log.evals().empty()) {
    out << ", final goal rate " << run.log.evals().back().goal_rate << ", normalized score "
        << run.log.evals().back().normalized_score;
  }
  out << " -> " << (rec.dir() / "summary.csv").string() << '\n';
}

void cmd_eval(const EvalOptions& o, std::ostream& out) {
  if (o.agent.empty() == o.policy.empty()) {
    throw ConfigError("give exactly one of --agent or --policy");
  }
  require(o.env, "--env");
  const agent::DeterministicPolicy policy =
      o.agent.empty() ? agent::load_policy(o.policy) : agent::load_agent(o.agent).policy();
  RunConfig c = resolve(o.common, o.env, false);
  if (o.episodes) c.eval_episodes = *o.episodes;
  validate(c);
  const auto env = envs::make_env(c.env);
  check_env_fits(env->spec(), policy.net.spec().input_width(), policy.bounds.dim(), "policy");
  RunRecorder rec("eval", resolve_output_dir(o.common.out, "eval"), to_json(c), c.seed);
  rec.add_input(o.agent.empty() ? "policy" : "agent", o.agent.empty() ? o.policy : o.agent);
  const agent::PolicyEvaluation ev = agent::evaluate(policy, *env, c.eval_episodes, c.seed);
  std::ostringstream os = csv();
  os << "episodes,mean_return,normalized_score,goal_rate\n";
  os << c.eval_episodes << ',' << ev.mean_return << ',' << ev.normalized_score << ','
     << ev.goal_rate << '\n';
  rec.add_output("eval.csv", os.str());
  rec.finish();
  out << "eval: mean return " << ev.mean_return << ", normalized score " << ev.normalized_score
      << ", goal rate " << ev.goal_rate << '\n';
}

void cmd_train_bc(const TrainBcOptions& o, std::ostream& out) {
  require(o.data, "--data");
  const data::OfflineDataset ds = data::load_dataset(o.data);
  RunConfig c = resolve(o.common, ds.env_name(), true);
  if (o.steps) c.bc.steps = *o.steps;
  validate(c);
  RunRecorder rec("train-bc", resolve_output_dir(o.common.out, "train-bc"), to_json(c), c.seed);
  rec.add_input("data", o.data);
  const agent::BcRun run = agent::bc_baseline(ds, c.bc, c.seed);
  agent::save_policy(rec.dir() / "policy.ckpt", run.policy);
  rec.add_output_file("policy.ckpt");
  rec.add_output("loss.csv", loss_csv(run.loss_trace));
  const auto env = envs::make_env(ds.env_name());
  const agent::PolicyEvaluation ev =
      agent::evaluate(run.policy, *env, c.eval_episodes, agent::seeded_stream(c.seed, 2)());
  std::ostringstream os = csv();
  os << "episodes,mean_return,normalized_score,goal_rate\n";
  os << c.eval_episodes << ',' << ev.mean_return << ',' << ev.normalized_score << ','
     << ev.goal_rate << '\n';
  rec.add_output("eval.csv", os.str());
  rec.finish();
  out << "train-bc: normalized score " << ev.normalized_score << ", goal rate " << ev.goal_rate
      << " -> " << (rec.dir() / "policy.ckpt").string() << '\n';
}

void cmd_calibrate(const CalibrateOptions& o, std::ostream& out) {
  RunConfig c = resolve(o.common, o.env, false);
  if (o.episodes) c.calibration_episodes = *o.episodes;
  validate(c);
  RunRecorder rec("calibrate", resolve_output_dir(o.common.out, "calibrate"), to_json(c), c.seed);
  const std::vector<std::string> names =
      o.env.empty() ? envs::env_names() : std::vector<std::string>{o.env};
  envs::ReferenceTable table;
  std::ostringstream cmp = csv();
  cmp << "env,random_ref,expert_ref,builtin_random_ref,builtin_expert_ref\n";
  for (const std::string& name : names) {
    const envs::ReferenceReturns r =
        envs::calibrate_references(name, {c.calibration_episodes, c.seed});
    const envs::ReferenceReturns b = envs::reference_for(name);
    table[name] = r;
    cmp << name << ',' << r.random_ref << ',' << r.expert_ref << ',' << b.random_ref << ','
        << b.expert_ref << '\n';
  }
  std::ostringstream manifest;
  envs::write_reference_manifest(manifest, table);
  rec.add_output("reference_returns.txt", manifest.str());
  rec.add_output("comparison.csv", cmp.str());
  rec.finish();
  out << "calibrate: " << names.size() << " env(s) -> "
      << (rec.dir() / "reference_returns.txt").string() << '\n';
}

void cmd_tabular_bound(const TabularBoundOptions& o, std::ostream& out) {
  RunConfig c = resolve(o.common, "", false);
  if (o.mdps) c.tabular.mdps = *o.mdps;
  validate(c);
  RunRecorder rec("analyze-tabular-bound", resolve_output_dir(o.common.out, "tabular-bound"),
                  to_json(c), c.seed);
  std::ostringstream os = csv();
  os << "mdp_seed,eps,gap,bound,alpha\n";
  std::size_t violations = 0;
  for (std::size_t i = 0; i < c.tabular.mdps; ++i) {
    const std::uint64_t seed = c.seed + i;
    const tabular::TabularMdp mdp = tabular::random_mdp(c.tabular.states, c.tabular.actions,
                                                        c.tabular.gamma, seed);
    for (double eps : c.tabular.eps) {
      const tabular::GapReport r = tabular::suboptimality_gap(mdp, eps);
      if (r.gap > r.bound + 1e-9) ++violations;
      os << seed << ',' << eps << ',' << r.gap << ',' << r.bound << ',' << r.alpha << '\n';
    }
  }
  rec.add_output("bound.csv", os.str());
  rec.add_note("violations", violations);
  rec.finish();
  out << "analyze tabular-bound: " << c.tabular.mdps * c.tabular.eps.size() << " rows, "
      << violations << " with gap > bound -> " << (rec.dir() / "bound.csv").string() << '\n';
}

void cmd_density_profile(const DensityProfileOptions& o, std::ostream& out) {
  require(o.data, "--data");
  if (o.vae.empty() && o.agents.empty()) {
    throw ConfigError("density-profile needs --vae or at least one --agent");
  }
  const data::OfflineDataset ds = data::load_dataset(o.data);
  RunConfig c = resolve(o.common, ds.env_name(), true);
  if (o.states) c.profile.num_states = *o.states;
  if (o.samples) c.profile.num_samples = *o.samples;
  validate(c);
  RunRecorder rec("analyze-density-profile",
                  resolve_output_dir(o.common.out, "density-profile"), to_json(c), c.seed);
  rec.add_input("data", o.data);
  std::vector<agent::SpotAgent> agents;
  for (std::size_t i = 0; i < o.agents.size(); ++i) {
    rec.add_input("agent" + std::to_string(i), o.agents[i]);
    agents.push_back(agent::load_agent(o.agents[i]));
  }
  std::shared_ptr<const cvae::BehaviorDensity> density;
  if (!o.vae.empty()) {
    rec.add_input("vae", o.vae);
    density = read_density(o.vae);
  } else {
    density = agents.front().density_ptr();
  }
  if (density->state_dim() != ds.state_dim() || density->action_dim() != ds.action_dim()) {
    throw DimensionError("density model dims do not match the dataset");
  }

  std::ostringstream os = csv();
  os << "source,lambda,p5,p25,p50\n";
  const auto row = [&](const std::string& source, const std::string& lambda,
                       const agent::ProfileSummary& p) {
    os << source << ',' << lambda << ',' << p.p5 << ',' << p.p25 << ',' << p.p50 << '\n';
  };
  // Every profile sees the same states and latent draws.
  const auto rng = [&] { return agent::seeded_stream(c.seed, 5); };
  {
    std::mt19937_64 r = rng();
    row("dataset", "", agent::behavior_profile(*density, ds, c.profile, r));
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    std::mt19937_64 r = rng();
    row("agent" + std::to_string(i), label(agents[i].lambda()),
        agent::constraint_strength_profile(agents[i].policy(), *density, ds, c.profile, r));
  }
  for (std::size_t i = 0; i < o.policies.size(); ++i) {
    rec.add_input("policy" + std::to_string(i), o.policies[i]);
    std::mt19937_64 r = rng();
    row("policy" + std::to_string(i), "",
        agent::constraint_strength_profile(agent::load_policy(o.policies[i]), *density, ds,
                                           c.profile, r));
  }
  rec.add_output("profile.csv", os.str());
  rec.finish();
  out << "analyze density-profile: " << 1 + agents.size() + o.policies.size() << " rows -> "
      << (rec.dir() / "profile.csv").string() << '\n';
}

void cmd_lambda_sweep(const SweepOptions& o, std::ostream& out) {
  require(o.data, "--data");
  require(o.vae, "--vae");
  const data::OfflineDataset ds = data::load_dataset(o.data);
  RunConfig c = resolve(o.common, ds.env_name(), true);
  if (!o.lambdas.empty()) c.lambda_grid = o.lambdas;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (o.steps) c.spot.steps = *o.steps;
  if (c.spot.steps > 0 && c.spot.eval_interval > c.spot.steps) c.spot.eval_interval = c.spot.steps;
  validate(c);
  if (c.lambda_grid.empty()) throw ConfigError("lambda grid is empty");
  const auto density = read_density(o.vae);
  RunRecorder rec("analyze-lambda-sweep", resolve_output_dir(o.common.out, "lambda-sweep"),
                  to_json(c), c.seed);
  rec.add_input("data", o.data);
  rec.add_input("vae", o.vae);
  if (o.save_agents) fs::create_directories(rec.dir() / "agents");

  const std::size_t n_seeds = c.seeds.size();
  std::vector<SweepResult> results(c.lambda_grid.size() * n_seeds);
  parallel_for(results.size(), o.jobs, [&](std::size_t i) {
    agent::SpotConfig sc = c.spot;
    sc.lambda = c.lambda_grid[i / n_seeds];
    const std::uint64_t seed = c.seeds[i % n_seeds];
    const fs::path save = o.save_agents ? rec.dir() / "agents" /
                                              ("lambda_" + label(sc.lambda) + "_seed_" +
                                               std::to_string(seed) + ".ckpt")
                                        : fs::path();
    results[i] = train_and_score(ds, density, sc, c.profile, seed, save);
  });

  std::ostringstream runs = csv(), sweep = csv();
  runs << "lambda,seed,percentile5,normalized_score,goal_rate\n";
  sweep << "lambda,percentile5,normalized_score,goal_rate\n";
  double best_score = -std::numeric_limits<double>::infinity();
  double best_lambda = c.lambda_grid.front();
  for (std::size_t l = 0; l < c.lambda_grid.size(); ++l) {
    std::vector<double> p5, score, goal;
    for (std::size_t k = 0; k < n_seeds; ++k) {
      const SweepResult& r = results[l * n_seeds + k];
      runs << c.lambda_grid[l] << ',' << c.seeds[k] << ',' << r.percentile5 << ','
           << r.normalized_score << ',' << r.goal_rate << '\n';
      p5.push_back(r.percentile5);
      score.push_back(r.normalized_score);
      goal.push_back(r.goal_rate);
    }
    sweep << c.lambda_grid[l] << ',' << mean_of(p5) << ',' << mean_of(score) << ','
          << mean_of(goal) << '\n';
    if (mean_of(score) > best_score) {
      best_score = mean_of(score);
      best_lambda = c.lambda_grid[l];
    }
  }
  if (o.save_agents) {
    for (const auto& entry : fs::directory_iterator(rec.dir() / "agents")) {
      rec.add_output_file("agents/" + entry.path().filename().string());
    }
  }
  rec.add_output("runs.csv", runs.str());
  rec.add_output("sweep.csv", sweep.str());
  rec.add_note("best_lambda", best_lambda);
  rec.add_note("best_normalized_score", best_score);
  rec.finish();
  out << "analyze lambda-sweep: best lambda " << best_lambda << " (mean normalized score "
      << best_score << ") -> " << (rec.dir() / "sweep.csv").string() << '\n';
}

void cmd_l_effect(const LEffectOptions& o, std::ostream& out) {
  require(o.data, "--data");
  require(o.vae, "--vae");
  const data::OfflineDataset ds = data::load_dataset(o.data);
  RunConfig c = resolve(o.common, ds.env_name(), true);
  if (!o.ls.empty()) c.l_values = o.ls;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (o.steps) c.spot.steps = *o.steps;
  if (o.lambda) c.spot.lambda = *o.lambda;
  if (c.spot.steps > 0 && c.spot.eval_interval > c.spot.steps) c.spot.eval_interval = c.spot.steps;
  validate(c);
  if (c.l_values.empty()) throw ConfigError("l_values is empty");
  const auto density = read_density(o.vae);
  RunRecorder rec("analyze-l-effect", resolve_output_dir(o.common.out, "l-effect"), to_json(c),
                  c.seed);
  rec.add_input("data", o.data);
  rec.add_input("vae", o.vae);

  const std::size_t n_seeds = c.seeds.size();
  std::vector<SweepResult> results(c.l_values.size() * n_seeds);
  parallel_for(results.size(), o.jobs, [&](std::size_t i) {
    agent::SpotConfig sc = c.spot;
    sc.density_samples = c.l_values[i / n_seeds];
    results[i] = train_and_score(ds, density, sc, c.profile, c.seeds[i % n_seeds], {});
  });

  std::ostringstream runs = csv(), summary = csv();
  runs << "L,seed,score,goal_rate,percentile5\n";
  summary << "L,score,score_std\n";
  for (std::size_t l = 0; l < c.l_values.size(); ++l) {
    std::vector<double> score;
    for (std::size_t k = 0; k < n_seeds; ++k) {
      const SweepResult& r = results[l * n_seeds + k];
      runs << c.l_values[l] << ',' << c.seeds[k] << ',' << r.normalized_score << ','
           << r.goal_rate << ',' << r.percentile5 << '\n';
      score.push_back(r.normalized_score);
    }
    summary << c.l_values[l] << ',' << mean_of(score) << ',' << std_of(score) << '\n';
  }
  rec.add_output("runs.csv", runs.str());
  rec.add_output("l_effect.csv", summary.str());
  rec.finish();
  out << "analyze l-effect: " << c.l_values.size() << " values of L -> "
      << (rec.dir() / "l_effect.csv").string() << '\n';
}

}  // namespace spot::cli
