#include "spot/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "spot/envs/env.hpp"
#include "spot/errors.hpp"

namespace spot::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Calls f(section, key, field) for every config field; section "" is the
// top level. to_json and apply_overrides share this table.
template <typename Config, typename F>
void for_each_field(Config& c, F&& f) {
  f("", "env", c.env);
  f("", "regime", c.regime);
  f("", "dataset_size", c.dataset_size);
  f("", "normalize", c.normalize);
  f("", "seed", c.seed);
  f("", "seeds", c.seeds);
  f("", "density", c.density);
  f("", "lambda_grid", c.lambda_grid);
  f("", "l_values", c.l_values);
  f("", "eval_episodes", c.eval_episodes);
  f("", "calibration_episodes", c.calibration_episodes);

  auto& g = c.generate;
  f("generate", "expert_noise", g.expert_noise);
  f("generate", "medium_noise", g.medium_noise);
  f("generate", "medium_random_fraction", g.medium_random_fraction);
  f("generate", "replay_noise_start", g.replay_noise_start);
  f("generate", "replay_noise_end", g.replay_noise_end);
  f("generate", "stitch_max_span", g.stitch_max_span);
  f("generate", "stitch_jitter", g.stitch_jitter);
  f("generate", "stitch_max_steps", g.stitch_max_steps);
  f("generate", "sparse_reward_shift", g.sparse_reward_shift);

  auto& v = c.vae;
  f("vae", "hidden", v.hidden);
  f("vae", "layers", v.layers);
  f("vae", "latent_dim", v.latent_dim);
  f("vae", "kl_weight", v.kl_weight);
  f("vae", "decoder_log_var", v.decoder_log_var);
  f("vae", "log_var_min", v.log_var_min);
  f("vae", "log_var_max", v.log_var_max);
  f("vae", "learning_rate", v.learning_rate);
  f("vae", "batch_size", v.batch_size);
  f("vae", "iterations", v.iterations);

  auto& s = c.spot;
  f("spot", "hidden", s.hidden);
  f("spot", "layers", s.layers);
  f("spot", "actor_lr", s.actor_lr);
  f("spot", "critic_lr", s.critic_lr);
  f("spot", "batch_size", s.batch_size);
  f("spot", "discount", s.discount);
  f("spot", "tau", s.tau);
  f("spot", "policy_noise", s.policy_noise);
  f("spot", "noise_clip", s.noise_clip);
  f("spot", "policy_freq", s.policy_freq);
  f("spot", "lambda", s.lambda);
  f("spot", "q_norm", s.q_norm);
  f("spot", "actor_dropout", s.actor_dropout);
  f("spot", "density_samples", s.density_samples);
  f("spot", "steps", s.steps);
  f("spot", "eval_interval", s.eval_interval);
  f("spot", "eval_episodes", s.eval_episodes);
  f("spot", "log_interval", s.log_interval);
  f("spot", "eval_profile_states", s.eval_profile_states);
  f("spot", "eval_profile_samples", s.eval_profile_samples);

  auto& b = c.bc;
  f("bc", "hidden", b.hidden);
  f("bc", "layers", b.layers);
  f("bc", "lr", b.lr);
  f("bc", "batch_size", b.batch_size);
  f("bc", "steps", b.steps);

  auto& ft = c.finetune;
  f("finetune", "steps", ft.steps);
  f("finetune", "exploration_noise", ft.exploration_noise);
  f("finetune", "eval_interval", ft.eval_interval);
  f("finetune", "eval_episodes", ft.eval_episodes);
  f("finetune", "log_interval", ft.log_interval);
  f("finetune", "eval_profile_states", ft.eval_profile_states);
  f("finetune", "eval_profile_samples", ft.eval_profile_samples);

  f("profile", "num_states", c.profile.num_states);
  f("profile", "num_samples", c.profile.num_samples);

  auto& t = c.tabular;
  f("tabular", "mdps", t.mdps);
  f("tabular", "states", t.states);
  f("tabular", "actions", t.actions);
  f("tabular", "gamma", t.gamma);
  f("tabular", "eps", t.eps);
}

std::string path_of(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

[[noreturn]] void wrong_type(const std::string& path, const char* expected) {
  throw ConfigError("config key '" + path + "' must be " + expected);
}

template <typename T>
void read_value(const json& j, T& out, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) wrong_type(path, "a boolean");
    out = j.get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) wrong_type(path, "a string");
    out = j.get<std::string>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) wrong_type(path, "a number");
    out = j.get<T>();
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!j.is_number_unsigned()) wrong_type(path, "a non-negative integer");
    out = j.get<T>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) wrong_type(path, "an integer");
    out = j.get<T>();
  } else {
    if (!j.is_array()) wrong_type(path, "an array");
    T values;
    for (const json& item : j) {
      typename T::value_type v{};
      read_value(item, v, path + "[]");
      values.push_back(v);
    }
    out = std::move(values);
  }
}

}  // namespace

RunConfig default_config(const std::string& env) {
  const auto instance = envs::make_env(env);
  const envs::RewardKind kind = instance->spec().reward_kind;
  RunConfig c;
  c.env = env;
  c.regime = kind == envs::RewardKind::kSparse ? "stitch" : "medium";
  c.spot = agent::default_spot_config(kind);
  c.lambda_grid = agent::default_lambda_grid(kind);
  c.finetune.eval_episodes = c.spot.eval_episodes;
  return c;
}

ordered_json to_json(const RunConfig& config) {
  ordered_json out = ordered_json::object();
  for_each_field(config, [&](const std::string& section, const std::string& key,
                             const auto& value) {
    if (section.empty()) {
      out[key] = value;
    } else {
      out[section][key] = value;
    }
  });
  return out;
}

RunConfig apply_overrides(RunConfig base, const json& overrides) {
  if (!overrides.is_object()) throw ConfigError("config must be a JSON object");
  std::set<std::string> sections, paths;
  for_each_field(base, [&](const std::string& section, const std::string& key, auto&) {
    if (!section.empty()) sections.insert(section);
    paths.insert(path_of(section, key));
  });
  for (const auto& [key, value] : overrides.items()) {
    if (sections.contains(key)) {
      if (!value.is_object()) wrong_type(key, "an object");
      for (const auto& [inner, unused] : value.items()) {
        if (!paths.contains(path_of(key, inner))) {
          throw ConfigError("unknown config key '" + path_of(key, inner) + "'");
        }
      }
    } else if (!paths.contains(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  for_each_field(base, [&](const std::string& section, const std::string& key,
                           auto& field) {
    const json& node = section.empty() ? overrides : overrides.value(section, json::object());
    if (const auto it = node.find(key); it != node.end()) {
      read_value(*it, field, path_of(section, key));
    }
  });
  return base;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config '" + path + "' must be a JSON object");
  std::string env = "pointmaze";
  if (const auto it = j.find("env"); it != j.end()) read_value(*it, env, "env");
  return apply_overrides(default_config(env), j);
}

void validate(const RunConfig& c) {
  const auto fail = [](const std::string& m) { throw ConfigError(m); };
  envs::make_env(c.env);
  data::parse_regime(c.regime);
  if (c.dataset_size == 0) fail("dataset_size must be positive");
  if (c.seeds.empty()) fail("seeds must not be empty");
  if (c.density != "cvae" && c.density != "gaussian") {
    fail("density must be 'cvae' or 'gaussian'");
  }
  const cvae::CvaeConfig& v = c.vae;
  if (v.hidden == 0 || v.layers == 0 || v.batch_size == 0) {
    fail("vae hidden, layers and batch_size must be positive");
  }
  if (!(v.kl_weight >= 0.0) || !(v.learning_rate > 0.0)) {
    fail("vae kl_weight must be >= 0 and learning_rate > 0");
  }
  if (!std::isfinite(v.decoder_log_var) || !(v.log_var_min < v.log_var_max)) {
    fail("vae log-variance settings are inconsistent");
  }
  c.spot.validate();
  c.bc.validate();
  c.finetune.validate();
  for (double l : c.lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) fail("lambda_grid entries must be finite and >= 0");
  }
  for (std::size_t l : c.l_values) {
    if (l == 0) fail("l_values entries must be positive");
  }
  if (c.profile.num_states == 0 || c.profile.num_samples == 0) {
    fail("profile sizes must be positive");
  }
  if (c.eval_episodes == 0 || c.calibration_episodes == 0) fail("episode counts must be positive");
  const TabularSweep& t = c.tabular;
  if (t.mdps == 0 || t.states == 0 || t.actions == 0) fail("tabular sizes must be positive");
  if (!(t.gamma > 0.0 && t.gamma < 1.0)) fail("tabular gamma must lie in (0, 1)");
  for (double e : t.eps) {
    if (!(e >= 0.0) || !std::isfinite(e)) fail("tabular eps entries must be finite and >= 0");
  }
}

}  // namespace spot::cli
