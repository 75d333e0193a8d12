#include "spot/envs/reference.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "spot/envs/rollout.hpp"
#include "spot/errors.hpp"
#include "spot_reference_manifest.hpp"

namespace spot::envs {

ReferenceTable parse_reference_manifest(std::istream& in) {
  ReferenceTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string name;
    if (!(fields >> name)) continue;
    ReferenceReturns refs;
    if (!(fields >> refs.random_ref >> refs.expert_ref)) {
      throw FormatError("reference manifest line " + std::to_string(line_no) +
                        ": expected 'env random_ref expert_ref'");
    }
    table[name] = refs;
  }
  return table;
}

void write_reference_manifest(std::ostream& out, const ReferenceTable& table) {
  out << "# env random_ref expert_ref\n";
  out << std::setprecision(17);
  for (const auto& [name, refs] : table) {
    out << name << ' ' << refs.random_ref << ' ' << refs.expert_ref << '\n';
  }
}

const ReferenceTable& builtin_references() {
  static const ReferenceTable table = [] {
    std::istringstream in{std::string(kReferenceManifest)};
    return parse_reference_manifest(in);
  }();
  return table;
}

ReferenceReturns reference_for(const std::string& env_name) {
  const ReferenceTable& table = builtin_references();
  const auto it = table.find(env_name);
  if (it == table.end()) {
    throw ConfigError("no reference returns recorded for env '" + env_name +
                      "'");
  }
  return it->second;
}

double normalized_score(double raw_return, const ReferenceReturns& refs) {
  if (refs.expert_ref == refs.random_ref) {
    throw ConfigError("expert and random reference returns coincide");
  }
  return 100.0 * (raw_return - refs.random_ref) /
         (refs.expert_ref - refs.random_ref);
}

double normalized_score(double raw_return, const std::string& env_name) {
  return normalized_score(raw_return, reference_for(env_name));
}

ReferenceReturns calibrate_references(const std::string& env_name,
                                      const CalibrationConfig& config) {
  const std::unique_ptr<Env> env = make_env(env_name);
  std::mt19937_64 action_rng(config.seed + 1);
  const EvaluationSummary random = evaluate_policy(
      *env, uniform_random_policy(env->spec(), action_rng), config.episodes,
      config.seed);
  std::unique_ptr<Controller> expert = make_expert_controller(env_name);
  const PolicyFn expert_fn = [&expert](std::span<const double> obs) {
    return expert->act(obs);
  };
  const EvaluationSummary scripted =
      evaluate_policy(*env, expert_fn, config.episodes, config.seed);
  return ReferenceReturns{random.mean_return, scripted.mean_return};
}

}  // namespace spot::envs
