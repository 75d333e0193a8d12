#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

// Reference returns anchoring normalized scores: 0 for a uniform-random
// policy, 100 for the scripted expert controller. The table is a small text
// manifest shipped in data/ and compiled into the library.
namespace spot::envs {

struct ReferenceReturns {
  double random_ref = 0.0;
  double expert_ref = 0.0;
};

using ReferenceTable = std::map<std::string, ReferenceReturns>;

// Lines of "env random_ref expert_ref"; '#' starts a comment.
ReferenceTable parse_reference_manifest(std::istream& in);
void write_reference_manifest(std::ostream& out, const ReferenceTable& table);

const ReferenceTable& builtin_references();
ReferenceReturns reference_for(const std::string& env_name);

double normalized_score(double raw_return, const ReferenceReturns& refs);
double normalized_score(double raw_return, const std::string& env_name);

struct CalibrationConfig {
  std::size_t episodes = 100;
  std::uint64_t seed = 0;
};

// Recomputes the manifest entry for one env from fresh rollouts.
ReferenceReturns calibrate_references(const std::string& env_name,
                                      const CalibrationConfig& config = {});

}  // namespace spot::envs
