#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace spot::agent {

struct LogRecord {
  std::string stage;
  std::size_t step = 0;
  std::vector<std::pair<std::string, double>> metrics;

  bool operator==(const LogRecord&) const = default;
};

struct EvalRecord {
  std::size_t step = 0;
  double eval_return = 0.0;
  double normalized_score = 0.0;
  double goal_rate = 0.0;
  double percentile5_logpb = 0.0;
  double lambda = 0.0;

  bool operator==(const EvalRecord&) const = default;
};

// Append-only training history with monotone step indices.
class TrainLog {
 public:
  // Throws ContractError when `step` goes backwards.
  void add(LogRecord record);
  void add_eval(EvalRecord record);

  const std::vector<LogRecord>& records() const { return records_; }
  const std::vector<EvalRecord>& evals() const { return evals_; }

  // One "stage=... step=... key=value ..." line per record and evaluation.
  void write_lines(std::ostream& out) const;
  // Header step,eval_return,normalized_score,percentile5_logpb plus one row
  // per evaluation. Reals print with 17 significant digits.
  void write_summary_csv(std::ostream& out) const;

  bool operator==(const TrainLog&) const = default;

 private:
  std::vector<LogRecord> records_;
  std::vector<EvalRecord> evals_;
};

}  // namespace spot::agent
