#include "spot/agent/train_log.hpp"

#include <iomanip>
#include <ostream>

#include "spot/errors.hpp"

namespace spot::agent {

void TrainLog::add(LogRecord record) {
  if (!records_.empty() && record.stage == records_.back().stage &&
      record.step < records_.back().step) {
    throw ContractError("log step went backwards");
  }
  records_.push_back(std::move(record));
}

void TrainLog::add_eval(EvalRecord record) {
  if (!evals_.empty() && record.step < evals_.back().step) {
    throw ContractError("evaluation step went backwards");
  }
  evals_.push_back(record);
}

void TrainLog::write_lines(std::ostream& out) const {
  out << std::setprecision(17);
  for (const LogRecord& r : records_) {
    out << "stage=" << r.stage << " step=" << r.step;
    for (const auto& [key, value] : r.metrics) out << ' ' << key << '=' << value;
    out << '\n';
  }
  for (const EvalRecord& e : evals_) {
    out << "stage=eval step=" << e.step << " eval_return=" << e.eval_return
        << " normalized_score=" << e.normalized_score
        << " goal_rate=" << e.goal_rate
        << " percentile5_logpb=" << e.percentile5_logpb
        << " lambda=" << e.lambda << '\n';
  }
}

void TrainLog::write_summary_csv(std::ostream& out) const {
  out << std::setprecision(17);
  out << "step,eval_return,normalized_score,percentile5_logpb\n";
  for (const EvalRecord& e : evals_) {
    out << e.step << ',' << e.eval_return << ',' << e.normalized_score << ','
        << e.percentile5_logpb << '\n';
  }
}

}  // namespace spot::agent
