#include "dynarag/reward.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "dynarag/errors.hpp"
#include "dynarag/strings.hpp"

namespace dynarag {

std::vector<std::string> normalize_answer_tokens(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;
    cleaned += static_cast<char>(std::tolower(u));
  }
  std::vector<std::string> tokens;
  for (auto& t : whitespace_tokens(cleaned)) {
    if (t == "a" || t == "an" || t == "the") continue;
    tokens.push_back(std::move(t));
  }
  return tokens;
}

double token_f1(std::string_view prediction, std::string_view gold) {
  const auto pred = normalize_answer_tokens(prediction);
  const auto ref = normalize_answer_tokens(gold);
  if (pred.empty() && ref.empty()) return 1.0;
  if (pred.empty() || ref.empty()) return 0.0;

  std::map<std::string, int> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  int overlap = 0;
  for (const auto& t : pred) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / pred.size();
  const double recall = static_cast<double>(overlap) / ref.size();
  return 2.0 * precision * recall / (precision + recall);
}

double cost_penalty(int rounds, int retrievals, const RewardConfig& cfg) {
  if (cfg.max_rounds_norm < 1 || cfg.max_retrievals_norm < 1) {
    throw InvalidParams("cost normalizers must be >= 1");
  }
  const double round_term =
      static_cast<double>(std::min(rounds, cfg.max_rounds_norm)) / cfg.max_rounds_norm;
  const double retrieval_term =
      static_cast<double>(std::min(retrievals, cfg.max_retrievals_norm)) /
      cfg.max_retrievals_norm;
  return cfg.alpha * round_term + cfg.beta * retrieval_term;
}

double format_penalty(const StepRecord& step) { return step.format_violation ? -1.0 : 0.0; }

RewardBreakdown assign_step_rewards(const TrajectoryResult& trajectory, std::string_view gold,
                                    const RewardConfig& cfg) {
  if (trajectory.steps.empty()) throw EmptyTrajectory("trajectory has no steps");
  RewardBreakdown out;
  out.r_perf = token_f1(trajectory.final_answer, gold);
  out.r_cost = cost_penalty(trajectory.rounds_used, trajectory.retrievals_used, cfg);
  out.r_global = out.r_perf - out.r_cost;
  out.per_step.reserve(trajectory.steps.size());
  for (size_t i = 0; i < trajectory.steps.size(); ++i) {
    double r = format_penalty(trajectory.steps[i]);
    if (i + 1 == trajectory.steps.size()) r += out.r_global;
    out.per_step.push_back(r);
  }
  return out;
}

}  // namespace dynarag
