#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dynarag/engine.hpp"

namespace dynarag {

struct RewardConfig {
  double alpha = 0.0;          // round-count weight
  double beta = 0.0;           // retrieval-count weight
  int max_rounds_norm = 3;     // normalizers, >= 1
  int max_retrievals_norm = 3;
};

struct RewardBreakdown {
  double r_perf = 0.0;            // token F1 of the final answer
  double r_cost = 0.0;            // normalized, clamped cost term
  double r_global = 0.0;          // r_perf - r_cost, exactly
  std::vector<double> per_step;   // one reward per trajectory step
};

/// QA answer normalization: lowercase, strip punctuation, drop the articles
/// a/an/the, collapse whitespace.
std::vector<std::string> normalize_answer_tokens(std::string_view text);

/// Bag-overlap F1 over normalized tokens. Both sides empty after
/// normalization score 1; exactly one empty scores 0.
double token_f1(std::string_view prediction, std::string_view gold);

/// alpha * min(T, maxT)/maxT + beta * min(N, maxN)/maxN. Each component is
/// clamped at its normalizer, so trajectories at the limit pay cost 1 per
/// component rather than more.
double cost_penalty(int rounds, int retrievals, const RewardConfig& cfg);

/// -1 for a step that broke its output protocol, 0 otherwise.
double format_penalty(const StepRecord& step);

/// Per-step rewards: each step earns its format penalty, and the terminal
/// step additionally earns token_f1(final, gold) - cost_penalty(T, N).
RewardBreakdown assign_step_rewards(const TrajectoryResult& trajectory, std::string_view gold,
                                    const RewardConfig& cfg);

}  // namespace dynarag
