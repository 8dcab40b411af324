#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynarag/environment.hpp"
#include "dynarag/policy.hpp"
#include "dynarag/trace.hpp"
#include "dynarag/workflow.hpp"

namespace dynarag {

struct EngineLimits {
  int max_rounds = 3;
  int max_depth = 1;       // nodes at or beyond this depth get solve-only planning
  int max_retrievals = 3;
  int retrieval_k = 5;
};

/// One agent invocation. (t, k) pairs are unique and lexicographically
/// ordered within a trajectory; every invocation, including fallbacks after
/// a format violation, produces exactly one record.
struct StepRecord {
  int t = 0;
  int k = 0;
  Role role = Role::Planner;
  std::string obs_digest;
  std::string target_query;
  std::string action;
  bool format_violation = false;
  std::optional<int> action_index;   // toy planner steps
  std::optional<double> log_prob;    // toy planner steps
  bool solve_only_menu = false;
};

struct TrajectoryResult {
  std::int64_t query_id = 0;
  std::string final_answer;
  std::vector<StepRecord> steps;
  int rounds_used = 0;      // Planner invocations
  int retrievals_used = 0;  // RA invocations that consumed budget
  bool truncated = false;   // round cap hit with unsolved leaves
  GlobalState final_state;
};

/// Per-role backend wiring. RA is served by the corpus, not a backend.
struct BackendSet {
  std::array<PolicyBackend*, 8> slots{};

  void set(Role role, PolicyBackend* backend) { slots[static_cast<size_t>(role)] = backend; }
  void set_all(PolicyBackend* backend);
  PolicyBackend* get(Role role) const { return slots[static_cast<size_t>(role)]; }
};

struct EngineOptions {
  EngineLimits limits;
  // Training keeps going when a remote call dies (the step is charged a
  // format violation); interactive inference propagates instead.
  bool backend_failure_as_violation = true;
};

/// The round loop: pick the first unsolved leaf, let the Planner stage a
/// workflow for it, execute the workflow (decomposition appends children and
/// ends the round; a solving chain threads the round context and answers the
/// node), then synthesize once the loop exits. Synthesis runs only when the
/// trace grew beyond the root; a single-node trace takes the generator's
/// answer as final.
TrajectoryResult run_inference(const std::string& question, const BackendSet& backends,
                               const Corpus& corpus, const EngineOptions& opts,
                               std::int64_t query_id = 0);

/// Runs one solving chain against the target node, threading the round
/// context module by module. Exposed for step-accounting tests; chain must
/// already be grammar-valid.
struct ChainContext {
  GlobalState* state = nullptr;
  const Corpus* corpus = nullptr;
  const BackendSet* backends = nullptr;
  const EngineOptions* opts = nullptr;
  int t = 0;
  int next_k = 1;
  int* retrievals = nullptr;
  std::vector<StepRecord>* steps = nullptr;
};
void execute_solve_chain(const std::vector<ExecutorKind>& chain, int target_id,
                         RoundContext& ctx, ChainContext& run);

/// One JSON line per step plus a trailing summary line carrying the final
/// answer, cost counters, and the trace snapshot. Reward/advantage columns
/// are null unless supplied; lengths must match the step count.
std::string emit_trajectory(const TrajectoryResult& result,
                            const std::vector<double>* rewards = nullptr,
                            const std::vector<double>* advantages = nullptr,
                            std::optional<double> f1 = std::nullopt,
                            std::optional<double> r_global = std::nullopt);

struct ParsedTrajectory {
  std::vector<StepRecord> steps;  // t, k, role, action, violation flag
  nlohmann::json summary;
};
ParsedTrajectory parse_trajectory_jsonl(std::string_view text);

}  // namespace dynarag
