#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dynarag/engine.hpp"
#include "dynarag/policy.hpp"
#include "dynarag/reward.hpp"

namespace dynarag {

/// One flattened <observation, action, reward> step. Advantage and return
/// are filled by GAE before any update consumes the transition.
struct Transition {
  Eigen::VectorXd features;
  Role role = Role::Planner;
  std::optional<int> action_index;
  std::string action_text;
  double reward = 0.0;
  double log_prob_old = 0.0;
  double value_estimate = 0.0;
  double advantage = 0.0;
  double return_target = 0.0;
  bool trainable = false;       // RA bookkeeping steps never train
  bool solve_only_menu = false;
};

/// Shared pool of transitions across trajectories and roles; a sampled
/// mini-batch may mix Planner and executor steps.
using ExperienceBuffer = std::vector<Transition>;

struct AdvantageConfig {
  double gamma = 1.0;
  // Undiscounted credit: episodes are short and the terminal reward is the
  // whole signal. lambda < 1 attenuates the terminal credit seen by early
  // planning steps of long trajectories enough to bury decomposition, so
  // full backward propagation is the default.
  double lambda = 1.0;
};

struct PpoConfig {
  double clip_eps = 0.2;
  int epochs = 4;
  int minibatch = 64;
  double learning_rate = 0.1;
  double entropy_coef = 0.005;
  double value_coef = 0.5;
  bool adv_norm = true;  // zero-mean unit-variance advantages per update batch
};

/// Turns a trajectory plus its per-step rewards into transitions in (t, k)
/// order. Throws Misalignment when the reward vector does not line up with
/// the steps or the steps are out of order.
std::vector<Transition> flatten(const TrajectoryResult& trajectory,
                                const RewardBreakdown& rewards);

/// Generalized advantage estimation by backward recursion. values must hold
/// one bootstrap entry beyond the rewards (terminal bootstrap 0 for finished
/// episodes). Returns (advantages, returns) with returns = advantages + V.
std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_gae(const Eigen::VectorXd& rewards,
                                                        const Eigen::VectorXd& values,
                                                        const AdvantageConfig& cfg);

/// Mean clipped-surrogate objective plus entropy bonus over the trainable
/// transitions of the batch (to be maximized). Advantages are read as-is.
double ppo_policy_objective(const ToyPlannerPolicy& policy,
                            const std::vector<Transition>& batch, const PpoConfig& cfg);

/// Analytic gradient of ppo_policy_objective with respect to the policy
/// weights.
Eigen::MatrixXd ppo_policy_gradient(const ToyPlannerPolicy& policy,
                                    const std::vector<Transition>& batch, const PpoConfig& cfg);

double value_loss(const ValueEstimator& value, const std::vector<Transition>& batch);
Eigen::VectorXd value_loss_gradient(const ValueEstimator& value,
                                    const std::vector<Transition>& batch);

struct PpoStats {
  double mean_ratio = 1.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
  double value_loss = 0.0;
  double adv_mean = 0.0;  // pre-normalization batch statistics
  double adv_std = 0.0;
  int minibatches = 0;
  int trainable = 0;
};

/// One PPO update pass: normalizes advantages over the batch's trainable
/// transitions (when enabled), then runs epochs x mini-batches of ascent on
/// the clipped surrogate and descent on the value loss. A batch with no
/// trainable transitions is a no-op; an empty batch throws EmptyBatch.
PpoStats ppo_update(ToyPlannerPolicy& policy, ValueEstimator& value,
                    std::vector<Transition> batch, const PpoConfig& cfg, std::mt19937_64& rng);

struct BehaviorMetrics {
  double mean_rounds = 0.0;
  double mean_retrievals = 0.0;
  double ds_usage_ratio = 0.0;  // DS invocations over total rounds
  double mean_f1 = 0.0;
  bool has_f1 = false;
  std::array<double, kNumPlannerActions> workflow_fractions{};
};

/// Aggregates behavioral statistics over trajectories. Workflow fractions
/// are over planner invocations whose effective plan is one of the eight
/// menu actions.
BehaviorMetrics behavior_metrics(const std::vector<TrajectoryResult>& trajectories,
                                 const std::vector<std::string>* golds = nullptr);

struct TrainConfig {
  RewardConfig reward;
  AdvantageConfig adv;
  PpoConfig ppo;
  EngineLimits limits;
  OracleConfig oracle;
  int updates = 400;
  int batch_size = 16;
  int eval_interval = 25;
  int jobs = 1;
  std::uint64_t seed = 0;
  double stop_at_gold_rate = -1.0;  // early stop threshold; negative disables
};

struct MetricsRow {
  int step = 0;
  double f1 = 0.0;
  double mean_rounds = 0.0;
  double mean_retrievals = 0.0;
  double ds_ratio = 0.0;
  std::array<double, kNumPlannerActions> fractions{};
  double gold_rate = 0.0;
};

struct TrainReport {
  std::vector<MetricsRow> rows;
  ToyPlannerPolicy policy;
  ValueEstimator value;
  int updates_run = 0;
  double final_gold_rate = 0.0;
};

/// Synchronous PPO over the synthetic environment: collect a batch of
/// trajectories (toy Planner + scripted executors), score, flatten, GAE,
/// update; evaluate greedily on the held-out tasks every eval_interval
/// updates. Deterministic in the seed; parallel rollouts merge in task-index
/// order.
TrainReport train(const Corpus& corpus, const std::vector<SyntheticTask>& train_tasks,
                  const std::vector<SyntheticTask>& eval_tasks, const TrainConfig& cfg);

/// Probability mass the policy puts on the task's gold plan class, averaged
/// over tasks: the solve actions for SingleHop, QDS for SerialTwoHop, QDP
/// for ParallelTwoFact.
double gold_plan_mass(const ToyPlannerPolicy& policy, const std::vector<SyntheticTask>& tasks);

/// CSV with one row per evaluation: step, f1, mean_rounds, mean_retrievals,
/// ds_ratio, one column per workflow class, gold_rate.
std::string metrics_csv(const std::vector<MetricsRow>& rows);

}  // namespace dynarag
