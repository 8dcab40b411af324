#include "dynarag/rl.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>

#include "dynarag/actions.hpp"
#include "dynarag/errors.hpp"
#include "dynarag/math.hpp"
#include "dynarag/strings.hpp"

namespace dynarag {

std::vector<Transition> flatten(const TrajectoryResult& trajectory,
                                const RewardBreakdown& rewards) {
  if (rewards.per_step.size() != trajectory.steps.size()) {
    throw Misalignment("per-step rewards do not line up with the trajectory");
  }
  for (size_t i = 1; i < trajectory.steps.size(); ++i) {
    const auto& prev = trajectory.steps[i - 1];
    const auto& cur = trajectory.steps[i];
    if (std::pair(prev.t, prev.k) >= std::pair(cur.t, cur.k)) {
      throw Misalignment("trajectory steps are not in (t, k) order");
    }
  }
  std::vector<Transition> out;
  out.reserve(trajectory.steps.size());
  for (size_t i = 0; i < trajectory.steps.size(); ++i) {
    const StepRecord& step = trajectory.steps[i];
    Transition tr;
    tr.features = featurize(step.target_query);
    tr.role = step.role;
    tr.action_index = step.action_index;
    tr.action_text = step.action;
    tr.reward = rewards.per_step[i];
    tr.log_prob_old = step.log_prob.value_or(0.0);
    tr.trainable = is_trainable_role(step.role);
    tr.solve_only_menu = step.solve_only_menu;
    out.push_back(std::move(tr));
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_gae(const Eigen::VectorXd& rewards,
                                                        const Eigen::VectorXd& values,
                                                        const AdvantageConfig& cfg) {
  if (values.size() != rewards.size() + 1) {
    throw LengthMismatch("values must carry one bootstrap entry beyond rewards");
  }
  const Eigen::Index n = rewards.size();
  Eigen::VectorXd advantages(n), returns(n);
  double carry = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double delta = rewards[i] + cfg.gamma * values[i + 1] - values[i];
    carry = delta + cfg.gamma * cfg.lambda * carry;
    advantages[i] = carry;
    returns[i] = carry + values[i];
  }
  return {std::move(advantages), std::move(returns)};
}

namespace {

struct SampleEval {
  Eigen::VectorXd probs;
  double log_prob_new = 0.0;
  double ratio = 1.0;
  double entropy_value = 0.0;
  bool clipped = false;
};

SampleEval eval_sample(const ToyPlannerPolicy& policy, const Transition& tr,
                       const PpoConfig& cfg) {
  SampleEval ev;
  ev.probs = policy.distribution(tr.features, tr.solve_only_menu);
  ev.log_prob_new = policy.log_prob_of(tr.features, *tr.action_index, tr.solve_only_menu);
  ev.ratio = std::exp(ev.log_prob_new - tr.log_prob_old);
  ev.entropy_value = entropy(ev.probs);
  ev.clipped = (tr.advantage > 0.0 && ev.ratio > 1.0 + cfg.clip_eps) ||
               (tr.advantage < 0.0 && ev.ratio < 1.0 - cfg.clip_eps);
  return ev;
}

double clip_term(double ratio, double advantage, double eps) {
  const double clamped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clamped * advantage);
}

// Policy updates need a categorical choice to differentiate through; the
// buffer also carries executor/RA bookkeeping transitions that only the
// value head reads.
bool policy_updatable(const Transition& tr) {
  return tr.trainable && tr.action_index.has_value();
}

}  // namespace

double ppo_policy_objective(const ToyPlannerPolicy& policy,
                            const std::vector<Transition>& batch, const PpoConfig& cfg) {
  double total = 0.0;
  int n = 0;
  for (const auto& tr : batch) {
    if (!policy_updatable(tr)) continue;
    const SampleEval ev = eval_sample(policy, tr, cfg);
    total += clip_term(ev.ratio, tr.advantage, cfg.clip_eps) + cfg.entropy_coef * ev.entropy_value;
    ++n;
  }
  return n > 0 ? total / n : 0.0;
}

Eigen::MatrixXd ppo_policy_gradient(const ToyPlannerPolicy& policy,
                                    const std::vector<Transition>& batch,
                                    const PpoConfig& cfg) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(kFeatureDim, kNumPlannerActions);
  int n = 0;
  for (const auto& tr : batch) {
    if (!policy_updatable(tr)) continue;
    ++n;
    const SampleEval ev = eval_sample(policy, tr, cfg);
    const double d_obj_d_logp = ev.clipped ? 0.0 : ev.ratio * tr.advantage;

    Eigen::VectorXd g_logits = Eigen::VectorXd::Zero(kNumPlannerActions);
    const int active = tr.solve_only_menu ? kNumSolveActions : kNumPlannerActions;
    for (int j = 0; j < active; ++j) {
      const double p = ev.probs[j];
      const double indicator = j == *tr.action_index ? 1.0 : 0.0;
      double g = d_obj_d_logp * (indicator - p);
      if (p > 0.0) g += cfg.entropy_coef * (-p * (std::log(p) + ev.entropy_value));
      g_logits[j] = g;
    }
    grad.noalias() += tr.features * g_logits.transpose() / policy.temperature();
  }
  if (n > 0) grad /= n;
  return grad;
}

double value_loss(const ValueEstimator& value, const std::vector<Transition>& batch) {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& tr : batch) {
    const double err = value.value(tr.features) - tr.return_target;
    total += err * err;
  }
  return total / batch.size();
}

Eigen::VectorXd value_loss_gradient(const ValueEstimator& value,
                                    const std::vector<Transition>& batch) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(kFeatureDim);
  if (batch.empty()) return grad;
  for (const auto& tr : batch) {
    const double err = value.value(tr.features) - tr.return_target;
    grad.noalias() += 2.0 * err * tr.features;
  }
  return grad / batch.size();
}

PpoStats ppo_update(ToyPlannerPolicy& policy, ValueEstimator& value,
                    std::vector<Transition> batch, const PpoConfig& cfg, std::mt19937_64& rng) {
  if (batch.empty()) throw EmptyBatch("no transitions to update from");

  PpoStats stats;
  std::vector<size_t> trainable_idx;
  for (size_t i = 0; i < batch.size(); ++i) {
    if (policy_updatable(batch[i])) trainable_idx.push_back(i);
  }
  stats.trainable = static_cast<int>(trainable_idx.size());
  if (trainable_idx.empty()) return stats;  // nothing to learn from, weights untouched

  double mean = 0.0;
  for (size_t i : trainable_idx) mean += batch[i].advantage;
  mean /= trainable_idx.size();
  double var = 0.0;
  for (size_t i : trainable_idx) {
    const double d = batch[i].advantage - mean;
    var += d * d;
  }
  const double std_dev = std::sqrt(var / trainable_idx.size());
  stats.adv_mean = mean;
  stats.adv_std = std_dev;
  if (cfg.adv_norm && std_dev > 1e-8) {
    for (size_t i : trainable_idx) {
      batch[i].advantage = (batch[i].advantage - mean) / std_dev;
    }
  }

  std::vector<size_t> order(batch.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const int minibatch = std::max(1, cfg.minibatch);

  double ratio_sum = 0.0, clip_sum = 0.0, entropy_sum = 0.0;
  long stat_samples = 0;

  for (int epoch = 0; epoch < std::max(1, cfg.epochs); ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < order.size(); start += minibatch) {
      const size_t end = std::min(order.size(), start + minibatch);
      std::vector<Transition> mb;
      mb.reserve(end - start);
      for (size_t i = start; i < end; ++i) mb.push_back(batch[order[i]]);

      for (const auto& tr : mb) {
        if (!policy_updatable(tr)) continue;
        const SampleEval ev = eval_sample(policy, tr, cfg);
        ratio_sum += ev.ratio;
        clip_sum += ev.clipped ? 1.0 : 0.0;
        entropy_sum += ev.entropy_value;
        ++stat_samples;
      }

      policy.weights().noalias() +=
          cfg.learning_rate * ppo_policy_gradient(policy, mb, cfg);
      value.weights().noalias() -=
          cfg.learning_rate * cfg.value_coef * value_loss_gradient(value, mb);
      ++stats.minibatches;
    }
  }

  if (stat_samples > 0) {
    stats.mean_ratio = ratio_sum / stat_samples;
    stats.clip_fraction = clip_sum / stat_samples;
    stats.entropy = entropy_sum / stat_samples;
  }
  stats.value_loss = value_loss(value, batch);
  return stats;
}

BehaviorMetrics behavior_metrics(const std::vector<TrajectoryResult>& trajectories,
                                 const std::vector<std::string>* golds) {
  BehaviorMetrics m;
  if (trajectories.empty()) return m;
  if (golds && golds->size() != trajectories.size()) {
    throw LengthMismatch("golds do not line up with trajectories");
  }

  long rounds = 0, retrievals = 0, ds_calls = 0;
  std::array<long, kNumPlannerActions> plan_counts{};
  long planner_steps_in_menu = 0;
  for (const auto& traj : trajectories) {
    rounds += traj.rounds_used;
    retrievals += traj.retrievals_used;
    for (const auto& step : traj.steps) {
      if (step.role == Role::DS) ++ds_calls;
      if (step.role != Role::Planner) continue;
      std::optional<int> index;
      if (step.format_violation) {
        index = 2;  // fallback R,AG is what actually executed
      } else {
        const PlanResult parsed = parse_workflow(step.action);
        if (auto* plan = std::get_if<WorkflowPlan>(&parsed)) index = menu_index_of(*plan);
      }
      if (index) {
        ++plan_counts[*index];
        ++planner_steps_in_menu;
      }
    }
  }
  m.mean_rounds = static_cast<double>(rounds) / trajectories.size();
  m.mean_retrievals = static_cast<double>(retrievals) / trajectories.size();
  m.ds_usage_ratio = rounds > 0 ? static_cast<double>(ds_calls) / rounds : 0.0;
  if (planner_steps_in_menu > 0) {
    for (int a = 0; a < kNumPlannerActions; ++a) {
      m.workflow_fractions[a] = static_cast<double>(plan_counts[a]) / planner_steps_in_menu;
    }
  }
  if (golds) {
    double f1_total = 0.0;
    for (size_t i = 0; i < trajectories.size(); ++i) {
      f1_total += token_f1(trajectories[i].final_answer, (*golds)[i]);
    }
    m.mean_f1 = f1_total / trajectories.size();
    m.has_f1 = true;
  }
  return m;
}

double gold_plan_mass(const ToyPlannerPolicy& policy, const std::vector<SyntheticTask>& tasks) {
  if (tasks.empty()) return 0.0;
  double total = 0.0;
  for (const auto& task : tasks) {
    const Eigen::VectorXd p = policy.distribution(featurize(task.question));
    switch (task.gold_plan_class) {
      case PlanClass::SolveDirect:
        total += p.head(kNumSolveActions).sum();
        break;
      case PlanClass::QDS:
        total += p[kNumSolveActions];
        break;
      case PlanClass::QDP:
        total += p[kNumSolveActions + 1];
        break;
    }
  }
  return total / tasks.size();
}

namespace {

struct Rollout {
  TrajectoryResult trajectory;
  RewardBreakdown rewards;
};

Rollout collect(const Corpus& corpus, const SyntheticTask& task, const ToyPlannerPolicy& policy,
                const TrainConfig& cfg, std::uint64_t episode_seed, bool greedy,
                std::int64_t query_id) {
  ToyPlannerBackend planner(policy, episode_seed, greedy);
  OracleBackend executors(cfg.oracle);
  BackendSet backends;
  backends.set_all(&executors);
  backends.set(Role::Planner, &planner);
  EngineOptions opts;
  opts.limits = cfg.limits;
  Rollout out;
  out.trajectory = run_inference(task.question, backends, corpus, opts, query_id);
  out.rewards = assign_step_rewards(out.trajectory, task.gold_answer, cfg.reward);
  return out;
}

std::vector<Rollout> collect_batch(const Corpus& corpus,
                                   const std::vector<const SyntheticTask*>& tasks,
                                   const ToyPlannerPolicy& policy, const TrainConfig& cfg,
                                   std::uint64_t batch_seed, bool greedy) {
  std::vector<Rollout> rollouts(tasks.size());
  auto worker = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const std::uint64_t episode_seed = fnv1a_mix(batch_seed, fnv1a_mix(i, kFnvOffset));
      rollouts[i] =
          collect(corpus, *tasks[i], policy, cfg, episode_seed, greedy, static_cast<std::int64_t>(i));
    }
  };
  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1 || tasks.size() < 2) {
    worker(0, tasks.size());
  } else {
    // Rollouts run concurrently against the read-only policy; results land
    // in task-index order, so the buffer contents stay reproducible.
    std::vector<std::future<void>> futures;
    const size_t chunk = (tasks.size() + jobs - 1) / jobs;
    for (size_t begin = 0; begin < tasks.size(); begin += chunk) {
      const size_t end = std::min(tasks.size(), begin + chunk);
      futures.push_back(std::async(std::launch::async, worker, begin, end));
    }
    for (auto& f : futures) f.get();
  }
  return rollouts;
}

MetricsRow evaluate(const Corpus& corpus, const std::vector<SyntheticTask>& eval_tasks,
                    const ToyPlannerPolicy& policy, const TrainConfig& cfg, int step) {
  std::vector<const SyntheticTask*> ptrs;
  ptrs.reserve(eval_tasks.size());
  for (const auto& t : eval_tasks) ptrs.push_back(&t);
  const std::uint64_t eval_seed = fnv1a_mix(cfg.seed, fnv1a("eval"));
  const auto rollouts = collect_batch(corpus, ptrs, policy, cfg, eval_seed, /*greedy=*/true);

  std::vector<TrajectoryResult> trajectories;
  std::vector<std::string> golds;
  trajectories.reserve(rollouts.size());
  for (size_t i = 0; i < rollouts.size(); ++i) {
    trajectories.push_back(rollouts[i].trajectory);
    golds.push_back(eval_tasks[i].gold_answer);
  }
  const BehaviorMetrics m = behavior_metrics(trajectories, &golds);

  MetricsRow row;
  row.step = step;
  row.f1 = m.mean_f1;
  row.mean_rounds = m.mean_rounds;
  row.mean_retrievals = m.mean_retrievals;
  row.ds_ratio = m.ds_usage_ratio;
  row.fractions = m.workflow_fractions;
  row.gold_rate = gold_plan_mass(policy, eval_tasks);
  return row;
}

}  // namespace

TrainReport train(const Corpus& corpus, const std::vector<SyntheticTask>& train_tasks,
                  const std::vector<SyntheticTask>& eval_tasks, const TrainConfig& cfg) {
  if (train_tasks.empty()) throw ConfigurationError("no training tasks");
  if (cfg.updates < 1 || cfg.batch_size < 1 || cfg.eval_interval < 1) {
    throw ConfigurationError("updates, batch_size and eval_interval must be >= 1");
  }

  TrainReport report;
  std::mt19937_64 update_rng(fnv1a_mix(cfg.seed, fnv1a("ppo")));
  std::mt19937_64 schedule_rng(fnv1a_mix(cfg.seed, fnv1a("schedule")));

  std::vector<size_t> schedule(train_tasks.size());
  std::iota(schedule.begin(), schedule.end(), size_t{0});
  std::shuffle(schedule.begin(), schedule.end(), schedule_rng);
  size_t cursor = 0;

  for (int update = 1; update <= cfg.updates; ++update) {
    std::vector<const SyntheticTask*> batch_tasks;
    batch_tasks.reserve(cfg.batch_size);
    for (int i = 0; i < cfg.batch_size; ++i) {
      if (cursor == schedule.size()) {
        std::shuffle(schedule.begin(), schedule.end(), schedule_rng);
        cursor = 0;
      }
      batch_tasks.push_back(&train_tasks[schedule[cursor++]]);
    }

    const std::uint64_t batch_seed = fnv1a_mix(cfg.seed, fnv1a_mix(update, fnv1a("batch")));
    const auto rollouts =
        collect_batch(corpus, batch_tasks, report.policy, cfg, batch_seed, /*greedy=*/false);

    ExperienceBuffer buffer;
    for (const auto& rollout : rollouts) {
      auto transitions = flatten(rollout.trajectory, rollout.rewards);
      Eigen::VectorXd rewards(transitions.size());
      Eigen::VectorXd values(transitions.size() + 1);
      for (size_t i = 0; i < transitions.size(); ++i) {
        rewards[i] = transitions[i].reward;
        values[i] = report.value.value(transitions[i].features);
        transitions[i].value_estimate = values[i];
      }
      values[transitions.size()] = 0.0;  // finished episode
      const auto [advantages, returns] = compute_gae(rewards, values, cfg.adv);
      for (size_t i = 0; i < transitions.size(); ++i) {
        transitions[i].advantage = advantages[i];
        transitions[i].return_target = returns[i];
      }
      buffer.insert(buffer.end(), std::make_move_iterator(transitions.begin()),
                    std::make_move_iterator(transitions.end()));
    }

    ppo_update(report.policy, report.value, std::move(buffer), cfg.ppo, update_rng);
    report.updates_run = update;

    const bool last = update == cfg.updates;
    if (update % cfg.eval_interval == 0 || last) {
      MetricsRow row = evaluate(corpus, eval_tasks, report.policy, cfg, update);
      report.final_gold_rate = row.gold_rate;
      report.rows.push_back(std::move(row));
      if (cfg.stop_at_gold_rate > 0.0 && report.final_gold_rate >= cfg.stop_at_gold_rate) {
        break;
      }
    }
  }
  return report;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "step,f1,mean_rounds,mean_retrievals,ds_ratio";
  for (int a = 0; a < kNumPlannerActions; ++a) out << ',' << menu_action_name(a);
  out << ",gold_rate\n";
  for (const auto& row : rows) {
    out << row.step << ',' << format_double(row.f1) << ',' << format_double(row.mean_rounds)
        << ',' << format_double(row.mean_retrievals) << ',' << format_double(row.ds_ratio);
    for (int a = 0; a < kNumPlannerActions; ++a) out << ',' << format_double(row.fractions[a]);
    out << ',' << format_double(row.gold_rate) << '\n';
  }
  return out.str();
}

}  // namespace dynarag
