#include "dynarag/engine.hpp"

#include <sstream>

#include "dynarag/actions.hpp"
#include "dynarag/errors.hpp"
#include "dynarag/math.hpp"
#include "dynarag/strings.hpp"

namespace dynarag {

namespace {

std::string digest_hex(const Observation& obs) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(observation_digest(obs)));
  return std::string(buf);
}

StepRecord make_step(int t, int k, Role role, const Observation& obs,
                     const ActionSample& sample, bool violation) {
  StepRecord step;
  step.t = t;
  step.k = k;
  step.role = role;
  step.obs_digest = digest_hex(obs);
  step.target_query = obs.target_query;
  step.action = sample.text;
  step.format_violation = violation;
  step.action_index = sample.action_index;
  step.log_prob = sample.log_prob;
  step.solve_only_menu = obs.solve_only_menu;
  return step;
}

Role chain_role(ExecutorKind kind) {
  switch (kind) {
    case ExecutorKind::QR: return Role::QR;
    case ExecutorKind::R: return Role::RA;
    case ExecutorKind::DS: return Role::DS;
    case ExecutorKind::AG: return Role::AG;
    default: break;
  }
  throw ConfigurationError("decomposition token inside a solving chain");
}

const std::vector<ExecutorKind>& fallback_chain() {
  static const std::vector<ExecutorKind> chain = {ExecutorKind::R, ExecutorKind::AG};
  return chain;
}

struct Engine {
  const BackendSet& backends;
  const Corpus& corpus;
  const EngineOptions& opts;

  GlobalState state{};
  std::vector<StepRecord> steps{};
  int retrievals = 0;
  int rounds = 0;

  ActionSample invoke(Role role, const Observation& obs) {
    PolicyBackend* backend = backends.get(role);
    if (!backend) {
      throw ConfigurationError(std::string("no backend wired for role ") + role_name(role));
    }
    try {
      return backend->act(role, obs);
    } catch (const BackendUnavailable&) {
      if (!opts.backend_failure_as_violation) throw;
      return ActionSample{};  // blank output fails its tag protocol downstream
    }
  }

  void record(int t, int k, Role role, const Observation& obs, const ActionSample& sample,
              bool violation) {
    steps.push_back(make_step(t, k, role, obs, sample, violation));
  }

  void run_round(const TraceNode& target) {
    ++rounds;
    const int t = rounds;
    state.round = t;
    RoundContext ctx;

    Observation planner_obs = build_observation(state, ctx, target, Role::Planner);
    planner_obs.solve_only_menu = target.depth >= opts.limits.max_depth;
    const ActionSample planner_sample = invoke(Role::Planner, planner_obs);

    WorkflowPlan plan = WorkflowPlan::solve(fallback_chain());
    bool violation = true;
    ActionParse parsed = parse_output(Role::Planner, planner_sample.text);
    if (auto* action = std::get_if<TypedAction>(&parsed)) {
      const WorkflowPlan& proposed = std::get<PlanAction>(*action).plan;
      const bool decompose_blocked = planner_obs.solve_only_menu &&
                                     proposed.kind == WorkflowPlan::Kind::Decompose;
      if (!decompose_blocked) {
        plan = proposed;
        violation = false;
      }
    }
    record(t, 0, Role::Planner, planner_obs, planner_sample, violation);

    ChainContext run{&state, &corpus, &backends, &opts, t, 1, &retrievals, &steps};
    if (plan.kind == WorkflowPlan::Kind::Decompose) {
      const Role role = plan.mode == DecomposeMode::Serial ? Role::QDS : Role::QDP;
      const Observation obs = build_observation(state, ctx, target, role);
      const ActionSample sample = invoke(role, obs);
      ActionParse decomposed = parse_output(role, sample.text);
      if (auto* action = std::get_if<TypedAction>(&decomposed)) {
        record(t, 1, role, obs, sample, false);
        append_children(state, target.node_id,
                        std::get<DecomposeAction>(*action).sub_queries);
        return;  // decomposition ends the round for this node
      }
      record(t, 1, role, obs, sample, true);
      run.next_k = 2;
      execute_solve_chain(fallback_chain(), target.node_id, ctx, run);
      return;
    }
    execute_solve_chain(plan.chain, target.node_id, ctx, run);
  }

  TrajectoryResult run(const std::string& question, std::int64_t query_id) {
    state = new_state(question);
    while (rounds < opts.limits.max_rounds) {
      const TraceNode* target = first_unsolved_leaf(state);
      if (!target) break;
      const TraceNode pinned = *target;  // appends may reallocate the trace
      run_round(pinned);
    }

    TrajectoryResult result;
    result.query_id = query_id;
    result.truncated = first_unsolved_leaf(state) != nullptr;

    if (state.trace.nodes.size() > 1) {
      const Observation obs =
          build_observation(state, RoundContext{}, state.trace.nodes.front(), Role::AS);
      const ActionSample sample = invoke(Role::AS, obs);
      std::string answer;
      bool violation = true;
      ActionParse parsed = parse_output(Role::AS, sample.text);
      if (auto* action = std::get_if<TypedAction>(&parsed)) {
        answer = std::get<AnswerAction>(*action).answer;
        violation = false;
      }
      const int k = steps.empty() ? 0 : steps.back().k + 1;
      record(rounds, k, Role::AS, obs, sample, violation);
      result.final_answer = answer;
      // Decomposed parents are settled by the synthesis; they never block
      // termination.
      for (auto& node : state.trace.nodes) {
        if (!node.solved() && state.trace.has_children(node.node_id)) {
          node.answer = "delegated";
        }
      }
    } else {
      result.final_answer = state.trace.nodes.front().answer.value_or("");
    }

    result.steps = std::move(steps);
    result.rounds_used = rounds;
    result.retrievals_used = retrievals;
    result.final_state = std::move(state);
    return result;
  }
};

}  // namespace

void BackendSet::set_all(PolicyBackend* backend) {
  for (Role role : {Role::Planner, Role::QDS, Role::QDP, Role::QR, Role::DS, Role::AG, Role::AS}) {
    set(role, backend);
  }
}

void execute_solve_chain(const std::vector<ExecutorKind>& chain, int target_id,
                         RoundContext& ctx, ChainContext& run) {
  GlobalState& state = *run.state;
  const TraceNode& target = *state.trace.find(target_id);
  const EngineLimits& limits = run.opts->limits;

  auto invoke = [&](Role role, const Observation& obs) -> ActionSample {
    PolicyBackend* backend = run.backends->get(role);
    if (!backend) {
      throw ConfigurationError(std::string("no backend wired for role ") + role_name(role));
    }
    try {
      return backend->act(role, obs);
    } catch (const BackendUnavailable&) {
      if (!run.opts->backend_failure_as_violation) throw;
      return ActionSample{};
    }
  };
  auto record = [&](int k, Role role, const Observation& obs, const ActionSample& sample,
                    bool violation) {
    run.steps->push_back(make_step(run.t, k, role, obs, sample, violation));
  };

  for (ExecutorKind kind : chain) {
    const Role role = chain_role(kind);
    const int k = run.next_k++;
    switch (role) {
      case Role::QR: {
        const Observation obs = build_observation(state, ctx, target, Role::QR);
        const ActionSample sample = invoke(Role::QR, obs);
        ActionParse parsed = parse_output(Role::QR, sample.text);
        if (auto* action = std::get_if<TypedAction>(&parsed)) {
          record(k, Role::QR, obs, sample, false);
          ctx.push_text(Role::QR, std::get<RewriteAction>(*action).query);
        } else {
          record(k, Role::QR, obs, sample, true);  // fall back to the raw query
        }
        break;
      }
      case Role::RA: {
        const Observation obs = build_observation(state, ctx, target, Role::RA);
        std::vector<Document> docs;
        if (*run.retrievals < limits.max_retrievals) {
          docs = lexical_retrieve(*run.corpus, obs.effective_query, limits.retrieval_k);
          ++*run.retrievals;
        }
        ActionSample sample;
        sample.text = "docs:";
        for (size_t i = 0; i < docs.size(); ++i) {
          if (i) sample.text += ',';
          sample.text += std::to_string(docs[i].doc_id);
        }
        record(k, Role::RA, obs, sample, false);
        ctx.push_docs(Role::RA, std::move(docs));
        break;
      }
      case Role::DS: {
        const Observation obs = build_observation(state, ctx, target, Role::DS);
        const ActionSample sample = invoke(Role::DS, obs);
        ParseBounds bounds{static_cast<int>(obs.documents.size()) - 1};
        ActionParse parsed = parse_output(Role::DS, sample.text, bounds);
        if (auto* action = std::get_if<TypedAction>(&parsed)) {
          record(k, Role::DS, obs, sample, false);
          std::vector<Document> selected;
          for (int idx : std::get<SelectAction>(*action).ids) {
            selected.push_back(obs.documents[static_cast<size_t>(idx)]);
          }
          ctx.push_docs(Role::DS, std::move(selected));
        } else {
          record(k, Role::DS, obs, sample, true);
          ctx.push_docs(Role::DS, obs.documents);  // keep all candidates
        }
        break;
      }
      case Role::AG: {
        const Observation obs = build_observation(state, ctx, target, Role::AG);
        const ActionSample sample = invoke(Role::AG, obs);
        std::string answer;
        bool violation = true;
        ActionParse parsed = parse_output(Role::AG, sample.text);
        if (auto* action = std::get_if<TypedAction>(&parsed)) {
          answer = std::get<AnswerAction>(*action).answer;
          violation = false;
        }
        record(k, Role::AG, obs, sample, violation);
        resolve_node(state, target_id, answer);
        ctx.push_text(Role::AG, answer);
        break;
      }
      default:
        throw ConfigurationError("unreachable chain role");
    }
  }
}

TrajectoryResult run_inference(const std::string& question, const BackendSet& backends,
                               const Corpus& corpus, const EngineOptions& opts,
                               std::int64_t query_id) {
  if (opts.limits.max_rounds < 1 || opts.limits.max_depth < 1 ||
      opts.limits.max_retrievals < 1 || opts.limits.retrieval_k < 1) {
    throw ConfigurationError("engine limits must all be >= 1");
  }
  for (Role role : {Role::Planner, Role::QDS, Role::QDP, Role::QR, Role::DS, Role::AG, Role::AS}) {
    if (!backends.get(role)) {
      throw ConfigurationError(std::string("backends must cover role ") + role_name(role));
    }
  }
  Engine engine{backends, corpus, opts};
  return engine.run(question, query_id);
}

std::string emit_trajectory(const TrajectoryResult& result, const std::vector<double>* rewards,
                            const std::vector<double>* advantages, std::optional<double> f1,
                            std::optional<double> r_global) {
  if (rewards && rewards->size() != result.steps.size()) {
    throw LengthMismatch("rewards length does not match step count");
  }
  if (advantages && advantages->size() != result.steps.size()) {
    throw LengthMismatch("advantages length does not match step count");
  }
  std::ostringstream out;
  for (size_t i = 0; i < result.steps.size(); ++i) {
    const StepRecord& s = result.steps[i];
    nlohmann::json line{
        {"query_id", result.query_id},
        {"t", s.t},
        {"k", s.k},
        {"role", role_name(s.role)},
        {"action", s.action},
        {"reward", rewards ? nlohmann::json((*rewards)[i]) : nlohmann::json(nullptr)},
        {"advantage", advantages ? nlohmann::json((*advantages)[i]) : nlohmann::json(nullptr)},
        {"violation", s.format_violation},
    };
    out << line.dump() << '\n';
  }
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& node : result.final_state.trace.nodes) {
    trace.push_back(nlohmann::json{
        {"node_id", node.node_id},
        {"parent_id", node.parent_id ? nlohmann::json(*node.parent_id) : nlohmann::json(nullptr)},
        {"depth", node.depth},
        {"sub_query", node.sub_query},
        {"answer", node.answer ? nlohmann::json(*node.answer) : nlohmann::json(nullptr)},
    });
  }
  nlohmann::json summary{
      {"answer", result.final_answer},
      {"f1", f1 ? nlohmann::json(*f1) : nlohmann::json(nullptr)},
      {"rounds", result.rounds_used},
      {"retrievals", result.retrievals_used},
      {"r_global", r_global ? nlohmann::json(*r_global) : nlohmann::json(nullptr)},
      {"truncated", result.truncated},
      {"trace", std::move(trace)},
  };
  out << summary.dump() << '\n';
  return out.str();
}

ParsedTrajectory parse_trajectory_jsonl(std::string_view text) {
  ParsedTrajectory parsed;
  std::vector<nlohmann::json> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    if (!line.empty()) lines.push_back(nlohmann::json::parse(line));
    pos = end + 1;
  }
  if (lines.empty()) throw LengthMismatch("trajectory file is empty");
  parsed.summary = std::move(lines.back());
  lines.pop_back();
  for (const auto& j : lines) {
    StepRecord step;
    step.t = j.at("t").get<int>();
    step.k = j.at("k").get<int>();
    const auto role = role_from_name(j.at("role").get<std::string>());
    if (!role) throw ConfigurationError("unknown role in trajectory file");
    step.role = *role;
    step.action = j.at("action").get<std::string>();
    step.format_violation = j.at("violation").get<bool>();
    parsed.steps.push_back(std::move(step));
  }
  return parsed;
}

}  // namespace dynarag
