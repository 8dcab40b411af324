#include "dynarag/trace.hpp"

#include <algorithm>

#include "dynarag/math.hpp"
#include "dynarag/strings.hpp"

namespace dynarag {

const char* role_name(Role r) {
  switch (r) {
    case Role::Planner: return "Planner";
    case Role::QDS: return "QDS";
    case Role::QDP: return "QDP";
    case Role::QR: return "QR";
    case Role::RA: return "RA";
    case Role::DS: return "DS";
    case Role::AG: return "AG";
    case Role::AS: return "AS";
  }
  return "?";
}

std::optional<Role> role_from_name(std::string_view name) {
  static const Role all[] = {Role::Planner, Role::QDS, Role::QDP, Role::QR,
                             Role::RA,      Role::DS,  Role::AG,  Role::AS};
  for (Role r : all) {
    if (name == role_name(r)) return r;
  }
  return std::nullopt;
}

const TraceNode* ExecutionTrace::find(int node_id) const {
  for (const auto& n : nodes) {
    if (n.node_id == node_id) return &n;
  }
  return nullptr;
}

TraceNode* ExecutionTrace::find(int node_id) {
  for (auto& n : nodes) {
    if (n.node_id == node_id) return &n;
  }
  return nullptr;
}

bool ExecutionTrace::has_children(int node_id) const {
  return std::any_of(nodes.begin(), nodes.end(), [&](const TraceNode& n) {
    return n.parent_id && *n.parent_id == node_id;
  });
}

void RoundContext::push_text(Role producer, std::string text) {
  entries.push_back({producer, std::move(text)});
}

void RoundContext::push_docs(Role producer, std::vector<Document> docs) {
  entries.push_back({producer, std::move(docs)});
}

const std::string* RoundContext::last_text(Role producer) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (it->producer == producer) {
      if (auto* s = std::get_if<std::string>(&it->payload)) return s;
    }
  }
  return nullptr;
}

const std::vector<Document>* RoundContext::last_docs(Role producer) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (it->producer == producer) {
      if (auto* d = std::get_if<std::vector<Document>>(&it->payload)) return d;
    }
  }
  return nullptr;
}

GlobalState new_state(const std::string& question) {
  if (trim(question).empty()) throw EmptyQuestion("question is blank");
  GlobalState state;
  state.q_origin = question;
  state.round = 0;
  state.trace.nodes.push_back(TraceNode{0, question, std::nullopt, 0, std::nullopt});
  return state;
}

const TraceNode* first_unsolved_node(const GlobalState& state) {
  for (const auto& n : state.trace.nodes) {
    if (!n.solved()) return &n;  // insertion order == ascending node_id
  }
  return nullptr;
}

const TraceNode* first_unsolved_leaf(const GlobalState& state) {
  for (const auto& n : state.trace.nodes) {
    if (!n.solved() && !state.trace.has_children(n.node_id)) return &n;
  }
  return nullptr;
}

void append_children(GlobalState& state, int parent_id,
                     const std::vector<std::string>& sub_queries) {
  TraceNode* parent = state.trace.find(parent_id);
  if (!parent) throw UnknownParent("no node " + std::to_string(parent_id));
  if (parent->solved()) throw AlreadyResolved("parent " + std::to_string(parent_id) + " already answered");
  if (sub_queries.empty()) throw InvalidParams("at least one sub-query required");
  if (sub_queries.size() > 4) {
    throw TooManySubQueries("got " + std::to_string(sub_queries.size()) + ", limit is 4");
  }
  int next_id = state.trace.nodes.back().node_id + 1;
  const int child_depth = parent->depth + 1;
  for (const auto& q : sub_queries) {
    state.trace.nodes.push_back(TraceNode{next_id++, q, std::nullopt, child_depth, parent_id});
  }
}

void resolve_node(GlobalState& state, int node_id, const std::string& answer) {
  TraceNode* node = state.trace.find(node_id);
  if (!node) throw UnknownNode("no node " + std::to_string(node_id));
  if (node->solved()) throw AlreadyResolved("node " + std::to_string(node_id) + " already answered");
  node->answer = answer;
}

Observation build_observation(const GlobalState& state, const RoundContext& ctx,
                              const TraceNode& target, Role role) {
  Observation obs;
  obs.role = role;
  obs.target_query = target.sub_query;
  const std::string* rewrite = ctx.last_text(Role::QR);
  obs.effective_query = rewrite ? *rewrite : target.sub_query;

  switch (role) {
    case Role::Planner:
    case Role::QDS:
    case Role::QDP:
      obs.effective_query = target.sub_query;
      break;
    case Role::QR: {
      // Resolved prior siblings give the rewriter its coreference support.
      obs.effective_query = target.sub_query;
      for (const auto& n : state.trace.nodes) {
        if (n.parent_id == target.parent_id && n.node_id < target.node_id && n.solved()) {
          obs.resolved_pairs.push_back({n.sub_query, *n.answer});
        }
      }
      break;
    }
    case Role::RA:
      obs.target_query = obs.effective_query;
      break;
    case Role::DS: {
      const auto* docs = ctx.last_docs(Role::RA);
      if (!docs) throw MissingContext("document selection requires retrieved candidates");
      obs.documents = *docs;
      break;
    }
    case Role::AG: {
      if (const auto* selected = ctx.last_docs(Role::DS)) {
        obs.documents = *selected;
      } else if (const auto* retrieved = ctx.last_docs(Role::RA)) {
        obs.documents = *retrieved;
      }
      break;
    }
    case Role::AS: {
      obs.target_query = state.q_origin;
      obs.effective_query = state.q_origin;
      for (const auto& n : state.trace.nodes) {
        if (n.solved()) obs.resolved_pairs.push_back({n.sub_query, *n.answer});
      }
      break;
    }
  }
  return obs;
}

std::uint64_t observation_digest(const Observation& obs) {
  std::uint64_t h = kFnvOffset;
  h = fnv1a(role_name(obs.role), h);
  h = fnv1a("|", h);
  h = fnv1a(obs.target_query, h);
  h = fnv1a("|", h);
  h = fnv1a(obs.effective_query, h);
  for (const auto& p : obs.resolved_pairs) {
    h = fnv1a("|q:", h);
    h = fnv1a(p.question, h);
    h = fnv1a("|a:", h);
    h = fnv1a(p.answer, h);
  }
  for (const auto& d : obs.documents) {
    h = fnv1a_mix(static_cast<std::uint64_t>(d.doc_id), h);
    h = fnv1a(d.text, h);
  }
  h = fnv1a_mix(obs.solve_only_menu ? 1 : 0, h);
  return h;
}

}  // namespace dynarag
