#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dynarag/document.hpp"
#include "dynarag/errors.hpp"

namespace dynarag {

/// Every agent persona in the system. RA is a pure retriever interface and
/// the only role that is never trainable.
enum class Role { Planner, QDS, QDP, QR, RA, DS, AG, AS };

constexpr bool is_trainable_role(Role r) { return r != Role::RA; }

const char* role_name(Role r);
std::optional<Role> role_from_name(std::string_view name);

/// One entry of the execution trace: a sub-query plus its answer slot.
/// The answer transitions from absent to present at most once.
struct TraceNode {
  int node_id = 0;
  std::string sub_query;
  std::optional<std::string> answer;
  int depth = 0;
  std::optional<int> parent_id;

  bool solved() const { return answer.has_value(); }
};

/// Ordered ledger of trace nodes. node_ids are unique and strictly
/// increasing in insertion order; the root (depth 0) carries the original
/// question.
struct ExecutionTrace {
  std::vector<TraceNode> nodes;

  const TraceNode* find(int node_id) const;
  TraceNode* find(int node_id);
  bool has_children(int node_id) const;
};

/// The global blackboard: original question, trace, and round counter.
struct GlobalState {
  std::string q_origin;
  ExecutionTrace trace;
  int round = 0;
};

/// Intra-round working memory. Cleared at the start of each round and
/// append-only while the round runs.
struct ContextEntry {
  Role producer = Role::Planner;
  std::variant<std::string, std::vector<Document>> payload;
};

struct RoundContext {
  std::vector<ContextEntry> entries;

  void clear() { entries.clear(); }
  void push_text(Role producer, std::string text);
  void push_docs(Role producer, std::vector<Document> docs);
  const std::string* last_text(Role producer) const;
  const std::vector<Document>* last_docs(Role producer) const;
};

struct QaPair {
  std::string question;
  std::string answer;
  bool operator==(const QaPair&) const = default;
};

/// Role-specific view of (state, round context, target node). Deterministic
/// in its inputs; what each field carries depends on the role:
///   Planner/QDS/QDP  target_query only
///   QR               target_query + resolved prior sibling pairs
///   RA               effective_query is the search string (rewrite if QR ran)
///   DS               target_query + candidate documents
///   AG               target_query + selected (or all retrieved) documents
///   AS               target_query = original question, all resolved pairs
struct Observation {
  Role role = Role::Planner;
  std::string target_query;
  std::string effective_query;
  std::vector<QaPair> resolved_pairs;
  std::vector<Document> documents;
  bool solve_only_menu = false;
};

/// Creates a fresh state whose trace holds a single unsolved root node.
/// Throws EmptyQuestion if the question is blank after trimming.
GlobalState new_state(const std::string& question);

/// Returns the unsolved node with the smallest node_id, or nullptr when the
/// whole trace is resolved.
const TraceNode* first_unsolved_node(const GlobalState& state);

/// The engine's target selector: smallest unsolved node without children.
/// Decomposed parents park until synthesis, so plain first_unsolved_node
/// would starve the loop.
const TraceNode* first_unsolved_leaf(const GlobalState& state);

/// Appends 1..4 child nodes under an existing unsolved parent. The parent
/// stays unsolved; it is settled with a sentinel once synthesis runs.
void append_children(GlobalState& state, int parent_id,
                     const std::vector<std::string>& sub_queries);

/// Writes a node's answer; write-once.
void resolve_node(GlobalState& state, int node_id, const std::string& answer);

Observation build_observation(const GlobalState& state, const RoundContext& ctx,
                              const TraceNode& target, Role role);

std::uint64_t observation_digest(const Observation& obs);

}  // namespace dynarag
