#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dynarag/trace.hpp"
#include "dynarag/workflow.hpp"

namespace dynarag {

struct PlanAction {
  WorkflowPlan plan;
  bool operator==(const PlanAction&) const = default;
};

struct RewriteAction {
  std::string query;
  bool operator==(const RewriteAction&) const = default;
};

struct DecomposeAction {
  std::vector<std::string> sub_queries;
  bool operator==(const DecomposeAction&) const = default;
};

struct SelectAction {
  std::vector<int> ids;  // ascending, deduplicated candidate indices
  bool operator==(const SelectAction&) const = default;
};

struct AnswerAction {
  std::string answer;
  bool operator==(const AnswerAction&) const = default;
};

using TypedAction =
    std::variant<PlanAction, RewriteAction, DecomposeAction, SelectAction, AnswerAction>;

struct ParseBounds {
  int max_id = -1;  // largest valid candidate index for DS
};

using ActionParse = std::variant<TypedAction, FormatError>;

/// Finds exactly one well-formed <tag>...</tag> span and returns its inner
/// text. Zero or repeated spans yield nullopt — repeated tags are rejected
/// rather than resolved to the first occurrence.
std::optional<std::string> extract_single_tag(std::string_view text, std::string_view tag);

/// Parses a raw model output into the typed action for the role:
///   Planner      the workflow grammar (see parse_workflow)
///   QR           <query>...</query>
///   QDS/QDP      <q1>...</q1>..<qn>...</qn>, contiguous from 1, n <= 4
///   DS           <id>...</id> comma-separated integers in [0, bounds.max_id]
///   AG/AS        <answer>...</answer>
/// Any structural failure is returned as a FormatError; this predicate and
/// the -1 format penalty agree by construction.
ActionParse parse_output(Role role, std::string_view text, const ParseBounds& bounds = {});

}  // namespace dynarag
