#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dynarag {

/// Plan-syntax tokens. R stands for the Retrieval Agent in plan text.
enum class ExecutorKind { QR, R, DS, AG, QDS, QDP };

const char* executor_token(ExecutorKind k);
std::optional<ExecutorKind> executor_from_token(std::string_view token);

enum class DecomposeMode { Serial, Parallel };

/// The Planner's action: either a decomposition directive or an ordered
/// solving chain over {QR, R, DS, AG}.
struct WorkflowPlan {
  enum class Kind { Decompose, Solve };

  Kind kind = Kind::Solve;
  DecomposeMode mode = DecomposeMode::Serial;  // Decompose only
  std::vector<ExecutorKind> chain;             // Solve only

  static WorkflowPlan decompose(DecomposeMode m);
  static WorkflowPlan solve(std::vector<ExecutorKind> chain);

  bool operator==(const WorkflowPlan&) const = default;
};

/// Reasons an agent output fails its protocol. The first five cover the
/// tag protocols of executor roles; the rest are workflow grammar rules,
/// checked in this declaration order so diagnoses are deterministic.
enum class FormatError {
  MissingTag,
  BadNumbering,
  TooMany,
  OutOfRange,
  NonInteger,
  DecomposeNotAlone,
  UnknownToken,
  Duplicate,
  Empty,
  DsWithoutPriorR,
  LastNotAG,
};

const char* format_error_name(FormatError e);

using PlanResult = std::variant<WorkflowPlan, FormatError>;

/// Grammar check over raw plan tokens. Accepts exactly {QDS}, {QDP}, and
/// every duplicate-free sequence over {QR,R,DS,AG} that ends in AG and, when
/// DS is present, has R somewhere before it. Violations are reported in the
/// fixed order DecomposeNotAlone, UnknownToken, Duplicate, Empty,
/// DsWithoutPriorR, LastNotAG.
std::optional<FormatError> validate_tokens(const std::vector<std::string>& tokens);

PlanResult plan_from_tokens(const std::vector<std::string>& tokens);

/// Extracts the single <workflow>...</workflow> span, splits on commas,
/// trims, maps tokens case-sensitively and validates. Zero or multiple tag
/// spans report MissingTag.
PlanResult parse_workflow(std::string_view text);

/// Canonical text form; parse_workflow(encode(p)) == p for every valid plan.
std::string encode(const WorkflowPlan& plan);

/// The toy planner's discrete menu: the six pipeline-ordered solving chains
/// followed by the two decomposition directives.
constexpr int kNumPlannerActions = 8;
constexpr int kNumSolveActions = 6;

const std::array<WorkflowPlan, kNumPlannerActions>& planner_menu();
std::optional<int> menu_index_of(const WorkflowPlan& plan);
const char* menu_action_name(int index);

}  // namespace dynarag
