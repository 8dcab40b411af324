#include "dynarag/workflow.hpp"

#include <algorithm>

#include "dynarag/strings.hpp"

namespace dynarag {

namespace {

constexpr std::string_view kOpenTag = "<workflow>";
constexpr std::string_view kCloseTag = "</workflow>";

bool is_decompose_token(const std::string& t) { return t == "QDS" || t == "QDP"; }

}  // namespace

const char* executor_token(ExecutorKind k) {
  switch (k) {
    case ExecutorKind::QR: return "QR";
    case ExecutorKind::R: return "R";
    case ExecutorKind::DS: return "DS";
    case ExecutorKind::AG: return "AG";
    case ExecutorKind::QDS: return "QDS";
    case ExecutorKind::QDP: return "QDP";
  }
  return "?";
}

std::optional<ExecutorKind> executor_from_token(std::string_view token) {
  static const ExecutorKind all[] = {ExecutorKind::QR,  ExecutorKind::R,
                                     ExecutorKind::DS,  ExecutorKind::AG,
                                     ExecutorKind::QDS, ExecutorKind::QDP};
  for (ExecutorKind k : all) {
    if (token == executor_token(k)) return k;
  }
  return std::nullopt;
}

WorkflowPlan WorkflowPlan::decompose(DecomposeMode m) {
  WorkflowPlan p;
  p.kind = Kind::Decompose;
  p.mode = m;
  return p;
}

WorkflowPlan WorkflowPlan::solve(std::vector<ExecutorKind> chain) {
  WorkflowPlan p;
  p.kind = Kind::Solve;
  p.chain = std::move(chain);
  return p;
}

const char* format_error_name(FormatError e) {
  switch (e) {
    case FormatError::MissingTag: return "MissingTag";
    case FormatError::BadNumbering: return "BadNumbering";
    case FormatError::TooMany: return "TooMany";
    case FormatError::OutOfRange: return "OutOfRange";
    case FormatError::NonInteger: return "NonInteger";
    case FormatError::DecomposeNotAlone: return "DecomposeNotAlone";
    case FormatError::UnknownToken: return "UnknownToken";
    case FormatError::Duplicate: return "Duplicate";
    case FormatError::Empty: return "Empty";
    case FormatError::DsWithoutPriorR: return "DsWithoutPriorR";
    case FormatError::LastNotAG: return "LastNotAG";
  }
  return "?";
}

std::optional<FormatError> validate_tokens(const std::vector<std::string>& tokens) {
  const bool has_decompose =
      std::any_of(tokens.begin(), tokens.end(), is_decompose_token);
  if (has_decompose && tokens.size() > 1) return FormatError::DecomposeNotAlone;

  for (const auto& t : tokens) {
    if (!executor_from_token(t)) return FormatError::UnknownToken;
  }
  for (size_t i = 0; i < tokens.size(); ++i) {
    for (size_t j = i + 1; j < tokens.size(); ++j) {
      if (tokens[i] == tokens[j]) return FormatError::Duplicate;
    }
  }
  if (tokens.empty()) return FormatError::Empty;
  if (has_decompose) return std::nullopt;  // single QDS or QDP

  auto ds = std::find(tokens.begin(), tokens.end(), "DS");
  if (ds != tokens.end()) {
    auto r = std::find(tokens.begin(), ds, "R");
    if (r == ds) return FormatError::DsWithoutPriorR;
  }
  if (tokens.back() != "AG") return FormatError::LastNotAG;
  return std::nullopt;
}

PlanResult plan_from_tokens(const std::vector<std::string>& tokens) {
  if (auto err = validate_tokens(tokens)) return *err;
  if (tokens.size() == 1 && is_decompose_token(tokens[0])) {
    return WorkflowPlan::decompose(tokens[0] == "QDS" ? DecomposeMode::Serial
                                                      : DecomposeMode::Parallel);
  }
  std::vector<ExecutorKind> chain;
  chain.reserve(tokens.size());
  for (const auto& t : tokens) chain.push_back(*executor_from_token(t));
  return WorkflowPlan::solve(std::move(chain));
}

PlanResult parse_workflow(std::string_view text) {
  const size_t open = text.find(kOpenTag);
  if (open == std::string_view::npos) return FormatError::MissingTag;
  if (text.find(kOpenTag, open + 1) != std::string_view::npos) return FormatError::MissingTag;
  const size_t close = text.find(kCloseTag, open + kOpenTag.size());
  if (close == std::string_view::npos) return FormatError::MissingTag;
  if (text.find(kCloseTag, close + 1) != std::string_view::npos) return FormatError::MissingTag;

  const std::string_view inner =
      trim(text.substr(open + kOpenTag.size(), close - open - kOpenTag.size()));
  std::vector<std::string> tokens;
  if (!inner.empty()) {
    for (auto& part : split(inner, ',')) tokens.emplace_back(trim(part));
  }
  return plan_from_tokens(tokens);
}

std::string encode(const WorkflowPlan& plan) {
  std::string body;
  if (plan.kind == WorkflowPlan::Kind::Decompose) {
    body = plan.mode == DecomposeMode::Serial ? "QDS" : "QDP";
  } else {
    for (size_t i = 0; i < plan.chain.size(); ++i) {
      if (i) body += ',';
      body += executor_token(plan.chain[i]);
    }
  }
  return std::string(kOpenTag) + body + std::string(kCloseTag);
}

const std::array<WorkflowPlan, kNumPlannerActions>& planner_menu() {
  using K = ExecutorKind;
  static const std::array<WorkflowPlan, kNumPlannerActions> menu = {
      WorkflowPlan::solve({K::AG}),
      WorkflowPlan::solve({K::QR, K::AG}),
      WorkflowPlan::solve({K::R, K::AG}),
      WorkflowPlan::solve({K::QR, K::R, K::AG}),
      WorkflowPlan::solve({K::R, K::DS, K::AG}),
      WorkflowPlan::solve({K::QR, K::R, K::DS, K::AG}),
      WorkflowPlan::decompose(DecomposeMode::Serial),
      WorkflowPlan::decompose(DecomposeMode::Parallel),
  };
  return menu;
}

std::optional<int> menu_index_of(const WorkflowPlan& plan) {
  const auto& menu = planner_menu();
  for (int i = 0; i < kNumPlannerActions; ++i) {
    if (menu[i] == plan) return i;
  }
  return std::nullopt;
}

const char* menu_action_name(int index) {
  static const char* names[] = {"ag",       "qr_ag",       "r_ag", "qr_r_ag",
                                "r_ds_ag",  "qr_r_ds_ag",  "qds",  "qdp"};
  return (index >= 0 && index < kNumPlannerActions) ? names[index] : "?";
}

}  // namespace dynarag
