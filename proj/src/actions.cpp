#include "dynarag/actions.hpp"

#include <algorithm>
#include <cctype>

#include "dynarag/errors.hpp"
#include "dynarag/strings.hpp"

namespace dynarag {

namespace {

size_t count_occurrences(std::string_view text, std::string_view needle) {
  size_t n = 0;
  size_t pos = text.find(needle);
  while (pos != std::string_view::npos) {
    ++n;
    pos = text.find(needle, pos + 1);
  }
  return n;
}

ActionParse parse_rewrite(std::string_view text) {
  auto inner = extract_single_tag(text, "query");
  if (!inner) return FormatError::MissingTag;
  return TypedAction{RewriteAction{std::string(trim(*inner))}};
}

ActionParse parse_decompose(std::string_view text) {
  // Probe q1..q9; the protocol caps sub-questions at 4, anything beyond 9
  // cannot form a contiguous block anyway.
  constexpr int kProbe = 9;
  std::vector<std::optional<std::string>> found(kProbe + 1);
  bool any_open = false;
  for (int i = 1; i <= kProbe; ++i) {
    const std::string tag = "q" + std::to_string(i);
    const std::string open = "<" + tag + ">";
    const size_t occurrences = count_occurrences(text, open);
    if (occurrences == 0) continue;
    any_open = true;
    if (occurrences > 1) return FormatError::BadNumbering;
    found[i] = extract_single_tag(text, tag);
    if (!found[i]) return FormatError::BadNumbering;  // unclosed or doubled close
  }
  if (!any_open) return FormatError::MissingTag;

  int n = 0;
  while (n < kProbe && found[n + 1]) ++n;
  for (int i = n + 1; i <= kProbe; ++i) {
    if (found[i]) return FormatError::BadNumbering;  // gap in the numbering
  }
  if (n == 0) return FormatError::BadNumbering;  // e.g. only <q2> present
  if (n > 4) return FormatError::TooMany;

  DecomposeAction action;
  for (int i = 1; i <= n; ++i) {
    std::string q(trim(*found[i]));
    if (q.empty()) return FormatError::BadNumbering;
    action.sub_queries.push_back(std::move(q));
  }
  return TypedAction{std::move(action)};
}

ActionParse parse_select(std::string_view text, const ParseBounds& bounds) {
  auto inner = extract_single_tag(text, "id");
  if (!inner) return FormatError::MissingTag;
  const std::string_view body = trim(*inner);
  SelectAction action;
  if (body.empty()) return TypedAction{std::move(action)};  // empty selection is legal

  for (const auto& part : split(body, ',')) {
    const std::string_view token = trim(part);
    if (token.empty()) return FormatError::NonInteger;
    bool negative = token[0] == '-';
    const std::string_view digits = negative ? token.substr(1) : token;
    if (digits.empty() ||
        !std::all_of(digits.begin(), digits.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return FormatError::NonInteger;
    }
    long value = 0;
    for (char c : digits) {
      value = value * 10 + (c - '0');
      if (value > 1'000'000) return FormatError::OutOfRange;
    }
    if (negative) value = -value;
    if (value < 0 || value > bounds.max_id) return FormatError::OutOfRange;
    action.ids.push_back(static_cast<int>(value));
  }
  std::sort(action.ids.begin(), action.ids.end());
  action.ids.erase(std::unique(action.ids.begin(), action.ids.end()), action.ids.end());
  return TypedAction{std::move(action)};
}

ActionParse parse_answer(std::string_view text) {
  auto inner = extract_single_tag(text, "answer");
  if (!inner) return FormatError::MissingTag;
  return TypedAction{AnswerAction{std::string(trim(*inner))}};
}

}  // namespace

std::optional<std::string> extract_single_tag(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  if (count_occurrences(text, open) != 1 || count_occurrences(text, close) != 1) {
    return std::nullopt;
  }
  const size_t begin = text.find(open);
  const size_t end = text.find(close);
  if (end < begin) return std::nullopt;
  const size_t inner_begin = begin + open.size();
  return std::string(text.substr(inner_begin, end - inner_begin));
}

ActionParse parse_output(Role role, std::string_view text, const ParseBounds& bounds) {
  switch (role) {
    case Role::Planner: {
      PlanResult plan = parse_workflow(text);
      if (auto* err = std::get_if<FormatError>(&plan)) return *err;
      return TypedAction{PlanAction{std::get<WorkflowPlan>(plan)}};
    }
    case Role::QR: return parse_rewrite(text);
    case Role::QDS:
    case Role::QDP: return parse_decompose(text);
    case Role::DS: return parse_select(text, bounds);
    case Role::AG:
    case Role::AS: return parse_answer(text);
    case Role::RA: break;
  }
  throw UnsupportedRole("retrieval agent output is not parsed");
}

}  // namespace dynarag
