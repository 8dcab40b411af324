#include <doctest.h>

#include "dynarag/actions.hpp"

using namespace dynarag;

namespace {

template <typename T>
const T& expect_action(const ActionParse& r) {
  REQUIRE(std::holds_alternative<TypedAction>(r));
  return std::get<T>(std::get<TypedAction>(r));
}

FormatError expect_error(const ActionParse& r) {
  REQUIRE(std::holds_alternative<FormatError>(r));
  return std::get<FormatError>(r);
}

}  // namespace

TEST_CASE("document selection ids") {
  ParseBounds five{4};
  CHECK(expect_action<SelectAction>(parse_output(Role::DS, "<id>0, 2</id>", five)).ids ==
        std::vector<int>{0, 2});
  CHECK(expect_action<SelectAction>(parse_output(Role::DS, "<id>0, 1, 2, 4</id>", five)).ids ==
        std::vector<int>{0, 1, 2, 4});
  CHECK(expect_action<SelectAction>(parse_output(Role::DS, "<id></id>", five)).ids.empty());
  CHECK(expect_action<SelectAction>(parse_output(Role::DS, "<id>2, 2, 0</id>", five)).ids ==
        std::vector<int>{0, 2});

  CHECK(expect_error(parse_output(Role::DS, "<id>0, 7</id>", five)) == FormatError::OutOfRange);
  CHECK(expect_error(parse_output(Role::DS, "<id>-1</id>", five)) == FormatError::OutOfRange);
  CHECK(expect_error(parse_output(Role::DS, "<id>Document0, Document1</id>", five)) ==
        FormatError::NonInteger);
  CHECK(expect_error(parse_output(Role::DS, "<id>1; 2</id>", five)) == FormatError::NonInteger);
  CHECK(expect_error(parse_output(Role::DS, "no tags", five)) == FormatError::MissingTag);
  // no candidates means no valid index
  CHECK(expect_error(parse_output(Role::DS, "<id>0</id>", ParseBounds{-1})) ==
        FormatError::OutOfRange);
}

TEST_CASE("decomposition numbering") {
  const auto two = expect_action<DecomposeAction>(
      parse_output(Role::QDS, "<q1>A</q1><q2>B</q2>"));
  CHECK(two.sub_queries == std::vector<std::string>{"A", "B"});

  const auto newline_separated = expect_action<DecomposeAction>(parse_output(
      Role::QDS,
      "<q1>Who is the actor that first performed Something's Gotta Give?</q1>\n"
      "<q2>What is the heritage of this actor?</q2>"));
  CHECK(newline_separated.sub_queries.size() == 2);

  CHECK(expect_action<DecomposeAction>(parse_output(Role::QDP, "<q1>only</q1>")).sub_queries ==
        std::vector<std::string>{"only"});

  CHECK(expect_error(parse_output(Role::QDS, "no numbered tags")) == FormatError::MissingTag);
  CHECK(expect_error(parse_output(Role::QDS, "<q1>A</q1><q3>C</q3>")) ==
        FormatError::BadNumbering);
  CHECK(expect_error(parse_output(Role::QDS, "<q2>B</q2>")) == FormatError::BadNumbering);
  CHECK(expect_error(parse_output(Role::QDS, "<q1>A</q1><q1>A2</q1><q2>B</q2>")) ==
        FormatError::BadNumbering);
  CHECK(expect_error(parse_output(Role::QDS, "<q1>A</q1><q2></q2>")) ==
        FormatError::BadNumbering);
  CHECK(expect_error(parse_output(
            Role::QDS, "<q1>a</q1><q2>b</q2><q3>c</q3><q4>d</q4><q5>e</q5>")) ==
        FormatError::TooMany);
}

TEST_CASE("rewrite and answers") {
  CHECK(expect_action<RewriteAction>(
            parse_output(Role::QR, "<query>Heritage of Fred Astaire</query>"))
            .query == "Heritage of Fred Astaire");
  CHECK(expect_action<AnswerAction>(parse_output(Role::AG, "<answer>1982</answer>")).answer ==
        "1982");
  CHECK(expect_action<AnswerAction>(parse_output(Role::AS, "<answer>American</answer>")).answer ==
        "American");
  CHECK(expect_action<AnswerAction>(parse_output(Role::AG, "<answer></answer>")).answer == "");

  CHECK(expect_error(parse_output(Role::AG, "1982")) == FormatError::MissingTag);
  CHECK(expect_error(parse_output(Role::AG, "<answer>a</answer><answer>b</answer>")) ==
        FormatError::MissingTag);
  CHECK(expect_error(parse_output(Role::QR, "<query>unterminated")) == FormatError::MissingTag);
}

TEST_CASE("planner outputs go through the workflow grammar") {
  const auto plan = expect_action<PlanAction>(parse_output(Role::Planner, "<workflow>QDS</workflow>"));
  CHECK(plan.plan == WorkflowPlan::decompose(DecomposeMode::Serial));
  CHECK(expect_error(parse_output(Role::Planner, "<workflow>DS,AG</workflow>")) ==
        FormatError::DsWithoutPriorR);
}

TEST_CASE("retrieval outputs are not parsed") {
  CHECK_THROWS_AS(parse_output(Role::RA, "anything"), UnsupportedRole);
}

TEST_CASE("extract_single_tag") {
  CHECK(*extract_single_tag("x<answer> y </answer>z", "answer") == " y ");
  CHECK_FALSE(extract_single_tag("</answer><answer>", "answer").has_value());
  CHECK_FALSE(extract_single_tag("<answer>a</answer><answer>b</answer>", "answer").has_value());
  CHECK_FALSE(extract_single_tag("plain", "answer").has_value());
}
