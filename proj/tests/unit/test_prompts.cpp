#include <doctest.h>

#include <fstream>
#include <sstream>

#include "dynarag/prompts.hpp"
#include "dynarag/errors.hpp"

using namespace dynarag;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Observation obs_for(Role role, std::string query) {
  Observation obs;
  obs.role = role;
  obs.target_query = std::move(query);
  obs.effective_query = obs.target_query;
  return obs;
}

}  // namespace

TEST_CASE("templates byte-match the golden fixtures") {
  const std::pair<Role, const char*> fixtures[] = {
      {Role::Planner, "planner.txt"},
      {Role::QR, "query_rewrite.txt"},
      {Role::QDP, "decompose_parallel.txt"},
      {Role::QDS, "decompose_serial.txt"},
      {Role::DS, "document_selection.txt"},
      {Role::AG, "answer_generation.txt"},
      {Role::AS, "answer_summarization.txt"},
  };
  for (const auto& [role, file] : fixtures) {
    const std::string golden = read_file(std::string(FIXTURES_DIR) + "/prompts/" + file);
    CHECK(std::string(prompt_template(role)) == golden);
  }
  CHECK_THROWS_AS(prompt_template(Role::RA), UnsupportedRole);
}

TEST_CASE("document selection prompt indexes candidates from zero") {
  Observation obs = obs_for(Role::DS, "when did canada become fully independent from britain?");
  obs.documents = {{10, "first text"}, {4, "second text"}, {7, "third text"}};
  const std::string prompt = render_prompt(Role::DS, obs);
  CHECK(prompt.find("strictly inside <id>...</id> tags") != std::string::npos);
  CHECK(prompt.find("IDs (0, 1, ..., 2)") != std::string::npos);
  CHECK(prompt.find("Document0: first text\nDocument1: second text\nDocument2: third text") !=
        std::string::npos);
  CHECK(prompt.find("{") == std::string::npos);  // nothing left unfilled
}

TEST_CASE("summarization prompt carries every resolved pair") {
  Observation obs = obs_for(
      Role::AS, "Something's Gotta Give was first performed by an actor of what heritage?");
  obs.resolved_pairs = {
      {"Who is the actor that first performed Something's Gotta Give?", "Fred Astaire"},
      {"What is the heritage of this actor?", "American"},
  };
  const std::string prompt = render_prompt(Role::AS, obs);
  CHECK(prompt.find("Fred Astaire") != std::string::npos);
  CHECK(prompt.find("American") != std::string::npos);
  CHECK(prompt.find("answer the Original Question based on the observations") !=
        std::string::npos);
  CHECK(prompt.find("Sub-question 2: What is the heritage of this actor?") != std::string::npos);
}

TEST_CASE("render failures") {
  CHECK_THROWS_AS(render_prompt(Role::QR, obs_for(Role::QR, "")), UnfilledPlaceholder);
  CHECK_THROWS_AS(render_prompt(Role::QR, obs_for(Role::QR, "  ")), UnfilledPlaceholder);
  CHECK_THROWS_AS(render_prompt(Role::DS, obs_for(Role::QR, "q")), InvalidParams);
}

TEST_CASE("closed-book generation renders with no documents") {
  const std::string prompt = render_prompt(Role::AG, obs_for(Role::AG, "Who directed X?"));
  CHECK(prompt.find("provide a brief and accurate answer") != std::string::npos);
  CHECK(prompt.find("Document0") == std::string::npos);
}

TEST_CASE("rendering is deterministic") {
  Observation obs = obs_for(Role::Planner, "Who directed The Silent Harbor?");
  CHECK(render_prompt(Role::Planner, obs) == render_prompt(Role::Planner, obs));
}
