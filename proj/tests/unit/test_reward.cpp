#include <doctest.h>

#include <random>

#include "dynarag/reward.hpp"

using namespace dynarag;

namespace {

TrajectoryResult make_trajectory(const std::vector<bool>& violations, std::string final_answer,
                                 int rounds, int retrievals) {
  TrajectoryResult t;
  t.final_answer = std::move(final_answer);
  t.rounds_used = rounds;
  t.retrievals_used = retrievals;
  for (size_t i = 0; i < violations.size(); ++i) {
    StepRecord s;
    s.t = 1;
    s.k = static_cast<int>(i);
    s.role = i == 0 ? Role::Planner : Role::AG;
    s.format_violation = violations[i];
    t.steps.push_back(std::move(s));
  }
  return t;
}

}  // namespace

TEST_CASE("token_f1 fixtures") {
  CHECK(token_f1("1982", "1982") == doctest::Approx(1.0));
  CHECK(token_f1("Barack Obama", "Obama") == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
  CHECK(token_f1("", "x") == 0.0);
  CHECK(token_f1("x", "") == 0.0);
  CHECK(token_f1("", "") == 1.0);
  CHECK(token_f1("the", "a") == 1.0);  // both normalize to nothing
  CHECK(token_f1("The Answer!", "answer") == doctest::Approx(1.0));
  CHECK(token_f1("I don't know", "Valdoria") == 0.0);
}

TEST_CASE("normalization drops case, punctuation and articles") {
  CHECK(normalize_answer_tokens("The  Quick, Brown fox!") ==
        std::vector<std::string>{"quick", "brown", "fox"});
  CHECK(normalize_answer_tokens("don't") == std::vector<std::string>{"dont"});

  std::mt19937_64 rng(11);
  const std::vector<std::string> words = {"alpha", "BETA", "gamma", "1982", "delta"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string a, variant;
    for (int i = 0; i < 4; ++i) {
      const auto& w = words[rng() % words.size()];
      a += w + " ";
      variant += "the " + w + (rng() % 2 ? "," : "!") + "  ";
    }
    // case/punctuation/article variants of one side do not change the score
    CHECK(token_f1(a, "alpha gamma") == doctest::Approx(token_f1(variant, "alpha gamma")));
  }
}

TEST_CASE("token_f1 uses bag counts, not sets") {
  // prediction repeats a token; precision must pay for the duplicate
  CHECK(token_f1("obama obama", "obama") == doctest::Approx(2.0 * 0.5 / 1.5));
}

TEST_CASE("cost_penalty") {
  RewardConfig cfg;
  cfg.alpha = 0.1;
  cfg.beta = 0.1;
  CHECK(cost_penalty(3, 3, cfg) == doctest::Approx(0.2));
  CHECK(cost_penalty(7, 9, cfg) == doctest::Approx(0.2));  // clamped at the normalizers

  cfg.alpha = 0.0;
  cfg.beta = 0.0;
  CHECK(cost_penalty(3, 3, cfg) == 0.0);
  CHECK(cost_penalty(1, 0, cfg) == 0.0);

  cfg.alpha = 0.1;
  CHECK(cost_penalty(1, 0, cfg) == doctest::Approx(0.1 / 3.0));

  cfg.max_rounds_norm = 0;
  CHECK_THROWS_AS(cost_penalty(1, 0, cfg), InvalidParams);
}

TEST_CASE("format_penalty is -1 on violation for any role") {
  StepRecord clean;
  CHECK(format_penalty(clean) == 0.0);
  StepRecord planner;
  planner.role = Role::Planner;
  planner.format_violation = true;
  CHECK(format_penalty(planner) == -1.0);
  StepRecord selector;
  selector.role = Role::DS;
  selector.format_violation = true;
  CHECK(format_penalty(selector) == -1.0);
}

TEST_CASE("assign_step_rewards") {
  RewardConfig zero_cost;

  SUBCASE("single clean terminal step") {
    // f1 0.8: prediction shares 2 of 3 gold tokens at precision 1
    auto t = make_trajectory({false}, "alpha beta", 1, 0);
    const RewardBreakdown r = assign_step_rewards(t, "alpha beta gamma", zero_cost);
    CHECK(r.r_perf == doctest::Approx(0.8));
    CHECK(r.per_step.size() == 1);
    CHECK(r.per_step[0] == doctest::Approx(0.8));
  }

  SUBCASE("violation mid-trajectory") {
    RewardConfig cfg;
    cfg.alpha = 0.5;  // rounds at the cap cost exactly 0.5
    auto t = make_trajectory({false, true, false}, "same", 3, 0);
    const RewardBreakdown r = assign_step_rewards(t, "same", cfg);
    CHECK(r.r_global == doctest::Approx(0.5));
    REQUIRE(r.per_step.size() == 3);
    CHECK(r.per_step[0] == 0.0);
    CHECK(r.per_step[1] == -1.0);
    CHECK(r.per_step[2] == doctest::Approx(0.5));
  }

  SUBCASE("violation at the terminal step adds to the global reward") {
    RewardConfig cfg;
    cfg.alpha = 0.5;
    auto t = make_trajectory({false, false, true}, "same", 3, 0);
    const RewardBreakdown r = assign_step_rewards(t, "same", cfg);
    CHECK(r.per_step.back() == doctest::Approx(-0.5));
  }

  SUBCASE("empty trajectory") {
    TrajectoryResult t;
    CHECK_THROWS_AS(assign_step_rewards(t, "gold", zero_cost), EmptyTrajectory);
  }
}

TEST_CASE("reward decomposition identities on random trajectories") {
  std::mt19937_64 rng(31);
  const std::vector<std::string> vocab = {"red", "blue", "green", "1982", "harbor"};
  for (int trial = 0; trial < 300; ++trial) {
    RewardConfig cfg;
    cfg.alpha = static_cast<double>(rng() % 100) / 100.0;
    cfg.beta = static_cast<double>(rng() % 100) / 100.0;
    std::vector<bool> violations;
    const int steps = 1 + static_cast<int>(rng() % 10);
    int violation_count = 0;
    for (int i = 0; i < steps; ++i) {
      const bool v = rng() % 4 == 0;
      violations.push_back(v);
      violation_count += v ? 1 : 0;
    }
    std::string answer = vocab[rng() % vocab.size()] + " " + vocab[rng() % vocab.size()];
    std::string gold = vocab[rng() % vocab.size()];
    auto t = make_trajectory(violations, answer, 1 + static_cast<int>(rng() % 5),
                             static_cast<int>(rng() % 5));
    const RewardBreakdown r = assign_step_rewards(t, gold, cfg);

    CHECK(r.r_global == r.r_perf - r.r_cost);  // exact, not approximate
    double sum = 0.0;
    for (double x : r.per_step) sum += x;
    CHECK(sum == doctest::Approx(r.r_global - violation_count).epsilon(1e-12));

    // terminal-only coupling: blanking the answer moves only the last step
    auto blanked = t;
    blanked.final_answer = "";
    const RewardBreakdown rb = assign_step_rewards(blanked, gold, cfg);
    for (size_t i = 0; i + 1 < r.per_step.size(); ++i) CHECK(r.per_step[i] == rb.per_step[i]);

    // monotonicity: more rounds or retrievals never increase the reward
    auto costlier = t;
    costlier.rounds_used += 1;
    costlier.retrievals_used += 2;
    CHECK(assign_step_rewards(costlier, gold, cfg).r_global <= r.r_global + 1e-15);
  }
}
