#pragma once

#include <Eigen/Dense>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>

#include "dynarag/environment.hpp"
#include "dynarag/trace.hpp"

namespace dynarag {

constexpr int kFeatureDim = 256;

/// Hashed bag of words: lowercase whitespace tokens into 256 bins, counts
/// L2-normalized. Blank text maps to the zero vector.
Eigen::VectorXd featurize(std::string_view query);

struct ActionSample {
  std::string text;
  std::optional<double> log_prob;     // present for trainable backends
  std::optional<int> action_index;    // toy planner's categorical choice
};

/// Role-conditioned action source. Scripted and remote backends are
/// stateless per call; the toy backend's parameters change only through
/// gradient application.
class PolicyBackend {
 public:
  virtual ~PolicyBackend() = default;
  virtual ActionSample act(Role role, const Observation& obs) = 0;
};

/// Linear softmax policy over the eight-plan menu, featurized from the
/// target query. Reads may run concurrently; weight updates need exclusive
/// access.
class ToyPlannerPolicy {
 public:
  ToyPlannerPolicy();

  /// Action probabilities; sums to one and every entry is strictly positive
  /// within the active menu. With solve_only the decompose actions carry
  /// exactly zero mass.
  Eigen::VectorXd distribution(const Eigen::VectorXd& features, bool solve_only = false) const;

  /// Exact categorical log-probability, consistent with distribution().
  /// Throws IndexOutOfRange outside [0, kNumPlannerActions).
  double log_prob_of(const Eigen::VectorXd& features, int action_index,
                     bool solve_only = false) const;

  int sample(const Eigen::VectorXd& features, std::mt19937_64& rng, bool solve_only = false) const;
  int argmax(const Eigen::VectorXd& features, bool solve_only = false) const;

  Eigen::MatrixXd& weights() { return theta_; }
  const Eigen::MatrixXd& weights() const { return theta_; }
  double temperature() const { return temperature_; }
  void set_temperature(double t);

 private:
  Eigen::VectorXd logits(const Eigen::VectorXd& features, bool solve_only) const;

  Eigen::MatrixXd theta_;  // kFeatureDim x kNumPlannerActions
  double temperature_ = 1.0;
};

/// Linear state-value head over the same query features.
class ValueEstimator {
 public:
  ValueEstimator();
  double value(const Eigen::VectorXd& features) const;
  Eigen::VectorXd& weights() { return phi_; }
  const Eigen::VectorXd& weights() const { return phi_; }

 private:
  Eigen::VectorXd phi_;
};

/// Planner backend that samples (or argmaxes) the toy policy. Planner only;
/// any other role throws UnsupportedRole.
class ToyPlannerBackend : public PolicyBackend {
 public:
  ToyPlannerBackend(const ToyPlannerPolicy& policy, std::uint64_t seed, bool greedy = false);
  ActionSample act(Role role, const Observation& obs) override;

 private:
  const ToyPlannerPolicy* policy_;
  std::mt19937_64 rng_;
  bool greedy_;
};

/// Fixture-driven backend: one output queue per role, consumed in order.
/// Used to replay recorded multi-round traces deterministically.
class ReplayBackend : public PolicyBackend {
 public:
  void push(Role role, std::string output);
  ActionSample act(Role role, const Observation& obs) override;
  static ReplayBackend from_json_file(const std::string& path);
  static ReplayBackend from_json(std::string_view json_text);

 private:
  std::map<Role, std::deque<std::string>> queues_;
};

/// Scripted oracle backend over the synthetic world's grammar.
class OracleBackend : public PolicyBackend {
 public:
  explicit OracleBackend(OracleConfig cfg = {});
  ActionSample act(Role role, const Observation& obs) override;

 private:
  OracleConfig cfg_;
};

/// Versioned binary weights file: magic, format version byte, dimensions,
/// temperature, policy matrix, value vector.
void save_weights(const ToyPlannerPolicy& policy, const ValueEstimator& value,
                  const std::string& path);
void load_weights(ToyPlannerPolicy& policy, ValueEstimator& value, const std::string& path);

}  // namespace dynarag
