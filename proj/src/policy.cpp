#include "dynarag/policy.hpp"

#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "dynarag/errors.hpp"
#include "dynarag/math.hpp"
#include "dynarag/prompts.hpp"
#include "dynarag/strings.hpp"
#include "dynarag/workflow.hpp"

namespace dynarag {

Eigen::VectorXd featurize(std::string_view query) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kFeatureDim);
  for (const auto& token : whitespace_tokens(query)) {
    const std::string lowered = to_lower(token);
    v[fnv1a(lowered) % kFeatureDim] += 1.0;
  }
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

ToyPlannerPolicy::ToyPlannerPolicy()
    : theta_(Eigen::MatrixXd::Zero(kFeatureDim, kNumPlannerActions)) {}

void ToyPlannerPolicy::set_temperature(double t) {
  if (t <= 0.0) throw InvalidParams("temperature must be positive");
  temperature_ = t;
}

Eigen::VectorXd ToyPlannerPolicy::logits(const Eigen::VectorXd& features,
                                         bool /*solve_only*/) const {
  return theta_.transpose() * features / temperature_;
}

Eigen::VectorXd ToyPlannerPolicy::distribution(const Eigen::VectorXd& features,
                                               bool solve_only) const {
  const Eigen::VectorXd z = logits(features, solve_only);
  const int active = solve_only ? kNumSolveActions : kNumPlannerActions;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(kNumPlannerActions);
  p.head(active) = softmax(z.head(active));
  return p;
}

double ToyPlannerPolicy::log_prob_of(const Eigen::VectorXd& features, int action_index,
                                     bool solve_only) const {
  if (action_index < 0 || action_index >= kNumPlannerActions) {
    throw IndexOutOfRange("action index " + std::to_string(action_index));
  }
  const int active = solve_only ? kNumSolveActions : kNumPlannerActions;
  if (action_index >= active) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd z = logits(features, solve_only);
  return z[action_index] - log_sum_exp(z.head(active));
}

int ToyPlannerPolicy::sample(const Eigen::VectorXd& features, std::mt19937_64& rng,
                             bool solve_only) const {
  const Eigen::VectorXd p = distribution(features, solve_only);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (int a = 0; a < kNumPlannerActions; ++a) {
    acc += p[a];
    if (u < acc) return a;
  }
  return solve_only ? kNumSolveActions - 1 : kNumPlannerActions - 1;
}

int ToyPlannerPolicy::argmax(const Eigen::VectorXd& features, bool solve_only) const {
  const Eigen::VectorXd p = distribution(features, solve_only);
  int best = 0;
  for (int a = 1; a < kNumPlannerActions; ++a) {
    if (p[a] > p[best]) best = a;
  }
  return best;
}

ValueEstimator::ValueEstimator() : phi_(Eigen::VectorXd::Zero(kFeatureDim)) {}

double ValueEstimator::value(const Eigen::VectorXd& features) const {
  return phi_.dot(features);
}

ToyPlannerBackend::ToyPlannerBackend(const ToyPlannerPolicy& policy, std::uint64_t seed,
                                     bool greedy)
    : policy_(&policy), rng_(seed), greedy_(greedy) {}

ActionSample ToyPlannerBackend::act(Role role, const Observation& obs) {
  if (role != Role::Planner) {
    throw UnsupportedRole("toy policy plans only; executors are scripted");
  }
  const Eigen::VectorXd features = featurize(obs.target_query);
  const bool solve_only = obs.solve_only_menu;
  const int index = greedy_ ? policy_->argmax(features, solve_only)
                            : policy_->sample(features, rng_, solve_only);
  ActionSample sample;
  sample.action_index = index;
  sample.log_prob = policy_->log_prob_of(features, index, solve_only);
  sample.text = encode(planner_menu()[index]);
  return sample;
}

void ReplayBackend::push(Role role, std::string output) {
  queues_[role].push_back(std::move(output));
}

ActionSample ReplayBackend::act(Role role, const Observation&) {
  auto it = queues_.find(role);
  if (it == queues_.end() || it->second.empty()) {
    throw ConfigurationError(std::string("replay queue exhausted for role ") + role_name(role));
  }
  ActionSample sample;
  sample.text = std::move(it->second.front());
  it->second.pop_front();
  return sample;
}

ReplayBackend ReplayBackend::from_json(std::string_view json_text) {
  ReplayBackend backend;
  const auto j = nlohmann::json::parse(json_text);
  for (const auto& [key, outputs] : j.items()) {
    const auto role = role_from_name(key);
    if (!role) throw ConfigurationError("unknown role in replay script: " + key);
    for (const auto& entry : outputs) {
      backend.push(*role, entry.get<std::string>());
    }
  }
  return backend;
}

ReplayBackend ReplayBackend::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open replay script: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

OracleBackend::OracleBackend(OracleConfig cfg) : cfg_(cfg) {}

ActionSample OracleBackend::act(Role role, const Observation& obs) {
  ActionSample sample;
  sample.text = role == Role::Planner ? scripted_planner(obs, cfg_)
                                      : scripted_executor(role, obs, cfg_);
  return sample;
}

// ---------------------------------------------------------------------------
// Weights file
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'D', 'R', 'P', 'W'};
constexpr std::uint8_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ConfigurationError("weights file truncated");
}

}  // namespace

void save_weights(const ToyPlannerPolicy& policy, const ValueEstimator& value,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write weights file: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<std::uint32_t>(policy.weights().rows()));
  write_pod(out, static_cast<std::uint32_t>(policy.weights().cols()));
  write_pod(out, policy.temperature());
  for (Eigen::Index r = 0; r < policy.weights().rows(); ++r) {
    for (Eigen::Index c = 0; c < policy.weights().cols(); ++c) {
      write_pod(out, policy.weights()(r, c));
    }
  }
  write_pod(out, static_cast<std::uint32_t>(value.weights().size()));
  for (Eigen::Index i = 0; i < value.weights().size(); ++i) {
    write_pod(out, value.weights()[i]);
  }
}

void load_weights(ToyPlannerPolicy& policy, ValueEstimator& value, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open weights file: " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ConfigurationError("not a weights file: " + path);
  }
  std::uint8_t version = 0;
  read_pod(in, version);
  if (version != kFormatVersion) {
    throw ConfigurationError("unsupported weights format version " + std::to_string(version));
  }
  std::uint32_t rows = 0, cols = 0;
  read_pod(in, rows);
  read_pod(in, cols);
  if (rows != kFeatureDim || cols != kNumPlannerActions) {
    throw ConfigurationError("weights file has unexpected dimensions");
  }
  double temperature = 1.0;
  read_pod(in, temperature);
  policy.set_temperature(temperature);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      read_pod(in, policy.weights()(r, c));
    }
  }
  std::uint32_t vdim = 0;
  read_pod(in, vdim);
  if (vdim != kFeatureDim) throw ConfigurationError("value head has unexpected dimension");
  for (std::uint32_t i = 0; i < vdim; ++i) read_pod(in, value.weights()[i]);
}

}  // namespace dynarag
