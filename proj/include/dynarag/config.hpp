#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynarag/engine.hpp"
#include "dynarag/remote.hpp"
#include "dynarag/reward.hpp"
#include "dynarag/rl.hpp"

namespace dynarag {

/// Flat key-value run configuration. Every key has a default; unknown keys
/// fail fast. File format: one "key = value" per line, '#' comments.
/// Overrides the CLI applies through --set and flags win over file values.
struct RunConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string corpus_path;
  std::string tasks_path;
  std::string backend = "scripted";  // scripted | remote | toy
  std::string endpoint_url;
  std::string trace_path;
  std::string metrics_out = "metrics.csv";
  std::string weights_out = "weights.bin";
  std::string replay_path;

  RewardConfig reward;
  AdvantageConfig adv;
  PpoConfig ppo;
  EngineLimits limits;
  double env_noise_rate = 0.0;
  int train_updates = 400;
  int train_batch = 16;
  int train_eval_interval = 25;

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  /// Effective config as a file that reproduces this object when loaded.
  std::string dump() const;

  static RunConfig from_file(const std::string& path);
  void apply_override(const std::string& key_equals_value);  // "key=value"
};

TrainConfig to_train_config(const RunConfig& cfg);

}  // namespace dynarag
