#include "dynarag/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dynarag/errors.hpp"
#include "dynarag/strings.hpp"

namespace dynarag {

namespace {

struct KeyBinding {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t consumed = 0;
    const int v = std::stoi(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigurationError("key " + key + " expects an integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    size_t consumed = 0;
    const double v = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigurationError("key " + key + " expects a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigurationError("key " + key + " expects true/false, got '" + value + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t consumed = 0;
    const unsigned long long v = std::stoull(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigurationError("key " + key + " expects an unsigned integer, got '" + value + "'");
  }
}

#define STR_KEY(name, field)                                          \
  {name,                                                              \
   {[](RunConfig& c, const std::string& v) { c.field = v; },          \
    [](const RunConfig& c) { return c.field; }}}
#define INT_KEY(name, field)                                                      \
  {name,                                                                          \
   {[](RunConfig& c, const std::string& v) { c.field = parse_int(name, v); },     \
    [](const RunConfig& c) { return std::to_string(c.field); }}}
#define REAL_KEY(name, field)                                                     \
  {name,                                                                          \
   {[](RunConfig& c, const std::string& v) { c.field = parse_real(name, v); },    \
    [](const RunConfig& c) { return format_double(c.field); }}}
#define BOOL_KEY(name, field)                                                     \
  {name,                                                                          \
   {[](RunConfig& c, const std::string& v) { c.field = parse_bool(name, v); },    \
    [](const RunConfig& c) { return c.field ? std::string("true") : std::string("false"); }}}

const std::map<std::string, KeyBinding>& bindings() {
  static const std::map<std::string, KeyBinding> table = {
      {"seed",
       {[](RunConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
      INT_KEY("jobs", jobs),
      STR_KEY("corpus", corpus_path),
      STR_KEY("tasks", tasks_path),
      STR_KEY("backend", backend),
      STR_KEY("endpoint_url", endpoint_url),
      STR_KEY("trace", trace_path),
      STR_KEY("metrics_out", metrics_out),
      STR_KEY("weights_out", weights_out),
      STR_KEY("replay", replay_path),
      REAL_KEY("reward.alpha", reward.alpha),
      REAL_KEY("reward.beta", reward.beta),
      INT_KEY("reward.max_rounds_norm", reward.max_rounds_norm),
      INT_KEY("reward.max_retrievals_norm", reward.max_retrievals_norm),
      REAL_KEY("rl.gamma", adv.gamma),
      REAL_KEY("rl.lambda", adv.lambda),
      REAL_KEY("rl.clip_eps", ppo.clip_eps),
      INT_KEY("rl.epochs", ppo.epochs),
      INT_KEY("rl.minibatch", ppo.minibatch),
      REAL_KEY("rl.lr", ppo.learning_rate),
      REAL_KEY("rl.entropy_coef", ppo.entropy_coef),
      REAL_KEY("rl.value_coef", ppo.value_coef),
      BOOL_KEY("rl.adv_norm", ppo.adv_norm),
      INT_KEY("engine.max_rounds", limits.max_rounds),
      INT_KEY("engine.max_depth", limits.max_depth),
      INT_KEY("engine.max_retrievals", limits.max_retrievals),
      INT_KEY("engine.retrieval_k", limits.retrieval_k),
      REAL_KEY("env.noise_rate", env_noise_rate),
      INT_KEY("train.updates", train_updates),
      INT_KEY("train.batch", train_batch),
      INT_KEY("train.eval_interval", train_eval_interval),
  };
  return table;
}

#undef STR_KEY
#undef INT_KEY
#undef REAL_KEY
#undef BOOL_KEY

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = bindings().find(key);
  if (it == bindings().end()) throw ConfigurationError("unknown config key: " + key);
  it->second.set(*this, value);
}

std::string RunConfig::get(const std::string& key) const {
  const auto it = bindings().find(key);
  if (it == bindings().end()) throw ConfigurationError("unknown config key: " + key);
  return it->second.get(*this);
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, binding] : bindings()) out.push_back(name);
    return out;
  }();
  return names;
}

std::string RunConfig::dump() const {
  std::ostringstream out;
  for (const auto& key : keys()) {
    out << key << " = " << get(key) << '\n';
  }
  return out.str();
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigurationError("config line " + std::to_string(line_number) +
                               " is not 'key = value'");
    }
    cfg.set(std::string(trim(stripped.substr(0, eq))),
            std::string(trim(stripped.substr(eq + 1))));
  }
  return cfg;
}

void RunConfig::apply_override(const std::string& key_equals_value) {
  const size_t eq = key_equals_value.find('=');
  if (eq == std::string::npos) {
    throw ConfigurationError("--set expects key=value, got '" + key_equals_value + "'");
  }
  set(std::string(trim(std::string_view(key_equals_value).substr(0, eq))),
      std::string(trim(std::string_view(key_equals_value).substr(eq + 1))));
}

TrainConfig to_train_config(const RunConfig& cfg) {
  TrainConfig out;
  out.reward = cfg.reward;
  out.adv = cfg.adv;
  out.ppo = cfg.ppo;
  out.limits = cfg.limits;
  out.oracle.noise_rate = cfg.env_noise_rate;
  out.oracle.seed = cfg.seed;
  out.updates = cfg.train_updates;
  out.batch_size = cfg.train_batch;
  out.eval_interval = cfg.train_eval_interval;
  out.jobs = cfg.jobs;
  out.seed = cfg.seed;
  return out;
}

}  // namespace dynarag
