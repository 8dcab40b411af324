#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "dynarag/config.hpp"
#include "dynarag/engine.hpp"
#include "dynarag/environment.hpp"
#include "dynarag/errors.hpp"
#include "dynarag/policy.hpp"
#include "dynarag/remote.hpp"
#include "dynarag/reward.hpp"
#include "dynarag/rl.hpp"
#include "dynarag/strings.hpp"

namespace {

using namespace dynarag;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;

struct CommonFlags {
  std::optional<std::string> config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> corpus;
  std::optional<std::string> tasks;
  std::optional<std::string> backend;
  std::optional<std::string> endpoint_url;
  std::optional<std::string> trace;
  std::optional<std::string> metrics_out;
  std::optional<std::string> weights_out;
  std::optional<std::string> replay;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_file, "config file (key = value lines)");
  cmd->add_option("--set", flags.overrides, "config override key=value (repeatable)");
  cmd->add_option("--seed", flags.seed, "master seed; component seeds derive from it");
  cmd->add_option("--corpus", flags.corpus, "corpus file (doc_id<TAB>text per line)");
  cmd->add_option("--tasks", flags.tasks, "task file (JSON lines)");
  cmd->add_option("--backend", flags.backend, "scripted | remote | toy");
  cmd->add_option("--endpoint-url", flags.endpoint_url, "chat-completion endpoint for remote");
  cmd->add_option("--trace", flags.trace, "write trajectory JSONL here");
  cmd->add_option("--metrics-out", flags.metrics_out, "metrics CSV path");
  cmd->add_option("--weights-out", flags.weights_out, "policy weights output path");
  cmd->add_option("--replay", flags.replay, "replay script for the scripted backend");
  cmd->add_option("--alpha", flags.alpha, "round-cost weight");
  cmd->add_option("--beta", flags.beta, "retrieval-cost weight");
  cmd->add_option("--jobs", flags.jobs, "concurrent rollouts");
}

RunConfig build_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (flags.config_file) cfg = RunConfig::from_file(*flags.config_file);
  for (const auto& kv : flags.overrides) cfg.apply_override(kv);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.corpus) cfg.corpus_path = *flags.corpus;
  if (flags.tasks) cfg.tasks_path = *flags.tasks;
  if (flags.backend) cfg.backend = *flags.backend;
  if (flags.endpoint_url) cfg.endpoint_url = *flags.endpoint_url;
  if (flags.trace) cfg.trace_path = *flags.trace;
  if (flags.metrics_out) cfg.metrics_out = *flags.metrics_out;
  if (flags.weights_out) cfg.weights_out = *flags.weights_out;
  if (flags.replay) cfg.replay_path = *flags.replay;
  if (flags.alpha) cfg.reward.alpha = *flags.alpha;
  if (flags.beta) cfg.reward.beta = *flags.beta;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path);
  out << content;
}

int cmd_infer(const CommonFlags& flags, const std::string& question,
              const std::string& weights_in, bool verbose) {
  RunConfig cfg = build_config(flags);
  if (trim(question).empty()) throw ConfigurationError("--question is required");
  if (cfg.corpus_path.empty()) throw ConfigurationError("--corpus is required");
  const Corpus corpus = load_corpus(cfg.corpus_path);

  OracleConfig oracle{cfg.env_noise_rate, cfg.seed};
  OracleBackend oracle_backend(oracle);
  std::optional<ReplayBackend> replay_backend;
  std::optional<RemoteChatBackend> remote_backend;
  std::optional<ToyPlannerBackend> toy_backend;
  ToyPlannerPolicy policy;
  ValueEstimator value;

  BackendSet backends;
  EngineOptions opts;
  opts.limits = cfg.limits;

  if (cfg.backend == "scripted") {
    if (!cfg.replay_path.empty()) {
      replay_backend = ReplayBackend::from_json_file(cfg.replay_path);
      backends.set_all(&*replay_backend);
    } else {
      backends.set_all(&oracle_backend);
    }
  } else if (cfg.backend == "remote") {
    RemoteConfig remote;
    remote.endpoint_url = cfg.endpoint_url;
    remote.verbose = verbose;
    remote_backend.emplace(remote);
    backends.set_all(&*remote_backend);
    opts.backend_failure_as_violation = false;  // surface transport failures
  } else if (cfg.backend == "toy") {
    if (!weights_in.empty()) load_weights(policy, value, weights_in);
    toy_backend.emplace(policy, cfg.seed, /*greedy=*/true);
    backends.set_all(&oracle_backend);
    backends.set(Role::Planner, &*toy_backend);
  } else {
    throw ConfigurationError("unknown backend: " + cfg.backend);
  }

  const TrajectoryResult result = run_inference(question, backends, corpus, opts);
  std::cout << result.final_answer << "\n";
  if (!cfg.trace_path.empty()) {
    write_file(cfg.trace_path, emit_trajectory(result));
  }
  return kExitOk;
}

struct GenCounts {
  int single = 0;
  int serial = 0;
  int parallel = 0;
  int eval_single = 0;
  int eval_serial = 0;
  int eval_parallel = 0;
  int entities = 48;
  int distractors = 2;
};

SyntheticWorld generate_split(std::uint64_t seed, const GenCounts& counts,
                              std::vector<SyntheticTask>& train_out,
                              std::vector<SyntheticTask>& eval_out) {
  GeneratorParams params;
  params.single = counts.single + counts.eval_single;
  params.serial = counts.serial + counts.eval_serial;
  params.parallel = counts.parallel + counts.eval_parallel;
  params.entities = counts.entities;
  params.distractors_per_entity = counts.distractors;
  SyntheticWorld world = generate_tasks(seed, params);

  int taken_single = 0, taken_serial = 0, taken_parallel = 0;
  for (const auto& task : world.tasks) {
    int* taken = nullptr;
    int quota = 0;
    switch (task.task_class) {
      case TaskClass::SingleHop: taken = &taken_single; quota = counts.single; break;
      case TaskClass::SerialTwoHop: taken = &taken_serial; quota = counts.serial; break;
      case TaskClass::ParallelTwoFact: taken = &taken_parallel; quota = counts.parallel; break;
    }
    if (*taken < quota) {
      train_out.push_back(task);
      ++*taken;
    } else {
      eval_out.push_back(task);
    }
  }
  return world;
}

int cmd_train(const CommonFlags& flags, const GenCounts& counts,
              const std::string& eval_tasks_path) {
  RunConfig cfg = build_config(flags);
  Corpus corpus;
  std::vector<SyntheticTask> train_tasks, eval_tasks;
  if (!cfg.tasks_path.empty()) {
    if (cfg.corpus_path.empty()) throw ConfigurationError("--corpus is required with --tasks");
    corpus = load_corpus(cfg.corpus_path);
    train_tasks = load_tasks(cfg.tasks_path);
    eval_tasks = eval_tasks_path.empty() ? train_tasks : load_tasks(eval_tasks_path);
  } else if (counts.single + counts.serial + counts.parallel > 0) {
    SyntheticWorld world = generate_split(cfg.seed, counts, train_tasks, eval_tasks);
    corpus = std::move(world.corpus);
    if (eval_tasks.empty()) eval_tasks = train_tasks;
  } else {
    throw ConfigurationError("provide --tasks or generator counts (--single/--serial/--parallel)");
  }

  const TrainReport report = train(corpus, train_tasks, eval_tasks, to_train_config(cfg));
  write_file(cfg.metrics_out, metrics_csv(report.rows));
  save_weights(report.policy, report.value, cfg.weights_out);

  const MetricsRow& last = report.rows.back();
  std::cout << "updates " << report.updates_run << "\n"
            << "f1 " << format_double(last.f1) << "\n"
            << "mean_rounds " << format_double(last.mean_rounds) << "\n"
            << "mean_retrievals " << format_double(last.mean_retrievals) << "\n"
            << "ds_ratio " << format_double(last.ds_ratio) << "\n"
            << "gold_rate " << format_double(last.gold_rate) << "\n";
  return kExitOk;
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  if (trim(csv).empty()) return out;
  for (const auto& part : split(csv, ',')) {
    const std::string token(trim(part));
    try {
      size_t consumed = 0;
      out.push_back(std::stod(token, &consumed));
      if (consumed != token.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigurationError("bad grid value: '" + token + "'");
    }
  }
  return out;
}

int cmd_sweep(const CommonFlags& flags, const GenCounts& counts, const std::string& alphas_csv,
              const std::string& betas_csv, const std::string& eval_tasks_path) {
  RunConfig cfg = build_config(flags);
  const std::vector<double> alphas = parse_grid(alphas_csv);
  const std::vector<double> betas = parse_grid(betas_csv);
  if (alphas.empty() || betas.empty()) throw ConfigurationError("sweep grid is empty");

  Corpus corpus;
  std::vector<SyntheticTask> train_tasks, eval_tasks;
  if (!cfg.tasks_path.empty()) {
    if (cfg.corpus_path.empty()) throw ConfigurationError("--corpus is required with --tasks");
    corpus = load_corpus(cfg.corpus_path);
    train_tasks = load_tasks(cfg.tasks_path);
    eval_tasks = eval_tasks_path.empty() ? train_tasks : load_tasks(eval_tasks_path);
  } else if (counts.single + counts.serial + counts.parallel > 0) {
    SyntheticWorld world = generate_split(cfg.seed, counts, train_tasks, eval_tasks);
    corpus = std::move(world.corpus);
    if (eval_tasks.empty()) eval_tasks = train_tasks;
  } else {
    throw ConfigurationError("provide --tasks or generator counts (--single/--serial/--parallel)");
  }

  std::ostringstream out;
  out << "alpha,beta,step,f1,mean_rounds,mean_retrievals,ds_ratio";
  for (int a = 0; a < kNumPlannerActions; ++a) out << ',' << menu_action_name(a);
  out << ",gold_rate\n";

  bool any_failed = false;
  for (double alpha : alphas) {
    for (double beta : betas) {
      TrainConfig tc = to_train_config(cfg);
      tc.reward.alpha = alpha;
      tc.reward.beta = beta;
      try {
        const TrainReport report = train(corpus, train_tasks, eval_tasks, tc);
        for (const auto& row : report.rows) {
          out << format_double(alpha) << ',' << format_double(beta) << ',' << row.step << ','
              << format_double(row.f1) << ',' << format_double(row.mean_rounds) << ','
              << format_double(row.mean_retrievals) << ',' << format_double(row.ds_ratio);
          for (int a = 0; a < kNumPlannerActions; ++a) {
            out << ',' << format_double(row.fractions[a]);
          }
          out << ',' << format_double(row.gold_rate) << '\n';
        }
      } catch (const std::exception& e) {
        any_failed = true;
        std::cerr << "sweep point alpha=" << alpha << " beta=" << beta << " failed: " << e.what()
                  << "\n";
      }
    }
  }
  write_file(cfg.metrics_out, out.str());
  return any_failed ? kExitPartial : kExitOk;
}

int cmd_gen(std::uint64_t seed, const GenCounts& counts, const std::string& corpus_out,
            const std::string& tasks_out, const std::string& eval_out) {
  if (corpus_out.empty() || tasks_out.empty()) {
    throw ConfigurationError("--corpus-out and --tasks-out are required");
  }
  std::vector<SyntheticTask> train_tasks, eval_tasks;
  SyntheticWorld world = generate_split(seed, counts, train_tasks, eval_tasks);
  save_corpus(world.corpus, corpus_out);
  save_tasks(train_tasks, tasks_out);
  if (!eval_out.empty()) save_tasks(eval_tasks, eval_out);
  std::cout << "documents " << world.corpus.size() << "\n"
            << "train_tasks " << train_tasks.size() << "\n"
            << "eval_tasks " << eval_tasks.size() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic agentic RAG: plan/execute inference engine and desk-scale PPO trainer"};
  app.require_subcommand(1);

  CommonFlags infer_flags, train_flags, sweep_flags;
  std::string question, weights_in;
  bool verbose = false;
  GenCounts train_counts, sweep_counts, gen_counts;
  std::string eval_tasks_path, sweep_eval_tasks_path;
  std::string alphas_csv, betas_csv = "0";
  std::uint64_t gen_seed = 0;
  std::string corpus_out, tasks_out, eval_out;

  CLI::App* infer = app.add_subcommand("infer", "answer one question");
  add_common(infer, infer_flags);
  infer->add_option("--question", question, "the question to answer");
  infer->add_option("--weights", weights_in, "policy weights for the toy backend");
  infer->add_flag("--verbose", verbose, "debug logging (remote bodies, token redacted)");

  auto add_gen_counts = [](CLI::App* cmd, GenCounts& c, bool with_eval) {
    cmd->add_option("--single", c.single, "single-hop task count");
    cmd->add_option("--serial", c.serial, "serial two-hop task count");
    cmd->add_option("--parallel", c.parallel, "parallel two-fact task count");
    cmd->add_option("--entities", c.entities, "minimum entity pool size");
    cmd->add_option("--distractors", c.distractors, "distractor documents per entity (0-2)");
    if (with_eval) {
      cmd->add_option("--eval-single", c.eval_single, "held-out single-hop count");
      cmd->add_option("--eval-serial", c.eval_serial, "held-out serial count");
      cmd->add_option("--eval-parallel", c.eval_parallel, "held-out parallel count");
    }
  };

  CLI::App* train_cmd = app.add_subcommand("train", "PPO training over the synthetic mix");
  add_common(train_cmd, train_flags);
  add_gen_counts(train_cmd, train_counts, true);
  train_cmd->add_option("--eval-tasks", eval_tasks_path, "held-out task file");

  CLI::App* sweep = app.add_subcommand("sweep", "one training run per (alpha, beta) grid point");
  add_common(sweep, sweep_flags);
  add_gen_counts(sweep, sweep_counts, true);
  sweep->add_option("--alphas", alphas_csv, "comma-separated alpha grid");
  sweep->add_option("--betas", betas_csv, "comma-separated beta grid");
  sweep->add_option("--eval-tasks", sweep_eval_tasks_path, "held-out task file");

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic corpus and task files");
  gen->add_option("--seed", gen_seed, "generator seed");
  add_gen_counts(gen, gen_counts, true);
  gen->add_option("--corpus-out", corpus_out, "corpus output path");
  gen->add_option("--tasks-out", tasks_out, "task file output path");
  gen->add_option("--eval-out", eval_out, "held-out task file output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (infer->parsed()) return cmd_infer(infer_flags, question, weights_in, verbose);
    if (train_cmd->parsed()) return cmd_train(train_flags, train_counts, eval_tasks_path);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_flags, sweep_counts, alphas_csv, betas_csv, sweep_eval_tasks_path);
    }
    if (gen->parsed()) return cmd_gen(gen_seed, gen_counts, corpus_out, tasks_out, eval_out);
  } catch (const dynarag::BackendUnavailable& e) {
    std::cerr << "backend failure: " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
