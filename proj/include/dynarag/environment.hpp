#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dynarag/document.hpp"
#include "dynarag/trace.hpp"

namespace dynarag {

/// Document collection with an inverted index over lowercased word tokens.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs);

  const std::vector<Document>& documents() const { return documents_; }
  size_t size() const { return documents_.size(); }

  struct Posting {
    int doc_index;  // position in documents(), not doc_id
    int term_count;
  };
  const std::unordered_map<std::string, std::vector<Posting>>& index() const { return index_; }
  double doc_norm(int doc_index) const { return doc_norms_[doc_index]; }
  double idf(const std::string& token) const;

  void rebuild_index();

 private:
  std::vector<Document> documents_;
  std::unordered_map<std::string, std::vector<Posting>> index_;
  std::vector<double> doc_norms_;
};

/// Top-k documents by tf-idf cosine similarity, descending; equal scores
/// break toward the lower doc_id so the order is total. Fewer than k come
/// back when the corpus is smaller. Throws EmptyCorpus on an empty corpus.
std::vector<Document> lexical_retrieve(const Corpus& corpus, std::string_view query, int k);

/// Corpus file format: UTF-8 text, one "doc_id<TAB>text" record per line.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

enum class TaskClass { SingleHop, SerialTwoHop, ParallelTwoFact };
enum class PlanClass { SolveDirect, QDS, QDP };

const char* task_class_name(TaskClass c);
const char* plan_class_name(PlanClass c);
std::optional<TaskClass> task_class_from_name(std::string_view name);
std::optional<PlanClass> plan_class_from_name(std::string_view name);

/// The plan class a task's structure calls for. Fixed mapping:
/// SingleHop -> SolveDirect, SerialTwoHop -> QDS, ParallelTwoFact -> QDP.
PlanClass gold_plan_class_for(TaskClass c);

struct SyntheticTask {
  std::string question;
  std::string gold_answer;
  TaskClass task_class = TaskClass::SingleHop;
  PlanClass gold_plan_class = PlanClass::SolveDirect;
  std::vector<int> supporting_fact_ids;  // doc_ids of the facts that answer it
};

struct GeneratorParams {
  int single = 0;
  int serial = 0;
  int parallel = 0;
  int entities = 48;               // lower bound; scaled up to fit the task counts
  int distractors_per_entity = 2;  // 0..2 side-fact documents per entity
  int retrieval_k = 5;             // used by the construction checks
};

struct SyntheticWorld {
  Corpus corpus;
  std::vector<SyntheticTask> tasks;
};

/// Builds an entity-relation world (people direct works, people are born in
/// countries), renders one document per fact plus distractors, and phrases
/// one question per task:
///   SingleHop        "Who directed {W}?" / "Where was {P} born?"
///   SerialTwoHop     "Where was the director of {W} born?" with a pronominal
///                    gold decomposition, so coreference rewriting is load
///                    bearing rather than decorative
///   ParallelTwoFact  "Who directed {W} and where was {P} born?"
/// Construction is deterministic in the seed, every supporting fact is
/// retrievable from its canonical sub-question, and for at least half of the
/// serial tasks top-k retrieval on the raw composite question misses one of
/// the two supporting facts.
SyntheticWorld generate_tasks(std::uint64_t seed, const GeneratorParams& params);

/// Task file format: JSON lines, one record per task.
std::vector<SyntheticTask> load_tasks(const std::string& path);
void save_tasks(const std::vector<SyntheticTask>& tasks, const std::string& path);

struct OracleConfig {
  double noise_rate = 0.0;  // probability of a corrupted (format-breaking) output
  std::uint64_t seed = 0;
};

/// Deterministic executor oracle over the synthetic world's sentence grammar.
/// At noise 0 it emits the correct tagged output; with probability noise_rate
/// it emits a corrupted output (dropped or unclosed tag, wrong entity) chosen
/// by seeded, call-local randomness. Roles: QR, QDS, QDP, DS, AG, AS.
std::string scripted_executor(Role role, const Observation& obs, const OracleConfig& oracle);

/// Planner oracle: QDS for serial composites, QDP for parallel composites,
/// R,AG for canonical single-fact questions, QR,R,AG for anything else
/// (sub-queries that may need coreference rewriting).
std::string scripted_planner(const Observation& obs, const OracleConfig& oracle);

// Sentence/question grammar introspection, shared with tests.
struct ParsedFactDoc {
  enum class Relation { Directed, BornIn } relation;
  std::string subject;  // work for Directed, person for BornIn
  std::string object;   // person for Directed, country for BornIn
};
std::optional<ParsedFactDoc> parse_fact_doc(std::string_view text);

}  // namespace dynarag
