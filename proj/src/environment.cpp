#include "dynarag/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dynarag/errors.hpp"
#include "dynarag/math.hpp"
#include "dynarag/strings.hpp"

namespace dynarag {

namespace {

// Index tokens: lowercase, punctuation stripped per token.
std::vector<std::string> index_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& raw : whitespace_tokens(text)) {
    std::string t;
    for (char c : raw) {
      if (std::isalnum(static_cast<unsigned char>(c))) {
        t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    }
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::unordered_map<std::string, int> term_counts(std::string_view text) {
  std::unordered_map<std::string, int> counts;
  for (auto& t : index_tokens(text)) ++counts[t];
  return counts;
}

}  // namespace

Corpus::Corpus(std::vector<Document> docs) : documents_(std::move(docs)) { rebuild_index(); }

void Corpus::rebuild_index() {
  index_.clear();
  doc_norms_.assign(documents_.size(), 0.0);
  for (size_t i = 0; i < documents_.size(); ++i) {
    for (const auto& [token, count] : term_counts(documents_[i].text)) {
      index_[token].push_back({static_cast<int>(i), count});
    }
  }
  for (size_t i = 0; i < documents_.size(); ++i) {
    double sq = 0.0;
    for (const auto& [token, count] : term_counts(documents_[i].text)) {
      const double w = count * idf(token);
      sq += w * w;
    }
    doc_norms_[i] = std::sqrt(sq);
  }
}

double Corpus::idf(const std::string& token) const {
  const auto it = index_.find(token);
  const size_t df = it == index_.end() ? 0 : it->second.size();
  return std::log((1.0 + documents_.size()) / (1.0 + df)) + 1.0;
}

std::vector<Document> lexical_retrieve(const Corpus& corpus, std::string_view query, int k) {
  if (k < 1) throw InvalidParams("k must be >= 1");
  if (corpus.size() == 0) throw EmptyCorpus("cannot retrieve from an empty corpus");

  std::vector<double> scores(corpus.size(), 0.0);
  double query_sq = 0.0;
  for (const auto& [token, qcount] : term_counts(query)) {
    const double idf = corpus.idf(token);
    const double wq = qcount * idf;
    query_sq += wq * wq;
    const auto it = corpus.index().find(token);
    if (it == corpus.index().end()) continue;
    for (const auto& posting : it->second) {
      scores[posting.doc_index] += wq * posting.term_count * idf;
    }
  }
  const double query_norm = std::sqrt(query_sq);

  std::vector<int> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::vector<double> cosine(corpus.size(), 0.0);
  for (size_t i = 0; i < corpus.size(); ++i) {
    const double denom = query_norm * corpus.doc_norm(static_cast<int>(i));
    cosine[i] = denom > 0.0 ? scores[i] / denom : 0.0;
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (cosine[a] != cosine[b]) return cosine[a] > cosine[b];
    return corpus.documents()[a].doc_id < corpus.documents()[b].doc_id;
  });

  const size_t take = std::min<size_t>(static_cast<size_t>(k), corpus.size());
  std::vector<Document> out;
  out.reserve(take);
  for (size_t i = 0; i < take; ++i) out.push_back(corpus.documents()[order[i]]);
  return out;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open corpus file: " + path);
  std::vector<Document> docs;
  std::set<int> seen;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) throw CorpusParseError(line_number, "missing tab separator");
    int doc_id = 0;
    try {
      size_t consumed = 0;
      doc_id = std::stoi(line.substr(0, tab), &consumed);
      if (consumed != tab) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw CorpusParseError(line_number, "doc_id is not an integer");
    }
    if (!seen.insert(doc_id).second) throw CorpusParseError(line_number, "duplicate doc_id");
    docs.push_back(Document{doc_id, line.substr(tab + 1)});
  }
  if (docs.empty()) throw EmptyCorpus("corpus file holds no documents: " + path);
  return Corpus(std::move(docs));
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write corpus file: " + path);
  for (const auto& d : corpus.documents()) {
    out << d.doc_id << '\t' << d.text << '\n';
  }
}

const char* task_class_name(TaskClass c) {
  switch (c) {
    case TaskClass::SingleHop: return "SingleHop";
    case TaskClass::SerialTwoHop: return "SerialTwoHop";
    case TaskClass::ParallelTwoFact: return "ParallelTwoFact";
  }
  return "?";
}

const char* plan_class_name(PlanClass c) {
  switch (c) {
    case PlanClass::SolveDirect: return "SolveDirect";
    case PlanClass::QDS: return "QDS";
    case PlanClass::QDP: return "QDP";
  }
  return "?";
}

std::optional<TaskClass> task_class_from_name(std::string_view name) {
  for (TaskClass c : {TaskClass::SingleHop, TaskClass::SerialTwoHop, TaskClass::ParallelTwoFact}) {
    if (name == task_class_name(c)) return c;
  }
  return std::nullopt;
}

std::optional<PlanClass> plan_class_from_name(std::string_view name) {
  for (PlanClass c : {PlanClass::SolveDirect, PlanClass::QDS, PlanClass::QDP}) {
    if (name == plan_class_name(c)) return c;
  }
  return std::nullopt;
}

PlanClass gold_plan_class_for(TaskClass c) {
  switch (c) {
    case TaskClass::SingleHop: return PlanClass::SolveDirect;
    case TaskClass::SerialTwoHop: return PlanClass::QDS;
    case TaskClass::ParallelTwoFact: return PlanClass::QDP;
  }
  return PlanClass::SolveDirect;
}

// ---------------------------------------------------------------------------
// Synthetic world generation
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string>& first_names() {
  static const std::vector<std::string> v = {
      "Alden",  "Brina",  "Caspar", "Delia",  "Edric",  "Fenna",  "Galen",
      "Hesper", "Ivo",    "Junia",  "Kellan", "Lisbet", "Maren",  "Nolan",
      "Orla",   "Petra",  "Quill",  "Rosalind", "Soren", "Talia", "Ulric",
      "Vera",   "Wendel", "Xanthe", "Yorick", "Zelda",  "Ansel",  "Beatrix"};
  return v;
}

const std::vector<std::string>& last_names() {
  static const std::vector<std::string> v = {
      "Arkwright", "Bellamy",  "Corvane",  "Droswell", "Ellerby",  "Farrow",
      "Grenhall",  "Hollis",   "Ingleton", "Jessop",   "Kembrey",  "Lockridge",
      "Marwood",   "Netherby", "Oakhurst", "Pemberton", "Quarrell", "Rowntree",
      "Selwyn",    "Thackery", "Umber",    "Vexley",   "Wickham",  "Yardley",
      "Zephrin",   "Ashdown",  "Briarcliff", "Caldwell"};
  return v;
}

const std::vector<std::string>& title_adjectives() {
  static const std::vector<std::string> v = {
      "Silent",   "Crimson",  "Gilded",   "Hollow",   "Amber",    "Winter",
      "Restless", "Distant",  "Velvet",   "Shattered", "Luminous", "Forgotten",
      "Wandering", "Iron",    "Paper",    "Sapphire", "Burning",  "Quiet",
      "Endless",  "Marble",   "Drifting", "Emerald",  "Frozen",   "Golden",
      "Midnight", "Scarlet"};
  return v;
}

const std::vector<std::string>& title_nouns() {
  static const std::vector<std::string> v = {
      "Harbor",   "Orchard",  "Lantern",  "Meridian", "Causeway", "Citadel",
      "Archive",  "Furrow",   "Parallax", "Monolith", "Estuary",  "Gallery",
      "Compass",  "Pavilion", "Threshold", "Aqueduct", "Vineyard", "Observatory",
      "Labyrinth", "Viaduct", "Carousel", "Sanctum",  "Terrace",  "Mosaic",
      "Junction", "Beacon"};
  return v;
}

const std::vector<std::string>& country_names() {
  static const std::vector<std::string> v = {
      "Valdoria",  "Norvene",   "Aldenmark", "Quillora", "Sarvia",   "Tellswick",
      "Ombria",    "Fenland",   "Caldus",    "Brontheim", "Eastmere", "Vintrel",
      "Miralonde", "Gravenstad", "Lorvik",   "Pellandria", "Westvale", "Thornmoor",
      "Arvendel",  "Cindralia", "Morvath",   "Solmera",  "Trevane",  "Ulmstead"};
  return v;
}

std::vector<std::string> sample_unique_pairs(const std::vector<std::string>& left,
                                             const std::vector<std::string>& right,
                                             size_t count, const std::string& sep,
                                             std::mt19937_64& rng) {
  std::vector<std::pair<size_t, size_t>> combos;
  combos.reserve(left.size() * right.size());
  for (size_t i = 0; i < left.size(); ++i) {
    for (size_t j = 0; j < right.size(); ++j) combos.emplace_back(i, j);
  }
  if (count > combos.size()) throw InvalidParams("entity pool exhausted");
  std::shuffle(combos.begin(), combos.end(), rng);
  std::vector<std::string> out;
  out.reserve(count);
  for (size_t n = 0; n < count; ++n) {
    out.push_back(left[combos[n].first] + sep + right[combos[n].second]);
  }
  return out;
}

struct WorldFacts {
  std::vector<std::string> works;      // "The {Adj} {Noun}"
  std::vector<std::string> persons;    // "{First} {Last}"
  std::vector<int> director_of_work;   // person index per work
  std::vector<int> country_of_person;  // country index per person
  std::vector<std::string> doc_texts;
  std::vector<int> directed_doc;  // doc position per work
  std::vector<int> born_doc;      // doc position per person
};

WorldFacts build_facts(std::mt19937_64& rng, size_t n_works, size_t n_persons,
                       int distractors_per_entity) {
  WorldFacts w;
  w.works = sample_unique_pairs(title_adjectives(), title_nouns(), n_works, " ", rng);
  for (auto& t : w.works) t = "The " + t;
  w.persons = sample_unique_pairs(first_names(), last_names(), n_persons, " ", rng);

  std::uniform_int_distribution<size_t> person_pick(0, n_persons - 1);
  std::uniform_int_distribution<size_t> country_pick(0, country_names().size() - 1);
  std::uniform_int_distribution<int> year_pick(1931, 2019);

  w.director_of_work.resize(n_works);
  for (size_t i = 0; i < n_works; ++i) w.director_of_work[i] = static_cast<int>(person_pick(rng));
  w.country_of_person.resize(n_persons);
  for (size_t i = 0; i < n_persons; ++i) {
    w.country_of_person[i] = static_cast<int>(country_pick(rng));
  }

  w.directed_doc.resize(n_works);
  for (size_t i = 0; i < n_works; ++i) {
    w.directed_doc[i] = static_cast<int>(w.doc_texts.size());
    w.doc_texts.push_back(w.works[i] + " was directed by " + w.persons[w.director_of_work[i]] + ".");
  }
  w.born_doc.resize(n_persons);
  for (size_t i = 0; i < n_persons; ++i) {
    w.born_doc[i] = static_cast<int>(w.doc_texts.size());
    w.doc_texts.push_back(w.persons[i] + " was born in " +
                          country_names()[w.country_of_person[i]] + ".");
  }

  for (size_t i = 0; i < n_works; ++i) {
    if (distractors_per_entity >= 1) {
      w.doc_texts.push_back(w.works[i] + " was released in " +
                            std::to_string(year_pick(rng)) + ".");
    }
    if (distractors_per_entity >= 2) {
      w.doc_texts.push_back(w.works[i] + " starred " + w.persons[person_pick(rng)] + ".");
    }
  }
  for (size_t i = 0; i < n_persons; ++i) {
    if (distractors_per_entity >= 1) {
      w.doc_texts.push_back(w.persons[i] + " married " + w.persons[person_pick(rng)] + " in " +
                            std::to_string(year_pick(rng)) + ".");
    }
  }
  return w;
}

std::string directed_question(const std::string& work) { return "Who directed " + work + "?"; }
// Two born-fact phrasings: the rewriter canonicalizes pronoun chains to the
// first; standalone questions use the second.
std::string born_question(const std::string& person) { return "Where was " + person + " born?"; }
std::string born_country_question(const std::string& person) {
  return "Which country was " + person + " born in?";
}
std::string serial_question(const std::string& work) {
  return "Where was the director of " + work + " born?";
}

// The dependent hop keeps a pronoun in one of several surface forms; which
// one is a deterministic function of the question being decomposed.
std::string born_frame(std::uint64_t frame, const std::string& subject) {
  switch (frame % 4) {
    case 0: return "Where was " + subject + " born?";
    case 1: return "Which country was " + subject + " born in?";
    case 2: return "In which country was " + subject + " born?";
    default: return "What country was " + subject + " born in?";
  }
}

std::string pronoun_hop_question(std::string_view origin) {
  static const char* pronouns[] = {"that person", "this person", "that individual",
                                   "this individual"};
  const std::uint64_t h = fnv1a(origin);
  return born_frame(h >> 3, pronouns[h % 4]);
}

// What the rewriter turns the pronoun hop into once the antecedent is known.
std::string resolved_hop_question(std::string_view origin, const std::string& person) {
  return born_frame(fnv1a(origin) >> 3, person);
}
std::string parallel_question(const std::string& work, const std::string& person) {
  return "Who directed " + work + " and also where was " + person + " born?";
}

bool doc_in(const std::vector<Document>& docs, int doc_id) {
  return std::any_of(docs.begin(), docs.end(),
                     [&](const Document& d) { return d.doc_id == doc_id; });
}

}  // namespace

SyntheticWorld generate_tasks(std::uint64_t seed, const GeneratorParams& params) {
  if (params.single < 0 || params.serial < 0 || params.parallel < 0) {
    throw InvalidParams("task counts must be non-negative");
  }
  if (params.entities < 1 || params.retrieval_k < 1) {
    throw InvalidParams("entities and retrieval_k must be positive");
  }
  if (params.distractors_per_entity < 0 || params.distractors_per_entity > 2) {
    throw InvalidParams("distractors_per_entity must be in [0, 2]");
  }

  const size_t single_directed = (params.single + 1) / 2;
  const size_t single_born = params.single - single_directed;
  const size_t need_works =
      static_cast<size_t>(params.serial) + params.parallel + single_directed;
  const size_t need_persons = static_cast<size_t>(params.parallel) + single_born;
  const size_t n_works = std::max<size_t>(params.entities, need_works + 4);
  const size_t n_persons = std::max<size_t>(params.entities, need_persons + 8);

  // The serial composite question must not surface both of its supporting
  // facts through plain top-k retrieval. Born-fact pools that are too small
  // make the query trivially solvable in one shot; grow the pool until the
  // construction check holds.
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::mt19937_64 rng(seed);
    const size_t filler = attempt == 0 ? 0 : (8u << attempt);
    WorldFacts facts =
        build_facts(rng, n_works, n_persons + filler, params.distractors_per_entity);

    std::vector<int> doc_position(facts.doc_texts.size());
    for (size_t i = 0; i < doc_position.size(); ++i) doc_position[i] = static_cast<int>(i);
    std::shuffle(doc_position.begin(), doc_position.end(), rng);
    // doc_position[i] is the doc_id given to the i-th generated text.
    std::vector<Document> docs(facts.doc_texts.size());
    for (size_t i = 0; i < facts.doc_texts.size(); ++i) {
      docs[doc_position[i]] = Document{doc_position[i], facts.doc_texts[i]};
    }
    Corpus corpus(std::move(docs));

    auto directed_doc_id = [&](size_t work) { return doc_position[facts.directed_doc[work]]; };
    auto born_doc_id = [&](size_t person) { return doc_position[facts.born_doc[person]]; };

    std::vector<SyntheticTask> tasks;
    size_t next_work = 0;
    size_t next_person = 0;

    // Alternate the two single-hop phrasings so any train/eval split keeps
    // both forms represented.
    size_t directed_left = single_directed;
    size_t born_left = single_born;
    for (int i = 0; i < params.single; ++i) {
      SyntheticTask t;
      t.task_class = TaskClass::SingleHop;
      t.gold_plan_class = PlanClass::SolveDirect;
      const bool use_directed = born_left == 0 || (directed_left > 0 && i % 2 == 0);
      if (use_directed) {
        --directed_left;
        const size_t w = next_work++;
        t.question = directed_question(facts.works[w]);
        t.gold_answer = facts.persons[facts.director_of_work[w]];
        t.supporting_fact_ids = {directed_doc_id(w)};
      } else {
        --born_left;
        const size_t p = next_person++;
        t.question = born_country_question(facts.persons[p]);
        t.gold_answer = country_names()[facts.country_of_person[p]];
        t.supporting_fact_ids = {born_doc_id(p)};
      }
      tasks.push_back(std::move(t));
    }
    for (int i = 0; i < params.serial; ++i) {
      const size_t w = next_work++;
      const size_t director = facts.director_of_work[w];
      SyntheticTask t;
      t.task_class = TaskClass::SerialTwoHop;
      t.gold_plan_class = PlanClass::QDS;
      t.question = serial_question(facts.works[w]);
      t.gold_answer = country_names()[facts.country_of_person[director]];
      t.supporting_fact_ids = {directed_doc_id(w), born_doc_id(director)};
      tasks.push_back(std::move(t));
    }
    for (int i = 0; i < params.parallel; ++i) {
      const size_t w = next_work++;
      const size_t p = next_person++;
      SyntheticTask t;
      t.task_class = TaskClass::ParallelTwoFact;
      t.gold_plan_class = PlanClass::QDP;
      t.question = parallel_question(facts.works[w], facts.persons[p]);
      t.gold_answer = facts.persons[facts.director_of_work[w]] + ", " +
                      country_names()[facts.country_of_person[p]];
      t.supporting_fact_ids = {directed_doc_id(w), born_doc_id(p)};
      tasks.push_back(std::move(t));
    }

    // Check 1: every supporting fact is reachable from its canonical
    // single-fact question.
    bool canonical_ok = true;
    for (const auto& t : tasks) {
      std::vector<std::pair<std::string, int>> probes;
      switch (t.task_class) {
        case TaskClass::SingleHop:
          probes.emplace_back(t.question, t.supporting_fact_ids[0]);
          break;
        case TaskClass::SerialTwoHop: {
          // Hop 1 is the canonical directed question; hop 2 is the born
          // question for the director named in the directed fact.
          const Document* dd = nullptr;
          for (const auto& d : corpus.documents()) {
            if (d.doc_id == t.supporting_fact_ids[0]) dd = &d;
          }
          const auto parsed = parse_fact_doc(dd->text);
          probes.emplace_back(directed_question(parsed->subject), t.supporting_fact_ids[0]);
          probes.emplace_back(resolved_hop_question(t.question, parsed->object),
                              t.supporting_fact_ids[1]);
          break;
        }
        case TaskClass::ParallelTwoFact: {
          const Document* dd = nullptr;
          const Document* bd = nullptr;
          for (const auto& d : corpus.documents()) {
            if (d.doc_id == t.supporting_fact_ids[0]) dd = &d;
            if (d.doc_id == t.supporting_fact_ids[1]) bd = &d;
          }
          probes.emplace_back(directed_question(parse_fact_doc(dd->text)->subject),
                              t.supporting_fact_ids[0]);
          probes.emplace_back(born_question(parse_fact_doc(bd->text)->subject),
                              t.supporting_fact_ids[1]);
          break;
        }
      }
      for (const auto& [q, id] : probes) {
        if (!doc_in(lexical_retrieve(corpus, q, params.retrieval_k), id)) {
          canonical_ok = false;
        }
      }
    }

    // Check 2: for at least half of the serial tasks, top-k on the raw
    // composite question misses one of the two supporting facts.
    int serial_total = 0;
    int serial_easy = 0;
    for (const auto& t : tasks) {
      if (t.task_class != TaskClass::SerialTwoHop) continue;
      ++serial_total;
      const auto top = lexical_retrieve(corpus, t.question, params.retrieval_k);
      if (doc_in(top, t.supporting_fact_ids[0]) && doc_in(top, t.supporting_fact_ids[1])) {
        ++serial_easy;
      }
    }
    const bool distractors_ok = serial_total == 0 || serial_easy * 2 <= serial_total;

    if (canonical_ok && distractors_ok) {
      return SyntheticWorld{std::move(corpus), std::move(tasks)};
    }
    if (!canonical_ok) {
      throw InvalidParams("world construction failed: canonical questions not retrievable");
    }
  }
  throw InvalidParams("world construction failed: composite questions stayed too easy");
}

std::vector<SyntheticTask> load_tasks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open task file: " + path);
  std::vector<SyntheticTask> tasks;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw CorpusParseError(line_number, e.what());
    }
    SyntheticTask t;
    try {
      t.question = j.at("question").get<std::string>();
      t.gold_answer = j.at("gold_answer").get<std::string>();
      const auto tc = task_class_from_name(j.at("task_class").get<std::string>());
      const auto pc = plan_class_from_name(j.at("gold_plan_class").get<std::string>());
      if (!tc || !pc) throw CorpusParseError(line_number, "unknown class name");
      t.task_class = *tc;
      t.gold_plan_class = *pc;
      t.supporting_fact_ids = j.at("supporting_fact_ids").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
      throw CorpusParseError(line_number, e.what());
    }
    tasks.push_back(std::move(t));
  }
  return tasks;
}

void save_tasks(const std::vector<SyntheticTask>& tasks, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write task file: " + path);
  for (const auto& t : tasks) {
    nlohmann::json j;
    j["question"] = t.question;
    j["gold_answer"] = t.gold_answer;
    j["task_class"] = task_class_name(t.task_class);
    j["gold_plan_class"] = plan_class_name(t.gold_plan_class);
    j["supporting_fact_ids"] = t.supporting_fact_ids;
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Scripted oracles
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kDontKnow = "I don't know";

struct ParsedQuestion {
  enum class Form { Directed, Born, SerialComposite, ParallelComposite, Other } form;
  std::string work;
  std::string person;
};

ParsedQuestion parse_question(std::string_view q) {
  ParsedQuestion p;
  p.form = ParsedQuestion::Form::Other;
  if (starts_with(q, "Where was the director of ") && ends_with(q, " born?")) {
    p.form = ParsedQuestion::Form::SerialComposite;
    p.work = std::string(q.substr(26, q.size() - 26 - 6));
    return p;
  }
  if (starts_with(q, "Where was ") && ends_with(q, " born?")) {
    p.form = ParsedQuestion::Form::Born;
    p.person = std::string(q.substr(10, q.size() - 10 - 6));
    return p;
  }
  if (starts_with(q, "Which country was ") && ends_with(q, " born in?")) {
    p.form = ParsedQuestion::Form::Born;
    p.person = std::string(q.substr(18, q.size() - 18 - 9));
    return p;
  }
  if (starts_with(q, "In which country was ") && ends_with(q, " born?")) {
    p.form = ParsedQuestion::Form::Born;
    p.person = std::string(q.substr(21, q.size() - 21 - 6));
    return p;
  }
  if (starts_with(q, "What country was ") && ends_with(q, " born in?")) {
    p.form = ParsedQuestion::Form::Born;
    p.person = std::string(q.substr(17, q.size() - 17 - 9));
    return p;
  }
  if (starts_with(q, "Who directed ") && ends_with(q, "?")) {
    const std::string_view rest = q.substr(13, q.size() - 13 - 1);
    if (const size_t split = rest.find(" and also where was ");
        split != std::string_view::npos && ends_with(rest, " born")) {
      p.form = ParsedQuestion::Form::ParallelComposite;
      p.work = std::string(rest.substr(0, split));
      p.person = std::string(rest.substr(split + 20, rest.size() - split - 20 - 5));
      return p;
    }
    p.form = ParsedQuestion::Form::Directed;
    p.work = std::string(rest);
    return p;
  }
  return p;
}

const Document* find_directed(const std::vector<Document>& docs, const std::string& work) {
  for (const auto& d : docs) {
    const auto f = parse_fact_doc(d.text);
    if (f && f->relation == ParsedFactDoc::Relation::Directed && f->subject == work) return &d;
  }
  return nullptr;
}

const Document* find_born(const std::vector<Document>& docs, const std::string& person) {
  for (const auto& d : docs) {
    const auto f = parse_fact_doc(d.text);
    if (f && f->relation == ParsedFactDoc::Relation::BornIn && f->subject == person) return &d;
  }
  return nullptr;
}

// Word-boundary pronoun search; supports the multi-word phrases and bare "it".
std::optional<std::pair<size_t, size_t>> find_pronoun(std::string_view q) {
  static const std::string_view phrases[] = {"that person", "this person", "that individual",
                                             "this individual", "this actor"};
  for (auto phrase : phrases) {
    const size_t pos = q.find(phrase);
    if (pos != std::string_view::npos) return std::make_pair(pos, phrase.size());
  }
  size_t pos = q.find("it");
  while (pos != std::string_view::npos) {
    const bool left_ok = pos == 0 || q[pos - 1] == ' ';
    const size_t end = pos + 2;
    const bool right_ok = end == q.size() || q[end] == ' ' || q[end] == '?' || q[end] == '.';
    if (left_ok && right_ok) return std::make_pair(pos, size_t{2});
    pos = q.find("it", pos + 1);
  }
  return std::nullopt;
}

constexpr std::string_view kWordyPrefix = "Please find out: ";

std::string oracle_rewrite(const Observation& obs) {
  std::string q = obs.target_query;
  if (starts_with(q, kWordyPrefix)) q = q.substr(kWordyPrefix.size());
  const auto pronoun = find_pronoun(q);
  if (pronoun && !obs.resolved_pairs.empty()) {
    q.replace(pronoun->first, pronoun->second, obs.resolved_pairs.back().answer);
  }
  return "<query>" + q + "</query>";
}

std::string tag_decomposition(const std::string& q1, const std::string& q2) {
  return "<q1>" + q1 + "</q1>\n<q2>" + q2 + "</q2>";
}

std::string oracle_decompose_serial(const Observation& obs) {
  const ParsedQuestion q = parse_question(obs.target_query);
  switch (q.form) {
    case ParsedQuestion::Form::SerialComposite:
      return tag_decomposition(std::string(kWordyPrefix) + directed_question(q.work),
                               pronoun_hop_question(obs.target_query));
    case ParsedQuestion::Form::ParallelComposite:
      // A serial decomposer fabricates a dependency an independent pair does
      // not have; neither fragment survives the misreading.
      return tag_decomposition("What is " + q.work + "?", "Where was that person born?");
    case ParsedQuestion::Form::Directed:
      return tag_decomposition("What is " + q.work + "?", "Who directed it?");
    case ParsedQuestion::Form::Born:
      return tag_decomposition("Who is " + q.person + "?", "Where was this person born?");
    case ParsedQuestion::Form::Other:
      return "<q1>" + obs.target_query + "</q1>";
  }
  return "<q1>" + obs.target_query + "</q1>";
}

std::string oracle_decompose_parallel(const Observation& obs) {
  const ParsedQuestion q = parse_question(obs.target_query);
  switch (q.form) {
    case ParsedQuestion::Form::ParallelComposite:
      // Complete and independent, but conversational; the rewriter is the
      // module that turns these into search-ready queries.
      return tag_decomposition(std::string(kWordyPrefix) + directed_question(q.work),
                               std::string(kWordyPrefix) + born_question(q.person));
    case ParsedQuestion::Form::SerialComposite:
      // Forcing independence drops the dependency marker and leaves the
      // second hop underspecified.
      return tag_decomposition(directed_question(q.work), "Where was the director born?");
    case ParsedQuestion::Form::Directed:
      return tag_decomposition("What is " + q.work + "?", "Who directed the film?");
    case ParsedQuestion::Form::Born:
      return tag_decomposition("Who is " + q.person + "?", "Where was the person born?");
    case ParsedQuestion::Form::Other:
      return "<q1>" + obs.target_query + "</q1>";
  }
  return "<q1>" + obs.target_query + "</q1>";
}

std::string oracle_select(const Observation& obs) {
  // The selector judges candidates against the target query alone; an
  // under-specified target (pronoun or conversational phrasing) gives it
  // nothing to discriminate with, even when a rewrite exists downstream.
  const ParsedQuestion q = parse_question(obs.target_query);
  std::set<int> keep;
  auto keep_doc = [&](const Document* d) {
    if (!d) return;
    for (size_t i = 0; i < obs.documents.size(); ++i) {
      if (obs.documents[i].doc_id == d->doc_id) keep.insert(static_cast<int>(i));
    }
  };
  switch (q.form) {
    case ParsedQuestion::Form::Directed:
      keep_doc(find_directed(obs.documents, q.work));
      break;
    case ParsedQuestion::Form::Born:
      keep_doc(find_born(obs.documents, q.person));
      break;
    case ParsedQuestion::Form::SerialComposite: {
      const Document* dd = find_directed(obs.documents, q.work);
      keep_doc(dd);
      if (dd) keep_doc(find_born(obs.documents, parse_fact_doc(dd->text)->object));
      break;
    }
    case ParsedQuestion::Form::ParallelComposite:
      keep_doc(find_directed(obs.documents, q.work));
      keep_doc(find_born(obs.documents, q.person));
      break;
    case ParsedQuestion::Form::Other:
      break;
  }
  std::string body;
  for (int id : keep) {
    if (!body.empty()) body += ", ";
    body += std::to_string(id);
  }
  return "<id>" + body + "</id>";
}

std::string oracle_answer(const Observation& obs) {
  const ParsedQuestion q = parse_question(obs.effective_query);
  std::string answer{kDontKnow};
  switch (q.form) {
    case ParsedQuestion::Form::Directed: {
      if (const Document* d = find_directed(obs.documents, q.work)) {
        answer = parse_fact_doc(d->text)->object;
      }
      break;
    }
    case ParsedQuestion::Form::Born: {
      if (const Document* d = find_born(obs.documents, q.person)) {
        answer = parse_fact_doc(d->text)->object;
      }
      break;
    }
    case ParsedQuestion::Form::SerialComposite: {
      // A capable reader can chain the two hops when both facts made it into
      // its evidence; otherwise it has no grounded answer.
      if (const Document* dd = find_directed(obs.documents, q.work)) {
        const std::string director = parse_fact_doc(dd->text)->object;
        if (const Document* bd = find_born(obs.documents, director)) {
          answer = parse_fact_doc(bd->text)->object;
        }
      }
      break;
    }
    case ParsedQuestion::Form::ParallelComposite:
      // One invocation yields one brief answer; a conjunction question has
      // no single grounded answer, so the reader declines.
      break;
    case ParsedQuestion::Form::Other:
      break;
  }
  return "<answer>" + answer + "</answer>";
}

std::string oracle_summarize(const Observation& obs) {
  const ParsedQuestion q = parse_question(obs.target_query);
  std::string answer{kDontKnow};
  if (!obs.resolved_pairs.empty()) {
    if (q.form == ParsedQuestion::Form::ParallelComposite && obs.resolved_pairs.size() >= 2) {
      answer = obs.resolved_pairs[0].answer + ", " + obs.resolved_pairs[1].answer;
    } else {
      answer = obs.resolved_pairs.back().answer;
    }
  }
  return "<answer>" + answer + "</answer>";
}

const char* open_tag_for(Role role) {
  switch (role) {
    case Role::Planner: return "<workflow>";
    case Role::QR: return "<query>";
    case Role::QDS:
    case Role::QDP: return "<q1>";
    case Role::DS: return "<id>";
    default: return "<answer>";
  }
}

// Seeded, call-local corruption. Both variants fail tag parsing: one drops
// the tags entirely, the other opens a tag around a wrong entity and never
// closes it.
std::optional<std::string> maybe_corrupt(Role role, const Observation& obs,
                                         const OracleConfig& oracle) {
  if (oracle.noise_rate <= 0.0) return std::nullopt;
  std::uint64_t h = fnv1a_mix(oracle.seed, kFnvOffset);
  h = fnv1a(role_name(role), h);
  h = fnv1a_mix(observation_digest(obs), h);
  std::mt19937_64 rng(h);
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) >= oracle.noise_rate) {
    return std::nullopt;
  }
  if (rng() & 1u) {
    return std::string("unable to comply with the requested format");
  }
  return std::string(open_tag_for(role)) + "Wendel Vexley";
}

}  // namespace

std::optional<ParsedFactDoc> parse_fact_doc(std::string_view text) {
  if (!ends_with(text, ".")) return std::nullopt;
  const std::string_view body = text.substr(0, text.size() - 1);
  if (const size_t pos = body.find(" was directed by "); pos != std::string_view::npos) {
    return ParsedFactDoc{ParsedFactDoc::Relation::Directed, std::string(body.substr(0, pos)),
                         std::string(body.substr(pos + 17))};
  }
  if (const size_t pos = body.find(" was born in "); pos != std::string_view::npos) {
    return ParsedFactDoc{ParsedFactDoc::Relation::BornIn, std::string(body.substr(0, pos)),
                         std::string(body.substr(pos + 13))};
  }
  return std::nullopt;
}

std::string scripted_executor(Role role, const Observation& obs, const OracleConfig& oracle) {
  if (role == Role::Planner || role == Role::RA) {
    throw UnsupportedRole(std::string("scripted executor does not cover ") + role_name(role));
  }
  if (auto corrupted = maybe_corrupt(role, obs, oracle)) return *corrupted;
  switch (role) {
    case Role::QR: return oracle_rewrite(obs);
    case Role::QDS: return oracle_decompose_serial(obs);
    case Role::QDP: return oracle_decompose_parallel(obs);
    case Role::DS: return oracle_select(obs);
    case Role::AG: return oracle_answer(obs);
    case Role::AS: return oracle_summarize(obs);
    default: break;
  }
  throw UnsupportedRole("unreachable");
}

std::string scripted_planner(const Observation& obs, const OracleConfig& oracle) {
  if (auto corrupted = maybe_corrupt(Role::Planner, obs, oracle)) return *corrupted;
  // Pronoun-bearing sub-queries need the rewriter in front of retrieval.
  if (find_pronoun(obs.target_query)) return "<workflow>QR,R,AG</workflow>";
  const ParsedQuestion q = parse_question(obs.target_query);
  switch (q.form) {
    case ParsedQuestion::Form::SerialComposite:
      if (!obs.solve_only_menu) return "<workflow>QDS</workflow>";
      break;
    case ParsedQuestion::Form::ParallelComposite:
      if (!obs.solve_only_menu) return "<workflow>QDP</workflow>";
      break;
    case ParsedQuestion::Form::Directed:
    case ParsedQuestion::Form::Born:
      return "<workflow>R,AG</workflow>";
    case ParsedQuestion::Form::Other:
      break;
  }
  return "<workflow>QR,R,AG</workflow>";
}

}  // namespace dynarag
