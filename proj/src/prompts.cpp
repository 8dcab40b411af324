#include "dynarag/prompts.hpp"

#include <map>

#include "dynarag/errors.hpp"
#include "dynarag/strings.hpp"

namespace dynarag {

namespace {

constexpr std::string_view kPlannerPrompt =
    R"(You are a helpful assistant specialized in planning workflows. Your task is to plan a Workflow for the given question using the available tools/agents.

Available Tools/Agents:
- Query Rewriter (QR): Input: question -> Output: rewritten question that is more concise, clearer, and accurate.
- Query Decomposition Serial (QDS): Input: question -> Output: dependent sub-questions where later ones depend on earlier ones.
- Query Decomposition Parallel (QDP): Input: question -> Output: several sub-questions can be searched independently.
- Retrieval (R): Input: question -> Output: relevant candidate documents.
- Document Selector (DS): Input: question + candidate documents -> Output: subset of documents helpful for answering.
- Answer Generator (AG): Input: question [+ optional documents] -> Output: final answer.

Rules for tool selection:
1. When the question needs to be broken down into sub-questions:
   - If sub-questions have dependencies and must be answered in sequence, use QDS or QDP ONLY.
2. When the question can be answered directly without decomposition:
   - Build workflow from QR, R, DS, AG.
   - If DS is in workflow, R must appear before DS.
   - The last module must always be AG.
3. IMPORTANT:
   - If you choose QDS or QDP, DO NOT add any other tools/agents.
   - The workflow must ONLY contain QDS or QDP in those cases.

Question: {query}

Now, generate the appropriate Workflow based on the rules.

Output strictly inside <workflow>...</workflow> tags.)";

constexpr std::string_view kRewritePrompt =
    R"(You are a professional assistant skilled at rewriting slightly redundant or overly wordy factual questions into a single, concise, and searchable query.

Task Requirements:
- Keep all essential names, dates, and terms.
- Do not add explanations or unrelated details.
- Make the query short and clear.

Original Question: {query}

Now, rewrite the original question. Output strictly inside <query>...</query> tags.)";

constexpr std::string_view kDecomposeParallelPrompt =
    R"(You are a professional assistant skilled at decomposing complex multi-entity or multi-location questions into multiple independent sub-questions.

Task Requirements:
- Each sub-question must be specific, logically complete, and searchable independently.
- Avoid duplication and overlap.
- Do not generate more than 4 sub-questions.

Original Question: {query}

Now, break down the question into independent sub-questions. Output each sub-question on a new line inside numbered tags (<q1>...</q1>, <q2>...</q2>, etc.).)";

constexpr std::string_view kDecomposeSerialPrompt =
    R"(You are a professional assistant skilled at decomposing complex questions into a minimal sequence of logically dependent sub-questions.

Task Requirements:
- Each sub-question must be self-contained and specific.
- Ensure a logical chain where later questions depend on earlier ones.
- Keep the number of sub-questions minimal (max 4).
- Avoid redundancy.

Original Question: {query}

Now, decompose the question into a logically ordered sequence. Output each sub-question on a new line inside numbered tags (<q1>...</q1>, <q2>...</q2>, etc.).)";

constexpr std::string_view kSelectPrompt =
    R"(You are a helpful, respectful, and honest assistant. Your task is to identify which candidate Documents are helpful in answering the Question.

Question: {query}

{doc_content}

Now, select the helpful documents. Output their IDs (0, 1, ..., {max_id}) as comma-separated values strictly inside <id>...</id> tags.)";

constexpr std::string_view kAnswerPrompt =
    R"(You are a helpful, respectful, and honest assistant. Your task is to provide a brief and accurate answer to the Question based on the provided Documents.

Task Requirements:
- Answer strictly based on the documents.
- If the answer is not in the documents, say "I don't know".
- Do not fabricate information.

Question: {query}

{doc_content}

Now, generate the brief and accurate answer. Output strictly inside <answer>...</answer> tags.)";

constexpr std::string_view kSummarizePrompt =
    R"(You are a helpful, respectful, and honest assistant. Your task is to predict the final answer to the Original Question based on the answers to its decomposed sub-questions.

Task Requirements:
- Synthesize the information from the sub-questions and observations.
- Always provide the answer you think is most correct.
- Do not answer "I don't know" unless absolutely necessary.

Original Question: {query}

{observation}

Now, answer the Original Question based on the observations. Output strictly inside <answer>...</answer> tags.)";

std::string substitute(std::string_view tmpl,
                       const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  out.reserve(tmpl.size() + 64);
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      out += tmpl[i++];
      continue;
    }
    const size_t close = tmpl.find('}', i);
    if (close == std::string_view::npos) {
      throw UnfilledPlaceholder("unterminated placeholder");
    }
    const std::string name(tmpl.substr(i + 1, close - i - 1));
    auto it = values.find(name);
    if (it == values.end()) {
      throw UnfilledPlaceholder("no binding for placeholder {" + name + "}");
    }
    out += it->second;
    i = close + 1;
  }
  return out;
}

}  // namespace

std::string_view prompt_template(Role role) {
  switch (role) {
    case Role::Planner: return kPlannerPrompt;
    case Role::QR: return kRewritePrompt;
    case Role::QDP: return kDecomposeParallelPrompt;
    case Role::QDS: return kDecomposeSerialPrompt;
    case Role::DS: return kSelectPrompt;
    case Role::AG: return kAnswerPrompt;
    case Role::AS: return kSummarizePrompt;
    case Role::RA: break;
  }
  throw UnsupportedRole("retrieval agent has no prompt");
}

std::string render_doc_content(const std::vector<Document>& docs) {
  std::string out;
  for (size_t i = 0; i < docs.size(); ++i) {
    if (i) out += '\n';
    out += "Document" + std::to_string(i) + ": " + docs[i].text;
  }
  return out;
}

std::string render_observation_block(const std::vector<QaPair>& pairs) {
  std::string out;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (i) out += '\n';
    const std::string n = std::to_string(i + 1);
    out += "Sub-question " + n + ": " + pairs[i].question + "\n";
    out += "Answer " + n + ": " + pairs[i].answer;
  }
  return out;
}

std::string render_prompt(Role role, const Observation& obs) {
  if (obs.role != role) {
    throw InvalidParams("observation was built for a different role");
  }
  if (trim(obs.target_query).empty()) {
    throw UnfilledPlaceholder("query is blank");
  }
  std::map<std::string, std::string, std::less<>> values;
  values["query"] = obs.target_query;
  switch (role) {
    case Role::DS:
      values["doc_content"] = render_doc_content(obs.documents);
      values["max_id"] = std::to_string(static_cast<int>(obs.documents.size()) - 1);
      break;
    case Role::AG:
      values["doc_content"] = render_doc_content(obs.documents);
      break;
    case Role::AS:
      values["observation"] = render_observation_block(obs.resolved_pairs);
      break;
    default:
      break;
  }
  return substitute(prompt_template(role), values);
}

}  // namespace dynarag
