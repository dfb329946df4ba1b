#include "raglab/pipeline.hpp"

#include <regex>
#include <sstream>

namespace raglab::pipeline {

namespace {

constexpr std::string_view kInstructions =
    "You answer questions using only the provided context.\n"
    "Respond with a single JSON object and nothing else. The object must contain exactly "
    "two keys:\n"
    "  \"supporting_sentences\": an array of the exact sentences from the context that you "
    "used for reasoning;\n"
    "  \"final_answer\": a concise answer of at most three words.\n"
    "If the context does not contain enough information to answer, set \"final_answer\" to "
    "\"Insufficient information\".\n";

}  // namespace

PromptBundle assemble_prompt(const Question& question, std::span<const Chunk> context) {
  std::ostringstream user;
  user << "Question: " << question.text << "\n\nContext:\n";
  if (context.empty()) {
    user << kNoContextMarker << "\n";
  } else {
    for (std::size_t i = 0; i < context.size(); ++i) {
      user << "[" << (i + 1) << "] (chunk " << context[i].chunk_id << ")\n"
           << context[i].text << "\n\n";
    }
  }
  user << "Answer in the required JSON format.";
  return {std::string(kInstructions), user.str()};
}

namespace {

bool read_object(const json& j, ParsedResponse& out) {
  if (!j.is_object()) return false;
  auto fa = j.find("final_answer");
  auto ss = j.find("supporting_sentences");
  if (fa == j.end() || !fa->is_string()) return false;
  out.final_answer = fa->get<std::string>();
  out.supporting_sentences.clear();
  if (ss != j.end() && ss->is_array()) {
    for (const auto& s : *ss)
      if (s.is_string()) out.supporting_sentences.push_back(s.get<std::string>());
  }
  return true;
}

bool has_both_keys(const json& j) {
  if (!j.is_object()) return false;
  auto fa = j.find("final_answer");
  auto ss = j.find("supporting_sentences");
  if (fa == j.end() || !fa->is_string() || ss == j.end() || !ss->is_array()) return false;
  for (const auto& s : *ss)
    if (!s.is_string()) return false;
  return true;
}

// Index range of the first brace-balanced block, honouring JSON strings.
std::optional<std::pair<std::size_t, std::size_t>> first_balanced_block(const std::string& s) {
  const auto open = s.find('{');
  if (open == std::string::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return std::pair{open, i + 1};
  }
  return std::nullopt;
}

std::string unescape(const std::string& quoted_body) {
  try {
    return json::parse("\"" + quoted_body + "\"").get<std::string>();
  } catch (const json::exception&) {
    return quoted_body;
  }
}

}  // namespace

ParsedResponse parse_response_lenient(const std::string& raw) {
  ParsedResponse out;
  out.raw = raw;

  // Tier 1.
  if (auto j = json::parse(raw, nullptr, false); !j.is_discarded() && has_both_keys(j)) {
    read_object(j, out);
    out.strict_parse_ok = true;
    return out;
  }

  // Tier 2.
  if (auto block = first_balanced_block(raw)) {
    auto j = json::parse(raw.substr(block->first, block->second - block->first), nullptr, false);
    if (!j.is_discarded() && read_object(j, out)) return out;
  }

  // Tier 3.
  static const std::regex answer_re(R"re("final_answer"\s*:\s*"((?:[^"\\]|\\.)*)")re");
  static const std::regex list_re(R"re("supporting_sentences"\s*:\s*\[([^\]]*))re");
  static const std::regex item_re(R"re("((?:[^"\\]|\\.)*)")re");
  std::smatch m;
  if (std::regex_search(raw, m, answer_re)) {
    out.final_answer = unescape(m[1].str());
    std::smatch lm;
    if (std::regex_search(raw, lm, list_re)) {
      const auto body = lm[1].str();
      for (auto it = std::sregex_iterator(body.begin(), body.end(), item_re);
           it != std::sregex_iterator(); ++it) {
        out.supporting_sentences.push_back(unescape((*it)[1].str()));
      }
    }
    return out;
  }

  // Tier 4.
  out.final_answer.clear();
  out.supporting_sentences.clear();
  return out;
}

CoverageStats coverage_for(const Question& question, const corpus::EvidenceLocator& chunks,
                           std::span<const std::string> range_ids,
                           std::span<const std::string> context_ids) {
  CoverageStats c;
  c.evidence_total = static_cast<std::int64_t>(question.evidence.size());
  c.evidence_in_rerank_range = chunks.evidence_found_in(question, range_ids);
  c.evidence_in_context = chunks.evidence_found_in(question, context_ids);
  for (const auto& e : question.evidence) c.corpus_wide = c.corpus_wide || e.doc_id.empty();
  return c;
}

RunRecord run_question(const RagConfig& config, const Question& question, const Resources& res) {
  RunRecord rec;
  rec.config_id = canonical_config_id(config);
  rec.question_id = question.question_id;
  {
    auto relevant = res.chunks.relevant_chunks(question);
    rec.relevant_chunk_ids.assign(relevant.begin(), relevant.end());
  }
  try {
    const std::vector<std::string> query{question.text};
    const auto qvec = res.embedder.embed(query).at(0);
    const auto retrieved =
        retrieval::knn_search(res.index, qvec, static_cast<std::size_t>(config.retrieval_depth));
    rec.retrieved = retrieved.items;

    std::vector<Chunk> candidates;
    for (const auto& item : retrieved.items) {
      const auto* c = res.chunks.find(item.chunk_id);
      if (!c) throw Error("not_found", "index references unknown chunk '" + item.chunk_id + "'");
      candidates.push_back(*c);
    }
    const auto reranked = retrieval::apply_rerank(question.text, retrieved, res.reranker, candidates);
    if (res.reranker) rec.reranked = reranked.items;
    rec.context_chunk_ids = retrieval::take_top_k(reranked, static_cast<std::size_t>(config.top_k));

    std::vector<Chunk> context;
    for (const auto& id : rec.context_chunk_ids) context.push_back(*res.chunks.find(id));
    const auto prompt = assemble_prompt(question, context);
    const auto raw =
        res.generator.generate({question.question_id, question.text, context, prompt});
    rec.response = parse_response_lenient(raw);

    rec.judge_verdict = res.judge.judge(providers::JudgeRequest{
        question.text, question.ground_truth, rec.response.final_answer, raw, false});

    std::vector<std::string> range_ids;
    for (const auto& item : retrieved.items) range_ids.push_back(item.chunk_id);
    rec.coverage = coverage_for(question, res.chunks, range_ids, rec.context_chunk_ids);

    auto attributed = attribution::attribute(rec, question, res.policy, res.judge);
    rec.outcome = attributed.label;
    rec.adjudication = std::move(attributed.adjudication);
  } catch (const Error& e) {
    rec.error = e.code() + ": " + e.what();
    rec.outcome = OutcomeLabel::Unknown;
  }
  return rec;
}

}  // namespace raglab::pipeline
