#include "raglab/types.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "raglab/digest.hpp"
#include "raglab/text.hpp"

namespace raglab {

std::string make_chunk_id(std::string_view doc_id, std::int64_t char_start) {
  return std::string(doc_id) + ":" + std::to_string(char_start);
}

bool is_unanswerable(std::string_view ground_truth) {
  const auto trimmed = text::trim(ground_truth);
  if (trimmed.size() != kUnanswerableSentinel.size()) return false;
  return std::equal(trimmed.begin(), trimmed.end(), kUnanswerableSentinel.begin(),
                    [](char a, char b) {
                      return std::tolower(static_cast<unsigned char>(a)) ==
                             std::tolower(static_cast<unsigned char>(b));
                    });
}

std::vector<std::string> config_violations(const RagConfig& c) {
  std::vector<std::string> out;
  if (c.embedding_model.empty()) out.emplace_back("embedding_model is empty");
  if (c.response_model.empty()) out.emplace_back("response_model is empty");
  if (c.rerank_model && c.rerank_model->empty()) out.emplace_back("rerank_model is empty");
  if (c.chunk_size <= 0) out.emplace_back("chunk_size must be > 0");
  if (c.chunk_overlap < 0) out.emplace_back("chunk_overlap must be >= 0");
  if (c.chunk_overlap >= c.chunk_size) out.emplace_back("chunk_overlap must be < chunk_size");
  if (c.retrieval_depth <= 0) out.emplace_back("retrieval_depth must be > 0");
  if (c.top_k <= 0) out.emplace_back("top_k must be > 0");
  if (c.top_k > c.retrieval_depth) out.emplace_back("top_k must be <= retrieval_depth");
  return out;
}

std::string canonical_config_string(const RagConfig& c) {
  std::ostringstream os;
  os << "embedding_model=" << c.embedding_model << '\x1f'
     << "rerank_model=" << c.rerank_model.value_or(std::string(kNoReranker)) << '\x1f'
     << "response_model=" << c.response_model << '\x1f'
     << "chunk_size=" << c.chunk_size << '\x1f'
     << "chunk_overlap=" << c.chunk_overlap << '\x1f'
     << "retrieval_depth=" << c.retrieval_depth << '\x1f'
     << "top_k=" << c.top_k;
  return os.str();
}

std::string canonical_config_id(const RagConfig& config) {
  return "cfg-" + short_digest(canonical_config_string(config));
}

namespace {

template <typename T>
std::string join_value(const T& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else {
    return std::to_string(v);
  }
}

}  // namespace

std::vector<std::string> validate_config_space(const ConfigSpace& s) {
  std::vector<std::string> out;
  auto require = [&](bool non_empty, const char* field) {
    if (!non_empty) out.push_back(std::string("option list '") + field + "' is empty");
  };
  require(!s.embedding_model.empty(), "embedding_model");
  require(!s.rerank_model.empty(), "rerank_model");
  require(!s.response_model.empty(), "response_model");
  require(!s.chunk_size.empty(), "chunk_size");
  require(!s.chunk_overlap.empty(), "chunk_overlap");
  require(!s.retrieval_depth.empty(), "retrieval_depth");
  require(!s.top_k.empty(), "top_k");
  if (!out.empty()) return out;

  for (const auto& e : s.embedding_model)
    if (e.empty()) out.emplace_back("embedding_model option is empty");
  for (const auto& r : s.rerank_model)
    if (r.empty()) out.emplace_back("rerank_model option is empty");
  for (const auto& g : s.response_model)
    if (g.empty()) out.emplace_back("response_model option is empty");

  // Numeric invariants only couple (size, overlap) and (depth, top_k); the
  // string fields cannot make a combination invalid beyond emptiness.
  for (auto size : s.chunk_size) {
    for (auto overlap : s.chunk_overlap) {
      if (size <= 0 || overlap < 0 || overlap >= size) {
        out.push_back("chunk_size=" + join_value(size) + " chunk_overlap=" + join_value(overlap) +
                      ": overlap must be >= 0 and < chunk_size, chunk_size must be > 0");
      }
    }
  }
  for (auto depth : s.retrieval_depth) {
    for (auto k : s.top_k) {
      if (depth <= 0 || k <= 0 || k > depth) {
        out.push_back("retrieval_depth=" + join_value(depth) + " top_k=" + join_value(k) +
                      ": top_k must be in [1, retrieval_depth]");
      }
    }
  }
  return out;
}

namespace {

constexpr std::array<std::string_view, kLabelCount> kLabelCodes = {
    "Correct", "FP1", "FP2", "FP3", "FP4", "FP5", "FP6", "FP7", "Unknown"};
constexpr std::array<std::string_view, kLabelCount> kLabelDisplay = {
    "Correct",
    "FP1: Missing Content",
    "FP2: Missed Top Ranked",
    "FP3: Not in Context",
    "FP4: Not Extracted",
    "FP5: Wrong Format",
    "FP6: Incorrect Specificity",
    "FP7: Incomplete",
    "Unknown"};

}  // namespace

std::string_view label_code(OutcomeLabel l) { return kLabelCodes[label_index(l)]; }
std::string_view label_display(OutcomeLabel l) { return kLabelDisplay[label_index(l)]; }

OutcomeLabel parse_label(std::string_view code) {
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (kLabelCodes[i] == code) return kAllLabels[i];
  }
  throw Error("invalid_label", "unknown outcome label '" + std::string(code) + "'");
}

std::string_view category_code(JudgeCategory c) {
  switch (c) {
    case JudgeCategory::FP6: return "FP6";
    case JudgeCategory::FP7: return "FP7";
    case JudgeCategory::Unknown: return "Unknown";
  }
  return "Unknown";
}

JudgeCategory parse_category(std::string_view code) {
  if (code == "FP6") return JudgeCategory::FP6;
  if (code == "FP7") return JudgeCategory::FP7;
  if (code == "Unknown") return JudgeCategory::Unknown;
  throw Error("invalid_label", "unknown judge category '" + std::string(code) + "'");
}

// ---- JSON -----------------------------------------------------------------

namespace {

template <typename T>
void get_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) it->get_to(out);
}

}  // namespace

void to_json(json& j, const Document& v) {
  j = json{{"doc_id", v.doc_id}, {"title", v.title}, {"body", v.body}, {"metadata", v.metadata}};
}
void from_json(const json& j, Document& v) {
  j.at("doc_id").get_to(v.doc_id);
  get_opt(j, "title", v.title);
  j.at("body").get_to(v.body);
  v.metadata.clear();
  if (auto it = j.find("metadata"); it != j.end() && it->is_object()) {
    for (const auto& [k, val] : it->items()) {
      v.metadata[k] = val.is_string() ? val.get<std::string>() : val.dump();
    }
  }
}

void to_json(json& j, const Chunk& v) {
  j = json{{"chunk_id", v.chunk_id}, {"doc_id", v.doc_id},       {"text", v.text},
           {"char_start", v.char_start}, {"char_end", v.char_end}};
}
void from_json(const json& j, Chunk& v) {
  j.at("chunk_id").get_to(v.chunk_id);
  j.at("doc_id").get_to(v.doc_id);
  j.at("text").get_to(v.text);
  j.at("char_start").get_to(v.char_start);
  j.at("char_end").get_to(v.char_end);
}

void to_json(json& j, const EvidenceRef& v) {
  j = json{{"doc_id", v.doc_id}, {"sentence", v.sentence}};
}
void from_json(const json& j, EvidenceRef& v) {
  v.doc_id.clear();
  get_opt(j, "doc_id", v.doc_id);
  j.at("sentence").get_to(v.sentence);
}

void to_json(json& j, const Question& v) {
  j = json{{"question_id", v.question_id},
           {"text", v.text},
           {"ground_truth", v.ground_truth},
           {"evidence", v.evidence}};
}
void from_json(const json& j, Question& v) {
  j.at("question_id").get_to(v.question_id);
  j.at("text").get_to(v.text);
  j.at("ground_truth").get_to(v.ground_truth);
  v.evidence.clear();
  get_opt(j, "evidence", v.evidence);
}

void to_json(json& j, const RagConfig& v) {
  j = json{{"embedding_model", v.embedding_model},
           {"rerank_model", v.rerank_model ? json(*v.rerank_model) : json(nullptr)},
           {"response_model", v.response_model},
           {"chunk_size", v.chunk_size},
           {"chunk_overlap", v.chunk_overlap},
           {"retrieval_depth", v.retrieval_depth},
           {"top_k", v.top_k}};
}
void from_json(const json& j, RagConfig& v) {
  j.at("embedding_model").get_to(v.embedding_model);
  v.rerank_model.reset();
  if (auto it = j.find("rerank_model"); it != j.end() && it->is_string() &&
                                        it->get<std::string>() != kNoReranker) {
    v.rerank_model = it->get<std::string>();
  }
  j.at("response_model").get_to(v.response_model);
  j.at("chunk_size").get_to(v.chunk_size);
  j.at("chunk_overlap").get_to(v.chunk_overlap);
  j.at("retrieval_depth").get_to(v.retrieval_depth);
  j.at("top_k").get_to(v.top_k);
}

void to_json(json& j, const ConfigSpace& v) {
  j = json{{"embedding_model", v.embedding_model}, {"rerank_model", v.rerank_model},
           {"response_model", v.response_model},   {"chunk_size", v.chunk_size},
           {"chunk_overlap", v.chunk_overlap},     {"retrieval_depth", v.retrieval_depth},
           {"top_k", v.top_k}};
}
void from_json(const json& j, ConfigSpace& v) {
  j.at("embedding_model").get_to(v.embedding_model);
  j.at("rerank_model").get_to(v.rerank_model);
  j.at("response_model").get_to(v.response_model);
  j.at("chunk_size").get_to(v.chunk_size);
  j.at("chunk_overlap").get_to(v.chunk_overlap);
  j.at("retrieval_depth").get_to(v.retrieval_depth);
  j.at("top_k").get_to(v.top_k);
}

void to_json(json& j, const ParsedResponse& v) {
  j = json{{"supporting_sentences", v.supporting_sentences},
           {"final_answer", v.final_answer},
           {"strict_parse_ok", v.strict_parse_ok},
           {"raw", v.raw}};
}
void from_json(const json& j, ParsedResponse& v) {
  j.at("supporting_sentences").get_to(v.supporting_sentences);
  j.at("final_answer").get_to(v.final_answer);
  j.at("strict_parse_ok").get_to(v.strict_parse_ok);
  j.at("raw").get_to(v.raw);
}

void to_json(json& j, const ScoredChunk& v) { j = json{{"chunk_id", v.chunk_id}, {"score", v.score}}; }
void from_json(const json& j, ScoredChunk& v) {
  j.at("chunk_id").get_to(v.chunk_id);
  j.at("score").get_to(v.score);
}

void to_json(json& j, const CoverageStats& v) {
  j = json{{"evidence_total", v.evidence_total},
           {"evidence_in_rerank_range", v.evidence_in_rerank_range},
           {"evidence_in_context", v.evidence_in_context},
           {"glyph_fraction", v.glyph_fraction()},
           {"corpus_wide", v.corpus_wide}};
}
void from_json(const json& j, CoverageStats& v) {
  j.at("evidence_total").get_to(v.evidence_total);
  j.at("evidence_in_rerank_range").get_to(v.evidence_in_rerank_range);
  j.at("evidence_in_context").get_to(v.evidence_in_context);
  v.corpus_wide = j.value("corpus_wide", false);
}

void to_json(json& j, const JudgeVerdict& v) {
  j = json{{"correct", v.correct},
           {"category", v.category ? json(category_code(*v.category)) : json(nullptr)},
           {"rationale", v.rationale}};
}
void from_json(const json& j, JudgeVerdict& v) {
  j.at("correct").get_to(v.correct);
  v.category.reset();
  if (auto it = j.find("category"); it != j.end() && it->is_string()) {
    v.category = parse_category(it->get<std::string>());
  }
  v.rationale = j.value("rationale", std::string{});
}

void to_json(json& j, OutcomeLabel v) { j = std::string(label_code(v)); }
void from_json(const json& j, OutcomeLabel& v) { v = parse_label(j.get<std::string>()); }

void to_json(json& j, const RunRecord& v) {
  j = json{{"config_id", v.config_id},
           {"question_id", v.question_id},
           {"retrieved", v.retrieved},
           {"reranked", v.reranked ? json(*v.reranked) : json(nullptr)},
           {"context_chunk_ids", v.context_chunk_ids},
           {"relevant_chunk_ids", v.relevant_chunk_ids},
           {"response", v.response},
           {"judge_verdict", v.judge_verdict},
           {"adjudication", v.adjudication ? json(*v.adjudication) : json(nullptr)},
           {"outcome", v.outcome},
           {"coverage", v.coverage},
           {"error", v.error ? json(*v.error) : json(nullptr)}};
}
void from_json(const json& j, RunRecord& v) {
  j.at("config_id").get_to(v.config_id);
  j.at("question_id").get_to(v.question_id);
  j.at("retrieved").get_to(v.retrieved);
  v.reranked.reset();
  if (auto it = j.find("reranked"); it != j.end() && !it->is_null()) {
    v.reranked = it->get<std::vector<ScoredChunk>>();
  }
  j.at("context_chunk_ids").get_to(v.context_chunk_ids);
  v.relevant_chunk_ids.clear();
  get_opt(j, "relevant_chunk_ids", v.relevant_chunk_ids);
  j.at("response").get_to(v.response);
  j.at("judge_verdict").get_to(v.judge_verdict);
  v.adjudication.reset();
  if (auto it = j.find("adjudication"); it != j.end() && !it->is_null()) {
    v.adjudication = it->get<JudgeVerdict>();
  }
  j.at("outcome").get_to(v.outcome);
  j.at("coverage").get_to(v.coverage);
  v.error.reset();
  if (auto it = j.find("error"); it != j.end() && it->is_string()) v.error = it->get<std::string>();
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path);
  std::vector<json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error("parse_error", path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string to_jsonl_line(const json& j) { return j.dump() + "\n"; }

namespace {

template <typename T>
T decode_line(const json& j, const std::string& path, std::size_t line_no) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw Error("parse_error", path + ":" + std::to_string(line_no) + ": " + e.what());
  }
}

// read_jsonl skips blank lines, so line numbers are recomputed here.
std::vector<std::pair<std::size_t, json>> numbered_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path);
  std::vector<std::pair<std::size_t, json>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.emplace_back(line_no, json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error("parse_error", path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<Document> load_corpus(const std::string& path) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  for (const auto& [line_no, j] : numbered_jsonl(path)) {
    auto doc = decode_line<Document>(j, path, line_no);
    const auto where = path + ":" + std::to_string(line_no) + ": ";
    if (doc.doc_id.empty()) throw Error("parse_error", where + "doc_id is empty");
    if (doc.body.empty()) throw Error("parse_error", where + "body is empty");
    if (!seen.insert(doc.doc_id).second) {
      throw Error("parse_error", where + "duplicate doc_id '" + doc.doc_id + "'");
    }
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw Error("parse_error", path + ": corpus is empty");
  return docs;
}

std::vector<Question> load_questions(const std::string& path) {
  std::vector<Question> qs;
  std::set<std::string> seen;
  for (const auto& [line_no, j] : numbered_jsonl(path)) {
    auto q = decode_line<Question>(j, path, line_no);
    const auto where = path + ":" + std::to_string(line_no) + ": ";
    if (q.question_id.empty()) throw Error("parse_error", where + "question_id is empty");
    if (!seen.insert(q.question_id).second) {
      throw Error("parse_error", where + "duplicate question_id '" + q.question_id + "'");
    }
    if (q.evidence.empty() && !is_unanswerable(q.ground_truth)) {
      throw Error("parse_error", where + "evidence may be empty only for unanswerable questions");
    }
    for (const auto& e : q.evidence) {
      if (text::trim(e.sentence).empty()) throw Error("parse_error", where + "empty evidence sentence");
    }
    qs.push_back(std::move(q));
  }
  if (qs.empty()) throw Error("parse_error", path + ": question set is empty");
  return qs;
}

}  // namespace raglab
