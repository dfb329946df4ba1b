#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace raglab {

using json = nlohmann::json;

// Every failure surfaced by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline constexpr std::string_view kUnanswerableSentinel = "insufficient information";
inline constexpr std::string_view kNoReranker = "none";

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;
  std::map<std::string, std::string> metadata;
  bool operator==(const Document&) const = default;
};

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  std::string text;
  std::int64_t char_start = 0;
  std::int64_t char_end = 0;
  bool operator==(const Chunk&) const = default;
};

std::string make_chunk_id(std::string_view doc_id, std::int64_t char_start);

struct EvidenceRef {
  std::string doc_id;  // may be empty: matched corpus-wide
  std::string sentence;
  bool operator==(const EvidenceRef&) const = default;
};

struct Question {
  std::string question_id;
  std::string text;
  std::string ground_truth;
  std::vector<EvidenceRef> evidence;
  bool operator==(const Question&) const = default;
};

// Case-insensitive, whitespace-trimmed comparison against the sentinel.
bool is_unanswerable(std::string_view ground_truth);

struct RagConfig {
  std::string embedding_model;
  std::optional<std::string> rerank_model;
  std::string response_model;
  std::int64_t chunk_size = 0;
  std::int64_t chunk_overlap = 0;
  std::int64_t retrieval_depth = 0;
  std::int64_t top_k = 0;
  bool operator==(const RagConfig&) const = default;
};

// Empty when the config satisfies every field invariant.
std::vector<std::string> config_violations(const RagConfig& config);

// "cfg-" + 16 hex chars of SHA-256 over the field-ordered canonical string.
std::string canonical_config_id(const RagConfig& config);
std::string canonical_config_string(const RagConfig& config);

struct ConfigSpace {
  std::vector<std::string> embedding_model;
  std::vector<std::string> rerank_model;  // "none" means no reranker
  std::vector<std::string> response_model;
  std::vector<std::int64_t> chunk_size;
  std::vector<std::int64_t> chunk_overlap;
  std::vector<std::int64_t> retrieval_depth;
  std::vector<std::int64_t> top_k;
  bool operator==(const ConfigSpace&) const = default;
};

// One message per offending combination (or empty option list).
std::vector<std::string> validate_config_space(const ConfigSpace& space);

struct ParsedResponse {
  std::vector<std::string> supporting_sentences;
  std::string final_answer;
  bool strict_parse_ok = false;
  std::string raw;
  bool operator==(const ParsedResponse&) const = default;
};

struct ScoredChunk {
  std::string chunk_id;
  double score = 0.0;
  bool operator==(const ScoredChunk&) const = default;
};

struct CoverageStats {
  std::int64_t evidence_total = 0;
  std::int64_t evidence_in_rerank_range = 0;
  std::int64_t evidence_in_context = 0;
  bool corpus_wide = false;  // some evidence lacked doc_id
  bool operator==(const CoverageStats&) const = default;

  double glyph_fraction() const {
    return evidence_total > 0
               ? static_cast<double>(evidence_in_rerank_range) / static_cast<double>(evidence_total)
               : 1.0;
  }
  double context_fraction() const {
    return evidence_total > 0
               ? static_cast<double>(evidence_in_context) / static_cast<double>(evidence_total)
               : 1.0;
  }
};

// Display order is the declaration order.
enum class OutcomeLabel : std::uint8_t {
  Correct,
  FP1_MissingContent,
  FP2_MissedTopRanked,
  FP3_NotInContext,
  FP4_NotExtracted,
  FP5_WrongFormat,
  FP6_IncorrectSpecificity,
  FP7_Incomplete,
  Unknown,
};

inline constexpr std::size_t kLabelCount = 9;
inline constexpr std::array<OutcomeLabel, kLabelCount> kAllLabels = {
    OutcomeLabel::Correct,          OutcomeLabel::FP1_MissingContent,
    OutcomeLabel::FP2_MissedTopRanked, OutcomeLabel::FP3_NotInContext,
    OutcomeLabel::FP4_NotExtracted, OutcomeLabel::FP5_WrongFormat,
    OutcomeLabel::FP6_IncorrectSpecificity, OutcomeLabel::FP7_Incomplete,
    OutcomeLabel::Unknown};

constexpr std::size_t label_index(OutcomeLabel l) { return static_cast<std::size_t>(l); }
std::string_view label_code(OutcomeLabel l);     // "Correct", "FP1", ..., "Unknown"
std::string_view label_display(OutcomeLabel l);  // "FP2: Missed Top Ranked"
OutcomeLabel parse_label(std::string_view code);  // throws Error{"invalid_label"}

enum class JudgeCategory : std::uint8_t { FP6, FP7, Unknown };
std::string_view category_code(JudgeCategory c);
JudgeCategory parse_category(std::string_view code);

struct JudgeVerdict {
  bool correct = false;
  std::optional<JudgeCategory> category;
  std::string rationale;
  bool operator==(const JudgeVerdict&) const = default;
};

struct RunRecord {
  std::string config_id;
  std::string question_id;
  std::vector<ScoredChunk> retrieved;
  std::optional<std::vector<ScoredChunk>> reranked;
  std::vector<std::string> context_chunk_ids;
  std::vector<std::string> relevant_chunk_ids;  // sorted; chunks holding any evidence
  ParsedResponse response;
  JudgeVerdict judge_verdict;
  std::optional<JudgeVerdict> adjudication;
  OutcomeLabel outcome = OutcomeLabel::Unknown;
  CoverageStats coverage;
  std::optional<std::string> error;
  bool operator==(const RunRecord&) const = default;

  bool ok() const { return !error.has_value(); }
  // Reranked list when present, otherwise the raw retrieval.
  const std::vector<ScoredChunk>& final_ranking() const {
    return reranked ? *reranked : retrieved;
  }
};

void to_json(json& j, const Document& v);
void from_json(const json& j, Document& v);
void to_json(json& j, const Chunk& v);
void from_json(const json& j, Chunk& v);
void to_json(json& j, const EvidenceRef& v);
void from_json(const json& j, EvidenceRef& v);
void to_json(json& j, const Question& v);
void from_json(const json& j, Question& v);
void to_json(json& j, const RagConfig& v);
void from_json(const json& j, RagConfig& v);
void to_json(json& j, const ConfigSpace& v);
void from_json(const json& j, ConfigSpace& v);
void to_json(json& j, const ParsedResponse& v);
void from_json(const json& j, ParsedResponse& v);
void to_json(json& j, const ScoredChunk& v);
void from_json(const json& j, ScoredChunk& v);
void to_json(json& j, const CoverageStats& v);
void from_json(const json& j, CoverageStats& v);
void to_json(json& j, const JudgeVerdict& v);
void from_json(const json& j, JudgeVerdict& v);
void to_json(json& j, const RunRecord& v);
void from_json(const json& j, RunRecord& v);
void to_json(json& j, OutcomeLabel v);
void from_json(const json& j, OutcomeLabel& v);

// JSONL helpers. read_jsonl reports the 1-based line number of a malformed
// line through Error{"parse_error"}. Blank lines are skipped.
std::vector<json> read_jsonl(const std::string& path);
std::string to_jsonl_line(const json& j);

std::vector<Document> load_corpus(const std::string& path);
std::vector<Question> load_questions(const std::string& path);

}  // namespace raglab

namespace raglab {

// Prompt handed to a generator: fixed instructions plus the question and its
// numbered context.
struct PromptBundle {
  std::string system_instructions;
  std::string user_payload;
  bool operator==(const PromptBundle&) const = default;
};

}  // namespace raglab
