#include "raglab/attribution.hpp"

#include <set>

#include "raglab/corpus.hpp"
#include "raglab/text.hpp"

namespace raglab::attribution {

std::vector<std::string> policy_violations(const AttributionPolicy& p) {
  std::vector<std::string> out;
  if (!(p.rerank_range_threshold > 0.0 && p.rerank_range_threshold <= 1.0)) {
    out.emplace_back("rerank_range_threshold must be in (0, 1]");
  }
  if (!(p.context_threshold > 0.0 && p.context_threshold <= 1.0)) {
    out.emplace_back("context_threshold must be in (0, 1]");
  }
  if (p.fp4_threshold != 1.0) out.emplace_back("fp4_threshold is fixed at 1.0");
  if (text::normalize(p.unanswerable_sentinel).empty()) out.emplace_back("sentinel is empty");
  return out;
}

CoverageFractions coverage_fractions(const Question& question, std::span<const std::string> range_ids,
                                     std::span<const std::string> context_ids,
                                     std::span<const Chunk> chunks) {
  if (question.evidence.empty()) return {1.0, 1.0};
  const std::set<std::string> in_range(range_ids.begin(), range_ids.end());
  const std::set<std::string> in_context(context_ids.begin(), context_ids.end());
  std::size_t range_hits = 0;
  std::size_t context_hits = 0;
  for (const auto& e : question.evidence) {
    bool r = false;
    bool c = false;
    for (const auto& chunk : chunks) {
      const bool wanted_r = !r && in_range.contains(chunk.chunk_id);
      const bool wanted_c = !c && in_context.contains(chunk.chunk_id);
      if (!wanted_r && !wanted_c) continue;
      if (corpus::find_evidence_in_chunk(e, chunk)) {
        r = r || wanted_r;
        c = c || wanted_c;
      }
    }
    range_hits += r;
    context_hits += c;
  }
  const auto total = static_cast<double>(question.evidence.size());
  return {static_cast<double>(range_hits) / total, static_cast<double>(context_hits) / total};
}

bool is_sentinel_ground_truth(const std::string& ground_truth, const AttributionPolicy& policy) {
  return text::normalize(ground_truth) == text::normalize(policy.unanswerable_sentinel);
}

bool is_sentinel_answer(const std::string& answer, const AttributionPolicy& policy) {
  return text::contains_token_sequence(answer, policy.unanswerable_sentinel);
}

namespace {

Attribution adjudicated(const Adjudicator& adjudicate) {
  Attribution out;
  try {
    auto verdict = adjudicate();
    out.label = OutcomeLabel::Unknown;
    if (verdict.category == JudgeCategory::FP6) out.label = OutcomeLabel::FP6_IncorrectSpecificity;
    if (verdict.category == JudgeCategory::FP7) out.label = OutcomeLabel::FP7_Incomplete;
    out.adjudication = std::move(verdict);
  } catch (const std::exception&) {
    out.label = OutcomeLabel::Unknown;
    out.adjudication = JudgeVerdict{false, JudgeCategory::Unknown, "judge_error"};
  }
  return out;
}

}  // namespace

Attribution classify(const CascadeFacts& f, const AttributionPolicy& policy,
                     const Adjudicator& adjudicate) {
  if (f.verdict_correct) return {OutcomeLabel::Correct, std::nullopt};
  if (f.unanswerable && !f.answer_is_sentinel) return {OutcomeLabel::FP1_MissingContent, std::nullopt};
  if (!f.strict_parse_ok) return {OutcomeLabel::FP5_WrongFormat, std::nullopt};
  if (f.f_range < policy.rerank_range_threshold) return {OutcomeLabel::FP2_MissedTopRanked, std::nullopt};
  if (f.f_context < policy.context_threshold) return {OutcomeLabel::FP3_NotInContext, std::nullopt};
  if (f.f_context >= policy.fp4_threshold) return {OutcomeLabel::FP4_NotExtracted, std::nullopt};
  return adjudicated(adjudicate);
}

Attribution classify_curated(const CascadeFacts& f, const AttributionPolicy& policy,
                             const Adjudicator& adjudicate) {
  if (f.verdict_correct) return {OutcomeLabel::Correct, std::nullopt};
  if (f.unanswerable && !f.answer_is_sentinel) return {OutcomeLabel::FP1_MissingContent, std::nullopt};
  if (!f.strict_parse_ok) return {OutcomeLabel::FP5_WrongFormat, std::nullopt};
  if (f.f_context >= policy.fp4_threshold) return {OutcomeLabel::FP4_NotExtracted, std::nullopt};
  return adjudicated(adjudicate);
}

CascadeFacts facts_for(const RunRecord& record, const Question& question,
                       const AttributionPolicy& policy) {
  CascadeFacts f;
  f.verdict_correct = record.judge_verdict.correct;
  f.unanswerable = is_sentinel_ground_truth(question.ground_truth, policy);
  f.answer_is_sentinel = is_sentinel_answer(record.response.final_answer, policy);
  f.strict_parse_ok = record.response.strict_parse_ok;
  f.f_range = record.coverage.glyph_fraction();
  f.f_context = record.coverage.context_fraction();
  return f;
}

Attribution attribute(const RunRecord& record, const Question& question,
                      const AttributionPolicy& policy, providers::Judge& judge) {
  return classify(facts_for(record, question, policy), policy, [&] {
    return judge.judge(providers::JudgeRequest{question.text, question.ground_truth,
                                               record.response.final_answer, record.response.raw,
                                               true});
  });
}

}  // namespace raglab::attribution
