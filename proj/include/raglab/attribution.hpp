#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raglab/providers.hpp"
#include "raglab/types.hpp"

namespace raglab::attribution {

struct AttributionPolicy {
  double rerank_range_threshold = 0.7;
  double context_threshold = 0.7;
  double fp4_threshold = 1.0;  // fixed
  std::string unanswerable_sentinel{kUnanswerableSentinel};
};

std::vector<std::string> policy_violations(const AttributionPolicy& policy);

struct CoverageFractions {
  double range = 1.0;
  double context = 1.0;
};

// Each evidence sentence counts once if found in any chunk of the set; no
// evidence means both fractions are 1.
CoverageFractions coverage_fractions(const Question& question, std::span<const std::string> range_ids,
                                     std::span<const std::string> context_ids,
                                     std::span<const Chunk> chunks);

// Everything the cascade looks at, independent of where it came from.
struct CascadeFacts {
  bool verdict_correct = false;
  bool unanswerable = false;        // ground truth is the sentinel
  bool answer_is_sentinel = false;  // answer is sentinel-equivalent
  bool strict_parse_ok = true;
  double f_range = 1.0;
  double f_context = 1.0;
  bool operator==(const CascadeFacts&) const = default;
};

struct Attribution {
  OutcomeLabel label = OutcomeLabel::Unknown;
  std::optional<JudgeVerdict> adjudication;
};

// Adjudicator invoked only when the cascade reaches its last step. It may
// throw; the cascade then yields Unknown with rationale "judge_error".
using Adjudicator = std::function<JudgeVerdict()>;

// Checks in order, first match wins: Correct, FP1, FP5, FP2, FP3, FP4,
// adjudication (FP6 | FP7 | Unknown).
Attribution classify(const CascadeFacts& facts, const AttributionPolicy& policy,
                     const Adjudicator& adjudicate);

// Restricted cascade for runs whose context was curated by hand: retrieval
// was bypassed, so FP2 and FP3 are never produced.
Attribution classify_curated(const CascadeFacts& facts, const AttributionPolicy& policy,
                             const Adjudicator& adjudicate);

bool is_sentinel_ground_truth(const std::string& ground_truth, const AttributionPolicy& policy);
bool is_sentinel_answer(const std::string& answer, const AttributionPolicy& policy);

CascadeFacts facts_for(const RunRecord& record, const Question& question,
                       const AttributionPolicy& policy);

// Attributes a judged run record; adjudication requests go to `judge`.
Attribution attribute(const RunRecord& record, const Question& question,
                      const AttributionPolicy& policy, providers::Judge& judge);

}  // namespace raglab::attribution
