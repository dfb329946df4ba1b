#pragma once

#include <span>
#include <string>

#include "raglab/attribution.hpp"
#include "raglab/corpus.hpp"
#include "raglab/providers.hpp"
#include "raglab/retrieval.hpp"
#include "raglab/types.hpp"

namespace raglab::pipeline {

inline constexpr std::string_view kNoContextMarker = "(no context retrieved)";

// Chunks appear in the given order, each tagged with its 1-based position and
// chunk_id.
PromptBundle assemble_prompt(const Question& question, std::span<const Chunk> context);

// Never fails. Tiers: strict JSON; first balanced {...} block; key scan;
// empty answer. Only the first tier sets strict_parse_ok.
ParsedResponse parse_response_lenient(const std::string& raw);

// Everything one configuration needs to answer questions. Providers must be
// callable concurrently.
struct Resources {
  const corpus::EvidenceLocator& chunks;
  const retrieval::VectorIndex& index;
  providers::Embedder& embedder;
  providers::Reranker* reranker = nullptr;
  providers::Generator& generator;
  providers::Judge& judge;
  attribution::AttributionPolicy policy{};
};

CoverageStats coverage_for(const Question& question, const corpus::EvidenceLocator& chunks,
                           std::span<const std::string> range_ids,
                           std::span<const std::string> context_ids);

// Runs one question end to end. Provider failures produce a record with
// `error` set instead of throwing.
RunRecord run_question(const RagConfig& config, const Question& question, const Resources& res);

}  // namespace raglab::pipeline
