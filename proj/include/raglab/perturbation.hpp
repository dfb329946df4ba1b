#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "raglab/attribution.hpp"
#include "raglab/providers.hpp"
#include "raglab/types.hpp"

namespace raglab::perturbation {

struct PerturbationRequest {
  std::string config_id;
  std::string question_id;
  std::vector<std::string> context_chunk_ids;  // ordered; may name chunks of another config
  std::string note;
  bool empty_context = false;  // must be set to send an empty context on purpose
};

struct ContextEntry {
  std::string chunk_id;
  std::string source;  // chunk store the text came from
};

struct PerturbationResult {
  std::string stored_id;
  std::string config_id;
  std::string question_id;
  std::string note;
  std::vector<ContextEntry> context;
  std::string answer_orig;
  std::string answer_pert;
  std::string raw_orig;
  std::string raw_pert;
  bool verdict_orig = false;
  bool verdict_pert = false;
  OutcomeLabel context_label = OutcomeLabel::Unknown;  // never FP2 / FP3
  std::optional<JudgeVerdict> adjudication;
};

struct ResolvedChunk {
  Chunk chunk;
  std::string source;
};

// Returns nullopt for ids that cannot be resolved.
using ChunkResolver = std::function<std::optional<ResolvedChunk>(const std::string&)>;

// Digest of (config, question, ordered context ids).
std::string perturbation_id(const PerturbationRequest& req);

// Regenerates an answer for a curated context. The base record is read only.
// Unresolvable ids raise Error{"unresolvable_chunk"} naming the id.
PerturbationResult perturb_and_regenerate(const PerturbationRequest& req, const RunRecord& base,
                                          const Question& question, const ChunkResolver& resolve,
                                          providers::Generator& generator, providers::Judge& judge,
                                          const attribution::AttributionPolicy& policy = {});

void to_json(json& j, const PerturbationRequest& v);
void from_json(const json& j, PerturbationRequest& v);
void to_json(json& j, const PerturbationResult& v);
void from_json(const json& j, PerturbationResult& v);

// Append-only JSONL log; appends from concurrent callers are serialized.
void append_to_log(const std::string& path, const PerturbationResult& result);
std::vector<PerturbationResult> read_log(const std::string& path);

}  // namespace raglab::perturbation
