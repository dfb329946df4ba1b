#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "raglab/attribution.hpp"
#include "raglab/comparison.hpp"
#include "raglab/corpus.hpp"
#include "raglab/metrics.hpp"
#include "raglab/providers.hpp"
#include "raglab/retrieval.hpp"
#include "raglab/types.hpp"

namespace raglab::sweep {

// Cartesian product in lexicographic order of option indices, fields in
// RagConfig order with top_k varying fastest. Throws Error{"invalid_space"}
// listing every violation.
std::vector<RagConfig> expand(const ConfigSpace& space);

enum class Status { running, complete, failed };
std::string_view status_name(Status s);

struct ConfigEntry {
  std::string config_id;
  RagConfig config;
  std::string chunk_store;  // relative to the sweep directory
  std::string index;        // relative to the sweep directory
};

struct SweepManifest {
  std::string sweep_id;
  ConfigSpace space;
  std::vector<std::string> config_ids;
  std::vector<ConfigEntry> configs;
  std::map<std::string, metrics::MetricReport> reports;
  std::map<std::string, comparison::LabelHistogram> histograms;
  Status status = Status::running;
  std::int64_t seed = 0;
  std::string judge_model;
  bool snap_to_whitespace = false;
  double max_error_rate = 0.5;
  std::int64_t n_questions = 0;
  std::int64_t n_errors = 0;

  const ConfigEntry& entry(const std::string& config_id) const;  // Error{"not_found"}
};

void to_json(json& j, const SweepManifest& v);
void from_json(const json& j, SweepManifest& v);

// Contents of a sweep definition file: the option grid plus run settings.
struct SweepSpec {
  std::optional<std::string> sweep_id;
  ConfigSpace space;
  std::string judge_model = "judge";
  std::int64_t seed = 0;
  bool snap_to_whitespace = false;
  double max_error_rate = 0.5;
};

SweepSpec load_sweep_spec(const std::string& path);
void from_json(const json& j, SweepSpec& v);

// Validates the spec and expands it into a fresh manifest. The default sweep
// id is a digest of the space, settings and inputs.
SweepManifest plan(const SweepSpec& spec, const std::vector<Document>& corpus,
                   const std::vector<Question>& questions);

struct ExecuteOptions {
  std::size_t workers = 1;
  // Stop after this many new runs, leaving the sweep resumable.
  std::optional<std::size_t> max_new_runs;
};

struct ExecuteStats {
  std::size_t new_runs = 0;
  std::size_t skipped_runs = 0;
  std::size_t chunk_store_builds = 0;
  std::size_t index_builds = 0;
};

std::string sweep_dir(const std::string& store_root, const std::string& sweep_id);

// Runs every missing (config, question) pair of `manifest` under
// `<store_root>/sweeps/<sweep_id>/`, resuming from whatever runs.jsonl holds.
// On completion runs.jsonl is rewritten in (config_id, question_id) order and
// the manifest gains reports and histograms.
SweepManifest execute(const std::string& store_root, SweepManifest manifest,
                      const std::vector<Document>& corpus, const std::vector<Question>& questions,
                      const providers::Registry& registry, const ExecuteOptions& options,
                      ExecuteStats* stats = nullptr);

// Read-mostly view over one sweep directory. Safe for concurrent readers;
// perturbation appends are serialized.
class SweepStore {
 public:
  static std::shared_ptr<SweepStore> open(const std::string& dir);

  const std::string& dir() const { return dir_; }
  const SweepManifest& manifest() const { return manifest_; }
  const providers::Registry& registry() const { return registry_; }

  const std::vector<RunRecord>& runs(const std::string& config_id) const;  // Error{"not_found"}
  const RunRecord* run(const std::string& config_id, const std::string& question_id) const;
  const Question* question(const std::string& question_id) const;
  const std::vector<Question>& questions() const { return questions_; }

  // Chunks of the config's chunk store, tokenized lazily.
  const corpus::EvidenceLocator& chunks(const std::string& config_id) const;
  // Finds a chunk in any chunk store of the sweep, preferring `config_id`'s.
  std::optional<std::pair<Chunk, std::string>> resolve_chunk(const std::string& config_id,
                                                             const std::string& chunk_id) const;

  std::string perturbation_log_path() const;

 private:
  std::string dir_;
  SweepManifest manifest_;
  providers::Registry registry_;
  std::vector<Question> questions_;
  std::map<std::string, std::size_t> question_index_;
  std::map<std::string, std::vector<RunRecord>> runs_;
  mutable std::map<std::string, std::unique_ptr<corpus::EvidenceLocator>> locators_;
  mutable std::mutex locator_mutex_;
  const corpus::EvidenceLocator& locator_for_store(const std::string& store) const;
};

// Resolves a user-supplied path to a sweep directory: either a directory
// holding manifest.json, or a store root holding exactly one sweep.
std::string resolve_sweep_dir(const std::string& path);

// Sweep directories under a store root (or the path itself if it is one).
std::vector<std::string> list_sweep_dirs(const std::string& path);

}  // namespace raglab::sweep
