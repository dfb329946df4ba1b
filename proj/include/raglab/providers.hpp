#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "raglab/types.hpp"

namespace raglab::providers {

enum class Kind { embed, rerank, generate, judge };
enum class Mode { http, mock_lexical, mock_scripted };

std::string_view kind_name(Kind k);
std::string_view mode_name(Mode m);

struct ProviderSpec {
  Kind kind = Kind::embed;
  std::string name;
  Mode mode = Mode::mock_lexical;
  std::optional<std::string> endpoint;      // http base URL, e.g. http://host:port/v1
  std::optional<std::string> auth_env_var;  // bearer token source
  std::optional<std::string> model;         // remote model name; defaults to `name`
  std::optional<std::int64_t> dimension;    // embed
  std::optional<std::string> fixture;       // mock_scripted fixture path
  // Mock judge specificity table: broader answer -> more specific terms it covers.
  std::map<std::string, std::vector<std::string>> specificity;
  int max_in_flight = 4;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{500};
  bool operator==(const ProviderSpec&) const = default;
};

// Empty when the spec is usable.
std::vector<std::string> spec_violations(const ProviderSpec& spec);

void to_json(json& j, const ProviderSpec& v);
void from_json(const json& j, ProviderSpec& v);

// Name -> spec. Relative fixture paths resolve against the registry file's
// directory.
class Registry {
 public:
  Registry() = default;
  static Registry load(const std::string& path);
  static Registry from_json(const json& j, const std::string& base_dir = ".");

  void add(ProviderSpec spec);
  const ProviderSpec& get(const std::string& name) const;  // Error{"not_found"}
  bool contains(const std::string& name) const { return specs_.contains(name); }
  const std::map<std::string, ProviderSpec>& specs() const { return specs_; }
  json to_json() const;

 private:
  std::map<std::string, ProviderSpec> specs_;
};

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<Vector> embed(std::span<const std::string> texts) = 0;
  virtual std::size_t dimension() const = 0;
};

class Reranker {
 public:
  virtual ~Reranker() = default;
  // One score per chunk, sorted by score descending then chunk_id ascending.
  virtual std::vector<ScoredChunk> rerank(const std::string& query, std::span<const Chunk> chunks) = 0;
};

struct GenerationRequest {
  std::string question_id;
  std::string question;
  std::vector<Chunk> context;
  PromptBundle prompt;
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string generate(const GenerationRequest& request) = 0;
};

struct JudgeRequest {
  std::string question;
  std::string ground_truth;
  std::string final_answer;
  std::string raw_response;
  bool adjudicate = false;
};

class Judge {
 public:
  virtual ~Judge() = default;
  // Throws Error{"judge_error"} when a remote reply cannot be interpreted.
  virtual JudgeVerdict judge(const JudgeRequest& request) = 0;
};

std::unique_ptr<Embedder> make_embedder(const ProviderSpec& spec);
std::unique_ptr<Reranker> make_reranker(const ProviderSpec& spec);
std::unique_ptr<Generator> make_generator(const ProviderSpec& spec);
std::unique_ptr<Judge> make_judge(const ProviderSpec& spec);

// One-shot conveniences mirroring the provider operations.
std::vector<Vector> embed_texts(const ProviderSpec& spec, std::span<const std::string> texts);
std::vector<ScoredChunk> rerank(const ProviderSpec& spec, const std::string& query,
                                std::span<const Chunk> chunks);
std::string generate(const ProviderSpec& spec, const GenerationRequest& request);
JudgeVerdict judge(const ProviderSpec& spec, const JudgeRequest& request);

// Key component identifying an ordered context in scripted fixtures.
std::string context_digest(std::span<const std::string> chunk_ids);
std::string scripted_key(const std::string& question_id, const std::string& digest);

// Deterministic lexical answer synthesis used by the mock_lexical generator.
std::string lexical_answer(const std::string& question, std::span<const Chunk> context);

// Mock judge rules, exposed for reuse (sentinel-equivalence) and tests.
bool answer_matches(const std::string& final_answer, const std::string& ground_truth);
JudgeVerdict mock_judge(const JudgeRequest& request,
                        const std::map<std::string, std::vector<std::string>>& specificity);

// Judge prompt sent to http judges; non-normative template.
std::string judge_prompt(const JudgeRequest& request);

}  // namespace raglab::providers
