#include "raglab/providers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <semaphore>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "raglab/digest.hpp"
#include "raglab/text.hpp"

namespace raglab::providers {

namespace fs = std::filesystem;

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::embed: return "embed";
    case Kind::rerank: return "rerank";
    case Kind::generate: return "generate";
    case Kind::judge: return "judge";
  }
  return "embed";
}

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::http: return "http";
    case Mode::mock_lexical: return "mock_lexical";
    case Mode::mock_scripted: return "mock_scripted";
  }
  return "mock_lexical";
}

namespace {

Kind parse_kind(const std::string& s) {
  for (auto k : {Kind::embed, Kind::rerank, Kind::generate, Kind::judge})
    if (kind_name(k) == s) return k;
  throw Error("invalid_argument", "unknown provider kind '" + s + "'");
}

Mode parse_mode(const std::string& s) {
  for (auto m : {Mode::http, Mode::mock_lexical, Mode::mock_scripted})
    if (mode_name(m) == s) return m;
  throw Error("invalid_argument", "unknown provider mode '" + s + "'");
}

}  // namespace

std::vector<std::string> spec_violations(const ProviderSpec& s) {
  std::vector<std::string> out;
  if (s.name.empty()) out.emplace_back("provider name is empty");
  if (s.mode == Mode::http && !s.endpoint) out.push_back(s.name + ": http mode requires endpoint");
  if (s.mode == Mode::mock_scripted && !s.fixture) {
    out.push_back(s.name + ": mock_scripted mode requires fixture");
  }
  if (s.mode == Mode::mock_scripted && s.kind != Kind::generate) {
    out.push_back(s.name + ": mock_scripted is only available for generate providers");
  }
  if (s.kind == Kind::embed && s.mode == Mode::mock_lexical && (!s.dimension || *s.dimension <= 0)) {
    out.push_back(s.name + ": mock_lexical embedder requires dimension > 0");
  }
  if (s.max_in_flight <= 0) out.push_back(s.name + ": max_in_flight must be > 0");
  if (s.max_attempts <= 0) out.push_back(s.name + ": max_attempts must be > 0");
  return out;
}

void to_json(json& j, const ProviderSpec& v) {
  j = json{{"kind", kind_name(v.kind)}, {"name", v.name}, {"mode", mode_name(v.mode)}};
  if (v.endpoint) j["endpoint"] = *v.endpoint;
  if (v.auth_env_var) j["auth_env_var"] = *v.auth_env_var;
  if (v.model) j["model"] = *v.model;
  if (v.dimension) j["dimension"] = *v.dimension;
  if (v.fixture) j["fixture"] = *v.fixture;
  if (!v.specificity.empty()) j["specificity"] = v.specificity;
  j["max_in_flight"] = v.max_in_flight;
  j["max_attempts"] = v.max_attempts;
  j["backoff_base_ms"] = v.backoff_base.count();
}

void from_json(const json& j, ProviderSpec& v) {
  v = ProviderSpec{};
  v.kind = parse_kind(j.at("kind").get<std::string>());
  j.at("name").get_to(v.name);
  v.mode = parse_mode(j.at("mode").get<std::string>());
  if (j.contains("endpoint")) v.endpoint = j["endpoint"].get<std::string>();
  if (j.contains("auth_env_var")) v.auth_env_var = j["auth_env_var"].get<std::string>();
  if (j.contains("model")) v.model = j["model"].get<std::string>();
  if (j.contains("dimension")) v.dimension = j["dimension"].get<std::int64_t>();
  if (j.contains("fixture")) v.fixture = j["fixture"].get<std::string>();
  if (j.contains("specificity")) j["specificity"].get_to(v.specificity);
  v.max_in_flight = j.value("max_in_flight", 4);
  v.max_attempts = j.value("max_attempts", 3);
  v.backoff_base = std::chrono::milliseconds(j.value("backoff_base_ms", 500));
}

Registry Registry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open provider registry " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("parse_error", path + ": " + e.what());
  }
  return from_json(j, fs::path(path).parent_path().string());
}

Registry Registry::from_json(const json& j, const std::string& base_dir) {
  Registry r;
  const json& list = j.is_object() && j.contains("providers") ? j.at("providers") : j;
  if (!list.is_array()) throw Error("parse_error", "provider registry must be an array of specs");
  for (const auto& item : list) {
    auto spec = item.get<ProviderSpec>();
    if (spec.fixture && fs::path(*spec.fixture).is_relative() && !base_dir.empty()) {
      spec.fixture = (fs::path(base_dir) / *spec.fixture).lexically_normal().string();
    }
    r.add(std::move(spec));
  }
  return r;
}

void Registry::add(ProviderSpec spec) {
  if (auto v = spec_violations(spec); !v.empty()) throw Error("invalid_argument", v.front());
  auto name = spec.name;
  if (!specs_.emplace(name, std::move(spec)).second) {
    throw Error("invalid_argument", "duplicate provider '" + name + "'");
  }
}

const ProviderSpec& Registry::get(const std::string& name) const {
  auto it = specs_.find(name);
  if (it == specs_.end()) throw Error("not_found", "unknown provider '" + name + "'");
  return it->second;
}

json Registry::to_json() const {
  json arr = json::array();
  for (const auto& [_, s] : specs_) arr.push_back(s);
  return json{{"providers", arr}};
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error("dimension_mismatch", "vector dimensions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

namespace {

void l2_normalize(Vector& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n == 0.0) return;
  for (double& x : v) x /= n;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

void sort_scored(std::vector<ScoredChunk>& v) {
  std::sort(v.begin(), v.end(), [](const ScoredChunk& x, const ScoredChunk& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.chunk_id < y.chunk_id;
  });
}

// ---- HTTP transport --------------------------------------------------------

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw Error("invalid_argument", "bad endpoint URL '" + url + "'");
  std::string prefix = m[2].matched ? m[2].str() : "";
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {m[1].str(), prefix};
}

class HttpTransport {
 public:
  explicit HttpTransport(const ProviderSpec& spec)
      : spec_(spec), endpoint_(split_endpoint(*spec.endpoint)), slots_(spec.max_in_flight) {}

  json post(const std::string& path, const json& body) {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<1024>& s;
      ~Release() { s.release(); }
    } release{slots_};

    httplib::Headers headers;
    if (spec_.auth_env_var) {
      if (const char* token = std::getenv(spec_.auth_env_var->c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + token);
      }
    }
    std::vector<std::string> attempts;
    for (int attempt = 1; attempt <= spec_.max_attempts; ++attempt) {
      httplib::Client client(endpoint_.origin);
      client.set_connection_timeout(10, 0);
      client.set_read_timeout(120, 0);
      auto res = client.Post(endpoint_.prefix + path, headers, body.dump(), "application/json");
      std::string failure;
      if (!res) {
        failure = "transport error: " + httplib::to_string(res.error());
      } else if (res->status != 200) {
        failure = "HTTP " + std::to_string(res->status);
      } else {
        try {
          return json::parse(res->body);
        } catch (const json::parse_error& e) {
          failure = std::string("invalid JSON body: ") + e.what();
        }
      }
      attempts.push_back("attempt " + std::to_string(attempt) + ": " + failure);
      if (attempt < spec_.max_attempts) {
        std::this_thread::sleep_for(spec_.backoff_base * (1 << (attempt - 1)));
      }
    }
    std::string log;
    for (const auto& a : attempts) log += "; " + a;
    throw Error("provider_error", spec_.name + " " + path + " failed" + log);
  }

  std::string model() const { return spec_.model.value_or(spec_.name); }
  const std::string& name() const { return spec_.name; }

 private:
  ProviderSpec spec_;
  Endpoint endpoint_;
  std::counting_semaphore<1024> slots_;
};

template <typename F>
auto reply_field(const std::string& provider, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error("provider_error", provider + ": unexpected reply shape: " + e.what());
  }
}

// ---- Embedders -------------------------------------------------------------

class LexicalEmbedder final : public Embedder {
 public:
  explicit LexicalEmbedder(std::size_t dim) : dim_(dim) {}

  std::vector<Vector> embed(std::span<const std::string> texts) override {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      Vector v(dim_, 0.0);
      auto tokens = text::normalized_tokens(t);
      if (tokens.empty()) {
        // Token-free text still needs a unit vector; give it a fixed bucket.
        v[fnv1a64(std::string_view("\0", 1)) % dim_] = 1.0;
      }
      for (const auto& tok : tokens) v[fnv1a64(tok) % dim_] += 1.0;
      l2_normalize(v);
      out.push_back(std::move(v));
    }
    return out;
  }
  std::size_t dimension() const override { return dim_; }

 private:
  std::size_t dim_;
};

class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(const ProviderSpec& spec)
      : http_(spec), dim_(spec.dimension ? static_cast<std::size_t>(*spec.dimension) : 0) {}

  std::vector<Vector> embed(std::span<const std::string> texts) override {
    json body{{"model", http_.model()}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    auto reply = http_.post("/embeddings", body);
    return reply_field(http_.name(), [&] {
      std::vector<Vector> out(texts.size());
      const auto& data = reply.at("data");
      if (data.size() != texts.size()) throw Error("provider_error", "embedding count mismatch");
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto idx = data[i].value("index", i);
        auto v = data[i].at("embedding").get<Vector>();
        l2_normalize(v);
        if (dim_ == 0) dim_ = v.size();
        if (v.size() != dim_) throw Error("provider_error", "embedding dimension changed");
        out.at(idx) = std::move(v);
      }
      return out;
    });
  }
  std::size_t dimension() const override { return dim_; }

 private:
  HttpTransport http_;
  std::size_t dim_;
};

// ---- Rerankers -------------------------------------------------------------

class LexicalReranker final : public Reranker {
 public:
  std::vector<ScoredChunk> rerank(const std::string& query, std::span<const Chunk> chunks) override {
    const auto q = text::word_set(query);
    std::vector<ScoredChunk> out;
    out.reserve(chunks.size());
    for (const auto& c : chunks) out.push_back({c.chunk_id, jaccard(q, text::word_set(c.text))});
    sort_scored(out);
    return out;
  }
};

class HttpReranker final : public Reranker {
 public:
  explicit HttpReranker(const ProviderSpec& spec) : http_(spec) {}

  std::vector<ScoredChunk> rerank(const std::string& query, std::span<const Chunk> chunks) override {
    std::vector<std::string> docs;
    for (const auto& c : chunks) docs.push_back(c.text);
    json body{{"model", http_.model()}, {"query", query}, {"documents", docs}};
    auto reply = http_.post("/rerank", body);
    return reply_field(http_.name(), [&] {
      std::vector<ScoredChunk> out;
      for (const auto& r : reply.at("results")) {
        const auto idx = r.at("index").get<std::size_t>();
        if (idx >= chunks.size()) throw Error("provider_error", "rerank index out of range");
        out.push_back({chunks[idx].chunk_id, r.at("relevance_score").get<double>()});
      }
      if (out.size() != chunks.size()) throw Error("provider_error", "rerank result count mismatch");
      sort_scored(out);
      return out;
    });
  }

 private:
  HttpTransport http_;
};

// ---- Generators ------------------------------------------------------------

class LexicalGenerator final : public Generator {
 public:
  std::string generate(const GenerationRequest& r) override {
    return lexical_answer(r.question, r.context);
  }
};

class ScriptedGenerator final : public Generator {
 public:
  explicit ScriptedGenerator(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open scripted fixture " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error("parse_error", path + ": " + e.what());
    }
    j.get_to(table_);
  }

  std::string generate(const GenerationRequest& r) override {
    std::vector<std::string> ids;
    for (const auto& c : r.context) ids.push_back(c.chunk_id);
    const auto key = scripted_key(r.question_id, context_digest(ids));
    if (auto it = table_.find(key); it != table_.end()) return it->second;
    if (auto it = table_.find(r.question_id + "|*"); it != table_.end()) return it->second;
    throw Error("fixture_miss", "no scripted response for key '" + key + "'");
  }

 private:
  std::map<std::string, std::string> table_;
};

class HttpGenerator final : public Generator {
 public:
  explicit HttpGenerator(const ProviderSpec& spec) : http_(spec) {}

  std::string generate(const GenerationRequest& r) override {
    json body{{"model", http_.model()},
              {"temperature", 0},
              {"messages",
               json::array({json{{"role", "system"}, {"content", r.prompt.system_instructions}},
                            json{{"role", "user"}, {"content", r.prompt.user_payload}}})}};
    auto reply = http_.post("/chat/completions", body);
    return reply_field(http_.name(), [&] {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    });
  }

 private:
  HttpTransport http_;
};

// ---- Judges ----------------------------------------------------------------

class MockJudge final : public Judge {
 public:
  explicit MockJudge(std::map<std::string, std::vector<std::string>> table)
      : table_(std::move(table)) {}
  JudgeVerdict judge(const JudgeRequest& r) override { return mock_judge(r, table_); }

 private:
  std::map<std::string, std::vector<std::string>> table_;
};

class HttpJudge final : public Judge {
 public:
  explicit HttpJudge(const ProviderSpec& spec) : http_(spec) {}

  JudgeVerdict judge(const JudgeRequest& r) override {
    json body{{"model", http_.model()},
              {"temperature", 0},
              {"response_format", json{{"type", "json_object"}}},
              {"messages", json::array({json{{"role", "user"}, {"content", judge_prompt(r)}}})}};
    auto reply = http_.post("/chat/completions", body);
    std::string content;
    try {
      content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      auto v = json::parse(content);
      JudgeVerdict verdict;
      verdict.correct = v.at("correct").get<bool>();
      verdict.rationale = v.value("rationale", std::string{});
      if (r.adjudicate && !verdict.correct) {
        verdict.category = parse_category(v.at("category").get<std::string>());
      }
      return verdict;
    } catch (const json::exception& e) {
      throw Error("judge_error", http_.name() + ": unparseable verdict: " + e.what());
    } catch (const Error& e) {
      throw Error("judge_error", http_.name() + ": " + e.what());
    }
  }

 private:
  HttpTransport http_;
};

void require_kind(const ProviderSpec& spec, Kind k) {
  if (spec.kind != k) {
    throw Error("invalid_argument", "provider '" + spec.name + "' is " +
                                        std::string(kind_name(spec.kind)) + ", expected " +
                                        std::string(kind_name(k)));
  }
  if (auto v = spec_violations(spec); !v.empty()) throw Error("invalid_argument", v.front());
}

}  // namespace

std::unique_ptr<Embedder> make_embedder(const ProviderSpec& spec) {
  require_kind(spec, Kind::embed);
  if (spec.mode == Mode::http) return std::make_unique<HttpEmbedder>(spec);
  return std::make_unique<LexicalEmbedder>(static_cast<std::size_t>(*spec.dimension));
}

std::unique_ptr<Reranker> make_reranker(const ProviderSpec& spec) {
  require_kind(spec, Kind::rerank);
  if (spec.mode == Mode::http) return std::make_unique<HttpReranker>(spec);
  return std::make_unique<LexicalReranker>();
}

std::unique_ptr<Generator> make_generator(const ProviderSpec& spec) {
  require_kind(spec, Kind::generate);
  switch (spec.mode) {
    case Mode::http: return std::make_unique<HttpGenerator>(spec);
    case Mode::mock_scripted: return std::make_unique<ScriptedGenerator>(*spec.fixture);
    case Mode::mock_lexical: break;
  }
  return std::make_unique<LexicalGenerator>();
}

std::unique_ptr<Judge> make_judge(const ProviderSpec& spec) {
  require_kind(spec, Kind::judge);
  if (spec.mode == Mode::http) return std::make_unique<HttpJudge>(spec);
  return std::make_unique<MockJudge>(spec.specificity);
}

std::vector<Vector> embed_texts(const ProviderSpec& spec, std::span<const std::string> texts) {
  return make_embedder(spec)->embed(texts);
}

std::vector<ScoredChunk> rerank(const ProviderSpec& spec, const std::string& query,
                                std::span<const Chunk> chunks) {
  return make_reranker(spec)->rerank(query, chunks);
}

std::string generate(const ProviderSpec& spec, const GenerationRequest& request) {
  return make_generator(spec)->generate(request);
}

JudgeVerdict judge(const ProviderSpec& spec, const JudgeRequest& request) {
  return make_judge(spec)->judge(request);
}

std::string context_digest(std::span<const std::string> chunk_ids) {
  std::string buf;
  for (std::size_t i = 0; i < chunk_ids.size(); ++i) {
    if (i) buf.push_back('\n');
    buf += chunk_ids[i];
  }
  return short_digest(buf);
}

std::string scripted_key(const std::string& question_id, const std::string& digest) {
  return question_id + "|" + digest;
}

// ---- Lexical answer synthesis ---------------------------------------------

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "and",  "are",   "as",    "at",   "be",    "by",   "did",  "do",
      "does", "for",  "from", "had",   "has",   "have", "he",    "her",  "his",  "how",
      "in",   "is",   "it",   "its",   "of",    "on",   "or",    "she",  "that", "the",
      "their", "they", "this", "to",   "was",   "were", "what",  "when", "where", "which",
      "who",  "whom", "whose", "why",  "with",  "after", "before", "into", "than", "then",
      "there", "these", "those", "been", "being", "also", "both", "while", "not",
      "according"};
  return words;
}

struct Sentence {
  std::string text;
  std::vector<text::Token> tokens;
};

std::vector<Sentence> split_sentences(std::string_view body) {
  std::vector<Sentence> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    auto s = text::trim(body.substr(start, end - start));
    if (!s.empty()) {
      Sentence sent{s, {}};
      sent.tokens = text::tokenize(sent.text);
      if (!sent.tokens.empty()) out.push_back(std::move(sent));
    }
    start = end;
  };
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c == '\n') {
      flush(i + 1);
    } else if ((c == '.' || c == '!' || c == '?') &&
               (i + 1 == body.size() || std::isspace(static_cast<unsigned char>(body[i + 1])))) {
      flush(i + 1);
    }
  }
  flush(body.size());
  return out;
}

}  // namespace

std::string lexical_answer(const std::string& question, std::span<const Chunk> context) {
  const auto unknown = [] {
    return json{{"supporting_sentences", json::array()}, {"final_answer", "unknown"}}.dump();
  };
  std::set<std::string> keys;
  for (auto& t : text::normalized_tokens(question)) {
    if (!stopwords().contains(t)) keys.insert(std::move(t));
  }
  std::vector<Sentence> sentences;
  for (const auto& c : context) {
    auto s = split_sentences(c.text);
    sentences.insert(sentences.end(), std::make_move_iterator(s.begin()),
                     std::make_move_iterator(s.end()));
  }
  if (sentences.empty() || keys.empty()) return unknown();

  std::vector<std::pair<std::size_t, std::size_t>> scored;  // (overlap, index)
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::set<std::string> hit;
    for (const auto& t : sentences[i].tokens)
      if (keys.contains(t.folded)) hit.insert(t.folded);
    scored.emplace_back(hit.size(), i);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  if (scored.front().first == 0) return unknown();

  json supporting = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(2, scored.size()); ++i) {
    if (scored[i].first == 0) break;
    supporting.push_back(sentences[scored[i].second].text);
  }

  const auto& best = sentences[scored.front().second];
  std::size_t last_hit = 0;
  for (std::size_t i = 0; i < best.tokens.size(); ++i)
    if (keys.contains(best.tokens[i].folded)) last_hit = i;

  // First run of up to three content tokens after the matched span.
  std::string answer = "unknown";
  std::size_t i = last_hit + 1;
  auto is_content = [&](const text::Token& t) {
    return !stopwords().contains(t.folded) && !keys.contains(t.folded);
  };
  while (i < best.tokens.size() && !is_content(best.tokens[i])) ++i;
  if (i < best.tokens.size()) {
    std::size_t j = i;
    while (j < best.tokens.size() && j - i < 3 && is_content(best.tokens[j])) ++j;
    answer = best.text.substr(best.tokens[i].begin, best.tokens[j - 1].end - best.tokens[i].begin);
  }
  return json{{"supporting_sentences", supporting}, {"final_answer", answer}}.dump();
}

// ---- Mock judge ------------------------------------------------------------

bool answer_matches(const std::string& final_answer, const std::string& ground_truth) {
  return text::find_token_sequence(text::normalized_tokens(final_answer),
                                   text::normalized_tokens(ground_truth))
      .has_value();
}

JudgeVerdict mock_judge(const JudgeRequest& r,
                        const std::map<std::string, std::vector<std::string>>& specificity) {
  JudgeVerdict v;
  v.correct = answer_matches(r.final_answer, r.ground_truth);
  if (v.correct) {
    v.rationale = "answer contains the ground truth";
    return v;
  }
  v.rationale = "answer does not contain the ground truth";
  if (!r.adjudicate) return v;

  const auto gt = text::word_set(r.ground_truth);
  const auto ans = text::word_set(r.final_answer);
  std::set<std::string> field;
  for (const auto& [broad, specifics] : specificity) {
    if (text::normalize(broad) != text::normalize(r.final_answer)) continue;
    for (const auto& s : specifics) {
      auto w = text::word_set(s);
      field.insert(w.begin(), w.end());
    }
  }
  const bool within_field =
      !gt.empty() && !field.empty() &&
      std::includes(field.begin(), field.end(), gt.begin(), gt.end());
  const bool strict_subset = !ans.empty() && ans.size() < gt.size() &&
                             std::includes(gt.begin(), gt.end(), ans.begin(), ans.end());
  if (within_field) {
    v.category = JudgeCategory::FP6;
    v.rationale = "answer is at the wrong level of specificity";
  } else if (strict_subset) {
    v.category = JudgeCategory::FP7;
    v.rationale = "answer covers only part of the ground truth";
  } else {
    v.category = JudgeCategory::Unknown;
    v.rationale = "adjudicator could not classify the failure";
  }
  return v;
}

std::string judge_prompt(const JudgeRequest& r) {
  std::ostringstream os;
  os << "You grade answers produced by a retrieval-augmented QA system.\n"
        "Decide whether FINAL_ANSWER is semantically equivalent to GROUND_TRUTH.\n";
  if (r.adjudicate) {
    os << "If it is not, classify the failure:\n"
          "  FP6 Incorrect Specificity: the answer is too general or too specific "
          "(e.g. \"France\" when \"Paris\" is expected).\n"
          "  FP7 Incomplete: the answer is missing parts of the ground truth.\n"
          "  Unknown: ambiguous or none of the above.\n";
  }
  os << "Reply with a JSON object: {\"correct\": bool, \"category\": \"FP6\"|\"FP7\"|\"Unknown\"|null, "
        "\"rationale\": string}.\n\n"
     << "QUERY: " << r.question << "\n"
     << "GROUND_TRUTH: " << r.ground_truth << "\n"
     << "FINAL_ANSWER: " << r.final_answer << "\n"
     << "RAW_JSON_RESPONSE: " << r.raw_response << "\n";
  return os.str();
}

}  // namespace raglab::providers
