#include "raglab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "raglab/digest.hpp"
#include "raglab/pipeline.hpp"

namespace raglab::sweep {

namespace fs = std::filesystem;

std::vector<RagConfig> expand(const ConfigSpace& space) {
  if (auto v = validate_config_space(space); !v.empty()) {
    std::string msg = "invalid configuration space:";
    for (const auto& m : v) msg += "\n  " + m;
    throw Error("invalid_space", msg);
  }
  std::vector<RagConfig> out;
  for (const auto& emb : space.embedding_model)
    for (const auto& rr : space.rerank_model)
      for (const auto& gen : space.response_model)
        for (auto size : space.chunk_size)
          for (auto overlap : space.chunk_overlap)
            for (auto depth : space.retrieval_depth)
              for (auto k : space.top_k) {
                RagConfig c;
                c.embedding_model = emb;
                if (rr != kNoReranker) c.rerank_model = rr;
                c.response_model = gen;
                c.chunk_size = size;
                c.chunk_overlap = overlap;
                c.retrieval_depth = depth;
                c.top_k = k;
                out.push_back(std::move(c));
              }
  return out;
}

std::string_view status_name(Status s) {
  switch (s) {
    case Status::running: return "running";
    case Status::complete: return "complete";
    case Status::failed: return "failed";
  }
  return "running";
}

namespace {

Status parse_status(const std::string& s) {
  for (auto st : {Status::running, Status::complete, Status::failed})
    if (status_name(st) == s) return st;
  throw Error("parse_error", "unknown sweep status '" + s + "'");
}

std::string file_safe(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io_error", "cannot write " + tmp);
    out << content;
  }
  fs::rename(tmp, path);
}

}  // namespace

const ConfigEntry& SweepManifest::entry(const std::string& config_id) const {
  for (const auto& e : configs)
    if (e.config_id == config_id) return e;
  throw Error("not_found", "unknown config '" + config_id + "'");
}

void to_json(json& j, const SweepManifest& v) {
  json configs = json::array();
  for (const auto& e : v.configs) {
    configs.push_back({{"config_id", e.config_id},
                       {"config", e.config},
                       {"chunk_store", e.chunk_store},
                       {"index", e.index}});
  }
  json reports = json::object();
  for (const auto& [id, r] : v.reports) reports[id] = r;
  json hist = json::object();
  for (const auto& [id, h] : v.histograms) {
    json row = json::object();
    for (auto l : kAllLabels) row[std::string(label_code(l))] = h[label_index(l)];
    hist[id] = row;
  }
  j = json{{"sweep_id", v.sweep_id},
           {"space", v.space},
           {"config_ids", v.config_ids},
           {"configs", configs},
           {"reports", reports},
           {"histograms", hist},
           {"status", status_name(v.status)},
           {"seed", v.seed},
           {"judge_model", v.judge_model},
           {"snap_to_whitespace", v.snap_to_whitespace},
           {"max_error_rate", v.max_error_rate},
           {"n_questions", v.n_questions},
           {"n_errors", v.n_errors}};
}

void from_json(const json& j, SweepManifest& v) {
  j.at("sweep_id").get_to(v.sweep_id);
  j.at("space").get_to(v.space);
  j.at("config_ids").get_to(v.config_ids);
  v.configs.clear();
  for (const auto& e : j.at("configs")) {
    v.configs.push_back({e.at("config_id").get<std::string>(), e.at("config").get<RagConfig>(),
                         e.at("chunk_store").get<std::string>(), e.at("index").get<std::string>()});
  }
  v.reports.clear();
  for (const auto& [id, r] : j.at("reports").items()) v.reports[id] = r.get<metrics::MetricReport>();
  v.histograms.clear();
  for (const auto& [id, row] : j.at("histograms").items()) {
    comparison::LabelHistogram h{};
    for (auto l : kAllLabels) h[label_index(l)] = row.value(std::string(label_code(l)), std::int64_t{0});
    v.histograms[id] = h;
  }
  v.status = parse_status(j.at("status").get<std::string>());
  v.seed = j.value("seed", std::int64_t{0});
  v.judge_model = j.at("judge_model").get<std::string>();
  v.snap_to_whitespace = j.value("snap_to_whitespace", false);
  v.max_error_rate = j.value("max_error_rate", 0.5);
  v.n_questions = j.value("n_questions", std::int64_t{0});
  v.n_errors = j.value("n_errors", std::int64_t{0});
}

void from_json(const json& j, SweepSpec& v) {
  v = SweepSpec{};
  if (j.contains("sweep_id")) v.sweep_id = j["sweep_id"].get<std::string>();
  const json& space = j.contains("space") ? j.at("space") : j;
  try {
    space.get_to(v.space);
  } catch (const json::exception& e) {
    throw Error("invalid_space", std::string("malformed configuration space: ") + e.what());
  }
  v.judge_model = j.value("judge_model", std::string("judge"));
  v.seed = j.value("seed", std::int64_t{0});
  v.snap_to_whitespace = j.value("snap_to_whitespace", false);
  v.max_error_rate = j.value("max_error_rate", 0.5);
}

SweepSpec load_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open " + path);
  try {
    return json::parse(in).get<SweepSpec>();
  } catch (const json::parse_error& e) {
    throw Error("parse_error", path + ": " + e.what());
  }
}

SweepManifest plan(const SweepSpec& spec, const std::vector<Document>& corpus,
                   const std::vector<Question>& questions) {
  const auto configs = expand(spec.space);
  const auto cdigest = corpus::corpus_digest(corpus);

  SweepManifest m;
  m.space = spec.space;
  m.seed = spec.seed;
  m.judge_model = spec.judge_model;
  m.snap_to_whitespace = spec.snap_to_whitespace;
  m.max_error_rate = spec.max_error_rate;
  m.n_questions = static_cast<std::int64_t>(questions.size());
  if (spec.sweep_id) {
    m.sweep_id = *spec.sweep_id;
  } else {
    std::string qbuf;
    for (const auto& q : questions) qbuf += json(q).dump() + "\n";
    m.sweep_id = "sweep-" + short_digest(json(spec.space).dump() + "|" + spec.judge_model + "|" +
                                         std::to_string(spec.seed) + "|" + cdigest + "|" +
                                         short_digest(qbuf));
  }
  if (m.sweep_id.empty() || file_safe(m.sweep_id) != m.sweep_id) {
    throw Error("invalid_space", "sweep_id must be non-empty and use [A-Za-z0-9._-]");
  }

  std::set<std::string> seen;
  for (const auto& c : configs) {
    ConfigEntry e;
    e.config_id = canonical_config_id(c);
    if (!seen.insert(e.config_id).second) {
      throw Error("invalid_space", "duplicate configuration " + e.config_id + " (repeated option?)");
    }
    e.config = c;
    const corpus::ChunkingParams params{c.chunk_size, c.chunk_overlap, spec.snap_to_whitespace};
    const auto sdigest = corpus::chunk_store_digest(cdigest, params);
    e.chunk_store = "chunks/" + sdigest + ".jsonl";
    e.index = "indexes/" + sdigest + "__" + file_safe(c.embedding_model) + ".jsonl";
    m.config_ids.push_back(e.config_id);
    m.configs.push_back(std::move(e));
  }
  return m;
}

std::string sweep_dir(const std::string& store_root, const std::string& sweep_id) {
  return (fs::path(store_root) / "sweeps" / sweep_id).string();
}

namespace {

struct RunKey {
  std::string config_id;
  std::string question_id;
  auto operator<=>(const RunKey&) const = default;
};

// Loads runs.jsonl, dropping a torn trailing line and duplicate keys.
std::map<RunKey, RunRecord> load_existing_runs(const fs::path& path) {
  std::map<RunKey, RunRecord> out;
  if (!fs::exists(path)) return out;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  bool dirty = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto rec = json::parse(line).get<RunRecord>();
      RunKey key{rec.config_id, rec.question_id};
      if (!out.emplace(std::move(key), std::move(rec)).second) dirty = true;
    } catch (const std::exception&) {
      dirty = true;
    }
  }
  in.close();
  if (dirty) {
    std::string content;
    for (const auto& [_, rec] : out) content += to_jsonl_line(json(rec));
    write_text_atomic(path, content);
  }
  return out;
}

// Single writer owning runs.jsonl while workers produce records.
class RunWriter {
 public:
  explicit RunWriter(const fs::path& path) : out_(open(path)), thread_([this] { loop(); }) {}
  ~RunWriter() { close(); }

  void push(RunRecord rec) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(rec));
    }
    cv_.notify_one();
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      if (closed_) return;
      closed_ = true;
    }
    cv_.notify_one();
    thread_.join();
  }

 private:
  static std::ofstream open(const fs::path& path) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw Error("io_error", "cannot append to " + path.string());
    return out;
  }

  void loop() {
    std::unique_lock lock(mutex_);
    while (true) {
      cv_.wait(lock, [this] { return closed_ || !queue_.empty(); });
      while (!queue_.empty()) {
        auto rec = std::move(queue_.front());
        queue_.pop_front();
        lock.unlock();
        out_ << to_jsonl_line(json(rec));
        out_.flush();
        lock.lock();
      }
      if (closed_) return;
    }
  }

  std::ofstream out_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<RunRecord> queue_;
  bool closed_ = false;
  std::thread thread_;
};

}  // namespace

SweepManifest execute(const std::string& store_root, SweepManifest manifest,
                      const std::vector<Document>& corpus, const std::vector<Question>& questions,
                      const providers::Registry& registry, const ExecuteOptions& options,
                      ExecuteStats* stats) {
  ExecuteStats local;
  ExecuteStats& st = stats ? *stats : local;
  st = {};

  const fs::path dir = sweep_dir(store_root, manifest.sweep_id);
  fs::create_directories(dir / "chunks");
  fs::create_directories(dir / "indexes");

  {
    std::string qs;
    for (const auto& q : questions) qs += to_jsonl_line(json(q));
    write_text_atomic(dir / "questions.jsonl", qs);
    write_text_atomic(dir / "providers.json", registry.to_json().dump(2) + "\n");
  }

  // Provider instances, one per name, shared by all workers.
  std::map<std::string, std::unique_ptr<providers::Embedder>> embedders;
  std::map<std::string, std::unique_ptr<providers::Reranker>> rerankers;
  std::map<std::string, std::unique_ptr<providers::Generator>> generators;
  auto judge = providers::make_judge(registry.get(manifest.judge_model));
  for (const auto& e : manifest.configs) {
    const auto& c = e.config;
    if (!embedders.contains(c.embedding_model))
      embedders[c.embedding_model] = providers::make_embedder(registry.get(c.embedding_model));
    if (c.rerank_model && !rerankers.contains(*c.rerank_model))
      rerankers[*c.rerank_model] = providers::make_reranker(registry.get(*c.rerank_model));
    if (!generators.contains(c.response_model))
      generators[c.response_model] = providers::make_generator(registry.get(c.response_model));
  }

  // Shared artifacts: one chunk store per chunking, one index per (store, embedder).
  std::map<std::string, std::unique_ptr<corpus::EvidenceLocator>> stores;
  std::map<std::string, retrieval::VectorIndex> indexes;
  for (const auto& e : manifest.configs) {
    if (!stores.contains(e.chunk_store)) {
      const auto path = dir / e.chunk_store;
      std::vector<Chunk> chunks;
      if (fs::exists(path)) {
        chunks = corpus::read_chunk_store(path.string());
      } else {
        chunks = corpus::chunk_corpus(
            corpus, {e.config.chunk_size, e.config.chunk_overlap, manifest.snap_to_whitespace});
        const auto tmp = path.string() + ".tmp";
        corpus::write_chunk_store(tmp, chunks);
        fs::rename(tmp, path);
        ++st.chunk_store_builds;
      }
      stores[e.chunk_store] = std::make_unique<corpus::EvidenceLocator>(std::move(chunks));
    }
    if (!indexes.contains(e.index)) {
      const auto path = dir / e.index;
      if (fs::exists(path.string() + ".manifest.json")) {
        indexes[e.index] = retrieval::load_index(path.string());
      } else {
        const auto store_digest = fs::path(e.chunk_store).stem().string();
        auto index = retrieval::build_index(stores[e.chunk_store]->chunks(),
                                            *embedders[e.config.embedding_model],
                                            e.config.embedding_model, store_digest,
                                            path.string() + ".checkpoint");
        retrieval::save_index(index, path.string());
        indexes[e.index] = std::move(index);
        ++st.index_builds;
      }
    }
  }

  const auto runs_path = dir / "runs.jsonl";
  const auto existing = load_existing_runs(runs_path);

  struct Task {
    const ConfigEntry* entry;
    const Question* question;
  };
  std::vector<Task> tasks;
  for (const auto& e : manifest.configs) {
    for (const auto& q : questions) {
      if (existing.contains({e.config_id, q.question_id})) {
        ++st.skipped_runs;
      } else {
        tasks.push_back({&e, &q});
      }
    }
  }
  const auto budget = std::min(tasks.size(), options.max_new_runs.value_or(tasks.size()));
  const bool interrupted = budget < tasks.size();

  manifest.status = Status::running;
  write_text_atomic(dir / "manifest.json", json(manifest).dump(2) + "\n");

  {
    RunWriter writer(runs_path);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      while (true) {
        const auto i = next.fetch_add(1);
        if (i >= budget) return;
        const auto& t = tasks[i];
        const auto& c = t.entry->config;
        pipeline::Resources res{*stores.at(t.entry->chunk_store),
                                indexes.at(t.entry->index),
                                *embedders.at(c.embedding_model),
                                c.rerank_model ? rerankers.at(*c.rerank_model).get() : nullptr,
                                *generators.at(c.response_model),
                                *judge,
                                {}};
        writer.push(pipeline::run_question(c, *t.question, res));
      }
    };
    const auto n_workers = std::max<std::size_t>(1, std::min(options.workers, std::max<std::size_t>(budget, 1)));
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    pool.clear();
    writer.close();
  }
  st.new_runs = budget;

  if (interrupted) return manifest;

  // Canonical rewrite plus reports.
  auto all = load_existing_runs(runs_path);
  std::string content;
  std::map<std::string, std::vector<RunRecord>> by_config;
  for (auto& [key, rec] : all) {
    content += to_jsonl_line(json(rec));
    by_config[key.config_id].push_back(std::move(rec));
  }
  write_text_atomic(runs_path, content);

  manifest.reports.clear();
  manifest.histograms.clear();
  manifest.n_errors = 0;
  std::int64_t total = 0;
  for (const auto& e : manifest.configs) {
    const auto& recs = by_config[e.config_id];
    if (recs.empty()) continue;
    manifest.reports[e.config_id] =
        metrics::aggregate(recs, static_cast<std::size_t>(e.config.top_k));
    manifest.histograms[e.config_id] = comparison::label_histogram(recs);
    manifest.n_errors += manifest.reports[e.config_id].n_errors;
    total += static_cast<std::int64_t>(recs.size());
  }
  const double error_rate = total > 0 ? static_cast<double>(manifest.n_errors) / static_cast<double>(total) : 0.0;
  manifest.status = error_rate > manifest.max_error_rate ? Status::failed : Status::complete;
  write_text_atomic(dir / "manifest.json", json(manifest).dump(2) + "\n");
  return manifest;
}

// ---- SweepStore ------------------------------------------------------------

std::shared_ptr<SweepStore> SweepStore::open(const std::string& dir) {
  auto s = std::shared_ptr<SweepStore>(new SweepStore());
  s->dir_ = dir;
  const fs::path root(dir);
  {
    std::ifstream in(root / "manifest.json");
    if (!in) throw Error("not_found", "no manifest.json in " + dir);
    s->manifest_ = json::parse(in).get<SweepManifest>();
  }
  s->registry_ = providers::Registry::load((root / "providers.json").string());
  s->questions_ = load_questions((root / "questions.jsonl").string());
  for (std::size_t i = 0; i < s->questions_.size(); ++i) {
    s->question_index_[s->questions_[i].question_id] = i;
  }
  for (const auto& id : s->manifest_.config_ids) s->runs_[id];
  if (fs::exists(root / "runs.jsonl")) {
    for (const auto& j : read_jsonl((root / "runs.jsonl").string())) {
      auto rec = j.get<RunRecord>();
      s->runs_[rec.config_id].push_back(std::move(rec));
    }
  }
  for (auto& [_, recs] : s->runs_) {
    std::sort(recs.begin(), recs.end(),
              [](const RunRecord& a, const RunRecord& b) { return a.question_id < b.question_id; });
  }
  return s;
}

const std::vector<RunRecord>& SweepStore::runs(const std::string& config_id) const {
  auto it = runs_.find(config_id);
  if (it == runs_.end()) throw Error("not_found", "unknown config '" + config_id + "'");
  return it->second;
}

const RunRecord* SweepStore::run(const std::string& config_id, const std::string& question_id) const {
  const auto& recs = runs(config_id);
  auto it = std::lower_bound(recs.begin(), recs.end(), question_id,
                             [](const RunRecord& r, const std::string& q) { return r.question_id < q; });
  return it != recs.end() && it->question_id == question_id ? &*it : nullptr;
}

const Question* SweepStore::question(const std::string& question_id) const {
  auto it = question_index_.find(question_id);
  return it == question_index_.end() ? nullptr : &questions_[it->second];
}

const corpus::EvidenceLocator& SweepStore::locator_for_store(const std::string& store) const {
  std::lock_guard lock(locator_mutex_);
  auto& slot = locators_[store];
  if (!slot) {
    slot = std::make_unique<corpus::EvidenceLocator>(
        corpus::read_chunk_store((fs::path(dir_) / store).string()));
  }
  return *slot;
}

const corpus::EvidenceLocator& SweepStore::chunks(const std::string& config_id) const {
  return locator_for_store(manifest_.entry(config_id).chunk_store);
}

std::optional<std::pair<Chunk, std::string>> SweepStore::resolve_chunk(
    const std::string& config_id, const std::string& chunk_id) const {
  std::vector<std::string> order;
  if (!config_id.empty()) order.push_back(manifest_.entry(config_id).chunk_store);
  for (const auto& e : manifest_.configs) {
    if (std::find(order.begin(), order.end(), e.chunk_store) == order.end()) {
      order.push_back(e.chunk_store);
    }
  }
  for (const auto& store : order) {
    if (const auto* c = locator_for_store(store).find(chunk_id)) return std::pair{*c, store};
  }
  return std::nullopt;
}

std::string SweepStore::perturbation_log_path() const {
  return (fs::path(dir_) / "perturbations.jsonl").string();
}

std::vector<std::string> list_sweep_dirs(const std::string& path) {
  std::vector<std::string> out;
  const fs::path p(path);
  if (fs::exists(p / "manifest.json")) return {p.string()};
  if (fs::is_directory(p / "sweeps")) {
    for (const auto& d : fs::directory_iterator(p / "sweeps")) {
      if (fs::exists(d.path() / "manifest.json")) out.push_back(d.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string resolve_sweep_dir(const std::string& path) {
  const auto dirs = list_sweep_dirs(path);
  if (dirs.size() == 1) return dirs.front();
  if (dirs.empty()) throw Error("not_found", "no sweep found at " + path);
  throw Error("invalid_argument", path + " holds several sweeps; pass one sweep directory");
}

}  // namespace raglab::sweep
