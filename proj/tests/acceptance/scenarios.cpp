#include "acceptance/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "attribution_cases.hpp"
#include "oracles.hpp"
#include "pairing_cases.hpp"
#include "parser_cases.hpp"
#include "raglab/api.hpp"
#include "raglab/attribution.hpp"
#include "raglab/comparison.hpp"
#include "raglab/metrics.hpp"
#include "raglab/pipeline.hpp"
#include "raglab/sweep.hpp"
#include "raglab/text.hpp"
#include "support.hpp"

namespace raglab::acceptance {

namespace {

using testing::TempDir;
namespace fs = std::filesystem;

template <typename... Parts>
std::string cat(const Parts&... parts) {
  std::ostringstream os;
  os.precision(6);
  (os << ... << parts);
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Inputs {
  std::vector<Document> docs;
  std::vector<Question> questions;
  providers::Registry registry;
  sweep::SweepSpec spec;
};

Inputs load_inputs(const fs::path& dir) {
  return {load_corpus((dir / "corpus.jsonl").string()),
          load_questions((dir / "questions.jsonl").string()),
          providers::Registry::load((dir / "providers.json").string()),
          sweep::load_sweep_spec((dir / "space.json").string())};
}

sweep::SweepManifest run_sweep(const Inputs& in, const std::string& root, std::size_t workers,
                               std::optional<std::size_t> budget = std::nullopt,
                               const std::optional<sweep::SweepSpec>& spec = std::nullopt) {
  auto manifest = sweep::plan(spec.value_or(in.spec), in.docs, in.questions);
  sweep::ExecuteOptions options;
  options.workers = workers;
  options.max_new_runs = budget;
  return sweep::execute(root, manifest, in.docs, in.questions, in.registry, options);
}

// Relative path -> bytes for every file below `dir`.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = testing::read_file(e.path());
  }
  return out;
}

std::string diff_snapshots(const std::map<std::string, std::string>& a,
                           const std::map<std::string, std::string>& b) {
  for (const auto& [path, bytes] : a) {
    auto it = b.find(path);
    if (it == b.end()) return "missing " + path;
    if (it->second != bytes) return "differs " + path;
  }
  for (const auto& [path, _] : b)
    if (!a.contains(path)) return "extra " + path;
  return {};
}

// The desk sweep is shared by several criteria; run it once.
struct DeskSweep {
  TempDir root;
  Inputs inputs = load_inputs(testing::desk_dir());
  sweep::SweepManifest manifest;
  double seconds = 0.0;

  DeskSweep() {
    const auto t0 = std::chrono::steady_clock::now();
    manifest = run_sweep(inputs, root.str(), 1);
    seconds = seconds_since(t0);
  }
};

DeskSweep& desk_sweep() {
  static DeskSweep d;
  return d;
}

// ---- 1 ---------------------------------------------------------------------

Outcome metric_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> universe{"a", "b", "c", "d", "e", "f"};
  std::size_t cases = 0;
  double worst = 0.0;
  for (std::size_t n = 0; n <= 6; ++n) {
    std::vector<std::string> items(universe.begin(), universe.begin() + static_cast<long>(n));
    // Relevant subsets range over the ranked items plus one never retrieved.
    std::vector<std::string> pool = items;
    pool.push_back("unretrieved");
    std::vector<std::string> perm = items;
    do {
      std::vector<ScoredChunk> ranked;
      for (std::size_t i = 0; i < perm.size(); ++i) {
        ranked.push_back({perm[i], 1.0 - static_cast<double>(i) / 10.0});
      }
      for (std::size_t mask = 0; mask < (std::size_t{1} << pool.size()); ++mask) {
        std::set<std::string> rel;
        for (std::size_t i = 0; i < pool.size(); ++i)
          if (mask & (std::size_t{1} << i)) rel.insert(pool[i]);
        for (std::size_t k = 1; k <= n + 1; ++k) {
          worst = std::max(worst, std::abs(metrics::recall_at_k(rel, ranked, k) - oracle::recall(rel, perm, k)));
          ++cases;
        }
        worst = std::max(worst, std::abs(metrics::reciprocal_rank(rel, ranked) - oracle::rr(rel, perm)));
        worst = std::max(worst, std::abs(metrics::average_precision(rel, ranked) - oracle::ap(rel, perm)));
        cases += 2;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  const double secs = seconds_since(t0);
  const bool ok = worst <= 1e-12 && secs < 10.0;
  return {ok, cat(cases, " comparisons, max |diff| ", worst, ", ", secs, "s")};
}

// ---- 2 ---------------------------------------------------------------------

Outcome attribution_partition() {
  auto judge = testing::attribution_judge();
  std::string wrong;
  for (const auto& c : testing::attribution_cases()) {
    const auto got = attribution::attribute(c.record, c.question, {}, *judge).label;
    if (got != c.expected) wrong += cat(c.name, "->", label_code(got), " ");
  }
  if (!wrong.empty()) return {false, "mislabelled: " + wrong};

  // Randomized runs: every record gets exactly one label and the histogram
  // sums to the number of questions.
  testing::WordGen g(2024);
  const std::vector<std::int64_t> totals{0, 1, 2, 3, 4, 5};
  for (int run = 0; run < 200; ++run) {
    const auto n_q = 1 + g.pick(60);
    std::vector<RunRecord> records;
    for (std::size_t i = 0; i < n_q; ++i) {
      auto c = testing::attribution_cases()[g.pick(9)];
      c.record.question_id = cat("q", i);
      const auto total = totals[g.pick(totals.size())];
      const auto range = static_cast<std::int64_t>(g.pick(static_cast<std::size_t>(total) + 1));
      const auto ctx = static_cast<std::int64_t>(g.pick(static_cast<std::size_t>(range) + 1));
      c.record.coverage = {total, range, ctx, false};
      c.record.response.strict_parse_ok = g.pick(5) != 0;
      c.record.outcome = attribution::attribute(c.record, c.question, {}, *judge).label;
      records.push_back(c.record);
    }
    const auto h = comparison::label_histogram(records);
    if (std::accumulate(h.begin(), h.end(), std::int64_t{0}) != static_cast<std::int64_t>(n_q)) {
      return {false, cat("histogram does not partition run ", run)};
    }
  }
  // The real sweep too.
  const auto& m = desk_sweep().manifest;
  for (const auto& [cfg, h] : m.histograms) {
    if (std::accumulate(h.begin(), h.end(), std::int64_t{0}) != m.n_questions) {
      return {false, "sweep histogram does not partition " + cfg};
    }
  }
  return {true, "9/9 fixtures; 200 randomized runs and 8 sweep configs partition |Q|"};
}

// ---- 3 ---------------------------------------------------------------------

Outcome transition_algebra() {
  testing::WordGen g(31337);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + g.pick(80);
    std::vector<RunRecord> a, b;
    std::vector<OutcomeLabel> la, lb;
    for (std::size_t i = 0; i < n; ++i) {
      RunRecord ra, rb;
      ra.config_id = "A";
      rb.config_id = "B";
      ra.question_id = rb.question_id = cat("q", i);
      ra.outcome = testing::random_label(g);
      rb.outcome = testing::random_label(g);
      la.push_back(ra.outcome);
      lb.push_back(rb.outcome);
      a.push_back(ra);
      b.push_back(rb);
    }
    std::shuffle(b.begin(), b.end(), g.rng());
    const auto m = comparison::transition_matrix(a, b);
    const auto ha = oracle::histogram(la);
    const auto hb = oracle::histogram(lb);
    const auto rows = m.row_sums();
    const auto cols = m.column_sums();
    for (auto l : kAllLabels) {
      if (rows[label_index(l)] != ha.at(l) || cols[label_index(l)] != hb.at(l)) {
        return {false, cat("marginal mismatch in trial ", trial, " label ", label_code(l))};
      }
    }
    const auto id = comparison::transition_matrix(a, a);
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      for (std::size_t j = 0; j < kLabelCount; ++j) {
        if (i != j && id.counts[i][j] != 0) return {false, cat("identity off-diagonal in trial ", trial)};
      }
      if (id.counts[i][i] != ha.at(kAllLabels[i])) return {false, cat("identity diagonal wrong ", trial)};
    }
  }
  return {true, "1000 random assignments; marginals and identity exact"};
}

// ---- 4 ---------------------------------------------------------------------

Outcome jaccard_properties() {
  testing::WordGen g(404);
  for (int i = 0; i < 10000; ++i) {
    const auto a = g.sentence(6);
    const auto b = g.coin() ? g.sentence(6) : a + (g.coin() ? " " + g.word() : std::string(", "));
    const double ab = comparison::jaccard_words(a, b);
    const double ba = comparison::jaccard_words(b, a);
    if (ab != ba) return {false, cat("asymmetric on '", a, "' / '", b, "'")};
    if (ab < 0.0 || ab > 1.0) return {false, cat("out of bounds on '", a, "' / '", b, "'")};
    const bool same = oracle::ascii_words(a) == oracle::ascii_words(b);
    if ((ab == 1.0) != same) return {false, cat("=1 iff equal violated on '", a, "' / '", b, "'")};
    if (ab != oracle::jaccard(a, b)) return {false, cat("oracle disagrees on '", a, "' / '", b, "'")};
  }
  const auto pairs = comparison::match_chunks(testing::pairing_chunks_a(), testing::pairing_chunks_b(), 0.3);
  if (pairs.pairs != testing::pairing_expected()) return {false, "fixture pairing differs from table"};
  return {true, "10000 random pairs; fixture pairing matches 5-row table"};
}

// ---- 5 ---------------------------------------------------------------------

Outcome sweep_determinism() {
  auto& one = desk_sweep();
  if (one.manifest.status != sweep::Status::complete) return {false, "1-worker sweep incomplete"};
  if (one.manifest.config_ids.size() != 8) return {false, cat(one.manifest.config_ids.size(), " configs")};
  TempDir root8;
  const auto t0 = std::chrono::steady_clock::now();
  const auto m8 = run_sweep(one.inputs, root8.str(), 8);
  const double secs8 = seconds_since(t0);
  const auto runs1 = testing::read_file(fs::path(sweep::sweep_dir(one.root.str(), "desk")) / "runs.jsonl");
  const auto runs8 = testing::read_file(fs::path(sweep::sweep_dir(root8.str(), "desk")) / "runs.jsonl");
  if (runs1.empty() || runs1 != runs8) return {false, "runs.jsonl differs between 1 and 8 workers"};
  const bool fast = one.seconds < 60.0 && secs8 < 60.0;
  return {fast && m8.status == sweep::Status::complete,
          cat("8 configs x ", one.manifest.n_questions, " questions; byte-identical runs.jsonl; ",
              one.seconds, "s (1 worker), ", secs8, "s (8 workers)")};
}

// ---- 6 ---------------------------------------------------------------------

Outcome resumability() {
  auto& full = desk_sweep();
  const auto total = full.manifest.config_ids.size() * full.inputs.questions.size();
  TempDir root;
  const auto half = run_sweep(full.inputs, root.str(), 4, total / 2);
  if (half.status != sweep::Status::running) return {false, "interrupted sweep reports complete"};
  const auto partial = testing::read_file(fs::path(sweep::sweep_dir(root.str(), "desk")) / "runs.jsonl");
  const auto lines = std::count(partial.begin(), partial.end(), '\n');
  // Simulate a crash mid-write as well: a torn trailing line.
  {
    std::ofstream out(fs::path(sweep::sweep_dir(root.str(), "desk")) / "runs.jsonl", std::ios::app);
    out << "{\"config_id\":\"cfg-torn";
  }
  const auto resumed = run_sweep(full.inputs, root.str(), 4);
  if (resumed.status != sweep::Status::complete) return {false, "resumed sweep incomplete"};
  const auto diff = diff_snapshots(snapshot(sweep::sweep_dir(full.root.str(), "desk")),
                                   snapshot(sweep::sweep_dir(root.str(), "desk")));
  if (!diff.empty()) return {false, "store " + diff};
  return {true, cat("interrupted after ", lines, "/", total, " runs; resumed store byte-identical")};
}

// ---- 7 ---------------------------------------------------------------------

Outcome perturbation_causality() {
  TempDir root;
  const auto in = load_inputs(testing::fixture_dir() / "distractor");
  const auto m = run_sweep(in, root.str(), 1);
  const auto cfg = m.config_ids.at(0);
  auto store = sweep::SweepStore::open(sweep::sweep_dir(root.str(), m.sweep_id));
  const auto* base = store->run(cfg, "q1");
  if (!base || !base->ok()) return {false, "no base run"};
  if (base->judge_verdict.correct) return {false, "base run is already correct"};
  const auto& ctx = base->context_chunk_ids;
  if (std::find(ctx.begin(), ctx.end(), "dis:0") == ctx.end()) return {false, "distractor not in context"};

  api::Service service(root.str());
  auto perturb = [&](std::vector<std::string> ids) {
    json body{{"config_id", cfg}, {"question_id", "q1"}, {"context_chunk_ids", ids}};
    return service.handle({"POST", "/api/sweeps/" + m.sweep_id + "/perturb", {}, body.dump()});
  };
  std::vector<std::string> without;
  for (const auto& id : ctx)
    if (id != "dis:0") without.push_back(id);
  const auto flip = perturb(without);
  if (flip.status != 200) return {false, flip.body.dump()};
  const bool flipped = !flip.body["verdict_orig"].get<bool>() && flip.body["verdict_pert"].get<bool>();
  const auto same = perturb(ctx);
  if (same.status != 200) return {false, same.body.dump()};
  const bool identical = same.body["raw_pert"] == base->response.raw &&
                         same.body["raw_orig"] == base->response.raw;
  return {flipped && identical,
          cat("removing dis:0: ", flipped ? "incorrect -> correct" : "no flip",
              "; identity raw ", identical ? "byte-identical" : "differs")};
}

// ---- 8 ---------------------------------------------------------------------

Outcome parser_tiers() {
  std::string bad;
  for (auto c : testing::parser_cases()) {
    c.expected.raw = c.raw;
    if (pipeline::parse_response_lenient(c.raw) != c.expected) bad += c.name + " ";
  }
  if (!bad.empty()) return {false, "tier mismatch: " + bad};
  const auto garbage = testing::parser_cases().back();
  RunRecord r;
  r.response = pipeline::parse_response_lenient(garbage.raw);
  r.judge_verdict.correct = providers::answer_matches(r.response.final_answer, "harbour master");
  if (r.judge_verdict.correct) return {false, "garbage judged correct"};
  r.coverage = {1, 1, 1, false};
  const Question q{"q", "Who?", "harbour master", {{"d", "x"}}};
  auto judge = testing::attribution_judge();
  const auto label = attribution::attribute(r, q, {}, *judge).label;
  return {label == OutcomeLabel::FP5_WrongFormat,
          cat("4 tiers exact; garbage attributed ", label_code(label))};
}

// ---- 9 ---------------------------------------------------------------------

Outcome component_aggregates() {
  const auto& m = desk_sweep().manifest;
  std::vector<comparison::ConfigResult> results;
  for (const auto& e : m.configs) results.push_back({e.config, m.reports.at(e.config_id)});
  std::size_t checked = 0;
  for (auto metric : {metrics::Metric::accuracy, metrics::Metric::recall, metrics::Metric::mrr,
                      metrics::Metric::map}) {
    std::vector<std::pair<RagConfig, double>> rows;
    for (const auto& r : results) rows.push_back({r.config, r.report.value(metric)});
    const auto expected = oracle::group_means(rows);
    const auto got = comparison::component_aggregates(m.space, results, metric);
    if (got.size() != expected.size()) return {false, cat("group count ", got.size(), " vs ", expected.size())};
    for (const auto& a : got) {
      auto it = expected.find({a.component_field, a.option_value});
      if (it == expected.end()) return {false, "unexpected group " + a.component_field + "=" + a.option_value};
      if (a.mean_metric != it->second.first || a.n_configs != it->second.second) {
        return {false, cat("mismatch for ", a.component_field, "=", a.option_value, " ", a.mean_metric,
                           " vs ", it->second.first)};
      }
      ++checked;
    }
  }
  return {true, cat(checked, " (metric, field, option) groups exact")};
}

// ---- 10 --------------------------------------------------------------------

Outcome coverage_monotonicity() {
  auto& desk = desk_sweep();
  std::vector<std::string> roots{desk.root.str()};
  std::vector<std::unique_ptr<TempDir>> temps;
  testing::WordGen g(77);
  for (int run = 0; run < 4; ++run) {
    auto spec = desk.inputs.spec;
    spec.sweep_id = cat("random-", run);
    auto& s = spec.space;
    const auto size = static_cast<std::int64_t>(60 + g.pick(400));
    s.chunk_size = {size};
    s.chunk_overlap = {static_cast<std::int64_t>(g.pick(static_cast<std::size_t>(size / 2)))};
    const auto depth = static_cast<std::int64_t>(1 + g.pick(15));
    s.retrieval_depth = {depth};
    s.top_k = {static_cast<std::int64_t>(1 + g.pick(static_cast<std::size_t>(depth)))};
    spec.snap_to_whitespace = g.coin();
    temps.push_back(std::make_unique<TempDir>());
    run_sweep(desk.inputs, temps.back()->str(), 2, std::nullopt, spec);
    roots.push_back(temps.back()->str());
  }
  std::size_t records = 0;
  for (const auto& root : roots) {
    for (const auto& dir : sweep::list_sweep_dirs(root)) {
      for (const auto& line : read_jsonl((fs::path(dir) / "runs.jsonl").string())) {
        const auto r = line.get<RunRecord>();
        const auto& c = r.coverage;
        if (!(0 <= c.evidence_in_context && c.evidence_in_context <= c.evidence_in_rerank_range &&
              c.evidence_in_rerank_range <= c.evidence_total)) {
          return {false, cat("violated by ", r.config_id, "/", r.question_id)};
        }
        ++records;
      }
    }
  }
  return {records > 0, cat(records, " records across ", roots.size(), " sweeps")};
}

}  // namespace

std::vector<Criterion> criteria() {
  return {
      {1, "metric oracle equivalence", metric_oracles},
      {2, "attribution partition and cascade order", attribution_partition},
      {3, "transition-matrix algebra", transition_algebra},
      {4, "jaccard properties and fixture pairing", jaccard_properties},
      {5, "sweep determinism across worker counts", sweep_determinism},
      {6, "resumability after interruption", resumability},
      {7, "perturbation causality", perturbation_causality},
      {8, "lenient parser tiers", parser_tiers},
      {9, "component aggregates vs group-by", component_aggregates},
      {10, "coverage monotonicity", coverage_monotonicity},
  };
}

}  // namespace raglab::acceptance
