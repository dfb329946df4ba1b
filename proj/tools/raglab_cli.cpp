// raglab command-line driver.
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "raglab/api.hpp"
#include "raglab/metrics.hpp"
#include "raglab/sweep.hpp"
#include "raglab/text.hpp"

using namespace raglab;
namespace fs = std::filesystem;

namespace {

bool g_json = false;
std::atomic<bool> g_stop{false};

struct CliError {
  std::string code;
  std::string message;
};

[[noreturn]] void fail(std::string code, std::string message) {
  throw CliError{std::move(code), std::move(message)};
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// Runs a request through the service and returns the body, turning API
// errors into CLI errors.
json call(api::Service& service, api::Request req) {
  auto res = service.handle(req);
  if (res.status != 200) {
    const auto& e = res.body.at("error");
    fail(e.at("code").get<std::string>(), e.at("message").get<std::string>());
  }
  return res.body;
}

struct SweepHandle {
  std::string dir;
  std::string id;
};

SweepHandle open_sweep(const std::string& path) {
  auto dir = sweep::resolve_sweep_dir(path);
  auto store = sweep::SweepStore::open(dir);
  return {dir, store->manifest().sweep_id};
}

void print_reports(const sweep::SweepManifest& m) {
  std::cout << std::left << std::setw(24) << "config_id" << std::setw(10) << "accuracy"
            << std::setw(10) << "recall" << std::setw(10) << "mrr" << std::setw(10) << "map"
            << "errors\n";
  for (const auto& id : m.config_ids) {
    auto it = m.reports.find(id);
    if (it == m.reports.end()) continue;
    const auto& r = it->second;
    std::cout << std::setw(24) << id << std::setw(10) << fixed(r.accuracy) << std::setw(10)
              << fixed(r.recall_at_k) << std::setw(10) << fixed(r.mrr) << std::setw(10)
              << fixed(r.map) << r.n_errors << "\n";
  }
}

int cmd_ingest(const std::string& corpus_path, const std::string& questions_path,
               const std::string& out) {
  const auto docs = load_corpus(corpus_path);
  const auto questions = load_questions(questions_path);
  fs::create_directories(out);
  {
    std::ofstream c(fs::path(out) / "corpus.jsonl", std::ios::binary);
    for (const auto& d : docs) c << to_jsonl_line(d);
    std::ofstream q(fs::path(out) / "questions.jsonl", std::ios::binary);
    for (const auto& x : questions) q << to_jsonl_line(x);
    if (!c || !q) fail("io_error", "cannot write to " + out);
  }
  if (g_json) {
    std::cout << json{{"docs", docs.size()}, {"questions", questions.size()}, {"out", out}}.dump()
              << "\n";
  } else {
    std::cout << "docs=" << docs.size() << " questions=" << questions.size() << "\n";
  }
  return 0;
}

struct SweepArgs {
  std::string space;
  std::string providers;
  std::string out;
  std::string corpus;
  std::string questions;
  std::size_t workers = 1;
  std::size_t max_runs = 0;
};

int cmd_sweep(const SweepArgs& a) {
  const auto corpus_path = a.corpus.empty() ? (fs::path(a.out) / "corpus.jsonl").string() : a.corpus;
  const auto questions_path =
      a.questions.empty() ? (fs::path(a.out) / "questions.jsonl").string() : a.questions;
  const auto spec = sweep::load_sweep_spec(a.space);
  const auto registry = providers::Registry::load(a.providers);
  const auto docs = load_corpus(corpus_path);
  const auto questions = load_questions(questions_path);
  auto manifest = sweep::plan(spec, docs, questions);

  sweep::ExecuteOptions options;
  options.workers = std::max<std::size_t>(1, a.workers);
  if (a.max_runs > 0) options.max_new_runs = a.max_runs;
  sweep::ExecuteStats stats;
  manifest = sweep::execute(a.out, manifest, docs, questions, registry, options, &stats);
  const auto path = (fs::path(sweep::sweep_dir(a.out, manifest.sweep_id)) / "manifest.json").string();

  if (g_json) {
    std::cout << json{{"manifest", path},
                      {"sweep_id", manifest.sweep_id},
                      {"status", sweep::status_name(manifest.status)},
                      {"new_runs", stats.new_runs},
                      {"skipped_runs", stats.skipped_runs},
                      {"reports", manifest.reports}}
                     .dump()
              << "\n";
  } else {
    std::cout << "manifest " << path << "\n";
    std::cout << "status " << sweep::status_name(manifest.status) << " (new runs " << stats.new_runs
              << ", reused " << stats.skipped_runs << ")\n";
    print_reports(manifest);
  }
  if (manifest.status == sweep::Status::failed) {
    fail("sweep_failed", std::to_string(manifest.n_errors) + " runs failed; see runs.jsonl");
  }
  return 0;
}

int cmd_compare(const std::string& sweep_path, const std::string& a, const std::string& b,
                const std::string& flow) {
  auto h = open_sweep(sweep_path);
  api::Service service(h.dir);
  const auto base = "/api/sweeps/" + h.id;
  if (!flow.empty()) {
    const auto colon = flow.find(':');
    if (colon == std::string::npos) fail("bad_request", "--flow expects FROM:TO");
    const auto body = call(service, {"GET", base + "/compare/instances",
                                     {{"a", a},
                                      {"b", b},
                                      {"from", flow.substr(0, colon)},
                                      {"to", flow.substr(colon + 1)},
                                      {"limit", "1000000"}},
                                     ""});
    if (g_json) {
      std::cout << body.dump() << "\n";
      return 0;
    }
    std::cout << body["from"].get<std::string>() << " -> " << body["to"].get<std::string>() << ": "
              << body["total"] << " questions\n";
    for (const auto& item : body["items"]) {
      std::cout << std::left << std::setw(16) << item["question_id"].get<std::string>()
                << fixed(item["glyph_fraction_a"].get<double>(), 2) << " "
                << fixed(item["glyph_fraction_b"].get<double>(), 2) << "  "
                << item["text"].get<std::string>() << "\n";
    }
    return 0;
  }

  const auto body = call(service, {"GET", base + "/compare", {{"a", a}, {"b", b}}, ""});
  if (g_json) {
    std::cout << body.dump() << "\n";
    return 0;
  }
  std::cout << "rows: " << a << "  columns: " << b << "\n";
  std::cout << std::setw(9) << "";
  for (auto l : kAllLabels) std::cout << std::right << std::setw(8) << label_code(l);
  std::cout << "\n";
  const auto& counts = body["counts"];
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    std::cout << std::left << std::setw(9) << label_code(kAllLabels[i]);
    for (std::size_t j = 0; j < kLabelCount; ++j) {
      std::cout << std::right << std::setw(8) << counts[i][j].get<std::int64_t>();
    }
    std::cout << "\n";
  }
  std::cout << "total " << body["total"] << "\n";
  return 0;
}

std::string describe(const json& options) {
  std::string out;
  for (const auto& [field, value] : options.items()) {
    if (!out.empty()) out += ' ';
    out += field + "=" + value.get<std::string>();
  }
  return out;
}

int cmd_report(const std::string& sweep_path, const std::string& metric_name,
               const std::string& csv) {
  auto h = open_sweep(sweep_path);
  api::Service service(h.dir);
  const auto body = call(service, {"GET", "/api/sweeps/" + h.id + "/overview",
                                   {{"metric", metric_name}}, ""});
  std::vector<metrics::MetricReport> reports;
  for (const auto& c : body["configs"]) reports.push_back(c["report"].get<metrics::MetricReport>());
  if (!csv.empty()) {
    std::ofstream out(csv, std::ios::binary);
    out << metrics::reports_to_csv(reports);
    if (!out) fail("io_error", "cannot write " + csv);
  }
  if (g_json) {
    std::cout << body.dump() << "\n";
    return 0;
  }
  std::cout << "ranked by " << metric_name << "\n";
  for (const auto& c : body["configs"]) {
    std::cout << std::right << std::setw(3) << c["rank"].get<int>() << "  " << std::left
              << std::setw(24) << c["config_id"].get<std::string>()
              << fixed(c["value"].get<double>()) << "  " << describe(c["options"])
              << "\n";
  }
  return 0;
}

int cmd_perturb(const std::string& sweep_path, const std::string& config, const std::string& qid,
                const std::string& context, const std::string& note) {
  auto h = open_sweep(sweep_path);
  api::Service service(h.dir);
  json req{{"config_id", config}, {"question_id", qid}, {"note", note}};
  std::vector<std::string> ids;
  std::stringstream ss(context);
  for (std::string id; std::getline(ss, id, ',');) {
    if (!text::trim(id).empty()) ids.emplace_back(text::trim(id));
  }
  req["context_chunk_ids"] = ids;
  req["empty_context"] = ids.empty();
  const auto body = call(service, {"POST", "/api/sweeps/" + h.id + "/perturb", {}, req.dump()});
  if (g_json) {
    std::cout << body.dump() << "\n";
    return 0;
  }
  const auto verdict = [](bool v) { return v ? "correct" : "incorrect"; };
  const bool before = body["verdict_orig"].get<bool>();
  const bool after = body["verdict_pert"].get<bool>();
  const auto& ans_a = body["answer_orig"].get_ref<const std::string&>();
  const auto& ans_b = body["answer_pert"].get_ref<const std::string&>();
  if (ans_a == ans_b && before == after) {
    std::cout << "answer unchanged (" << verdict(before) << "): " << ans_a << "\n";
  } else {
    std::cout << verdict(before) << " → " << verdict(after) << "\n";
    std::cout << "original:  " << ans_a << "\n";
    std::cout << "perturbed: " << ans_b << "\n";
  }
  std::cout << "context label " << body["context_label"].get<std::string>() << ", stored as "
            << body["stored_id"].get<std::string>() << "\n";
  return 0;
}

int cmd_serve(const std::string& sweep_path, int port, const std::string& host,
              const std::string& static_dir) {
  api::ServeOptions options;
  options.port = port;
  options.host = host;
  if (!static_dir.empty()) options.static_dir = static_dir;
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  api::serve(sweep_path, options, g_stop, [&](int bound) {
    if (g_json) {
      std::cout << json{{"host", host}, {"port", bound}}.dump() << std::endl;
    } else {
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
    }
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"raglab: sweep, diagnose and compare RAG configurations"};
  app.require_subcommand(1);
  app.add_flag("--json", g_json, "Print JSON instead of tables");

  std::string corpus, questions, out;
  auto* ingest = app.add_subcommand("ingest", "Validate and store a corpus and question set");
  ingest->add_option("--corpus", corpus, "Corpus JSONL")->required();
  ingest->add_option("--questions", questions, "Questions JSONL")->required();
  ingest->add_option("--out", out, "Store root")->required();

  SweepArgs sa;
  auto* sw = app.add_subcommand("sweep", "Run every configuration of a space");
  sw->add_option("--space", sa.space, "Sweep space JSON")->required();
  sw->add_option("--providers", sa.providers, "Provider registry JSON")->required();
  sw->add_option("--out", sa.out, "Store root")->required();
  sw->add_option("--workers", sa.workers, "Concurrent runs")->check(CLI::PositiveNumber);
  sw->add_option("--corpus", sa.corpus, "Corpus JSONL (default: <out>/corpus.jsonl)");
  sw->add_option("--questions", sa.questions, "Questions JSONL (default: <out>/questions.jsonl)");
  sw->add_option("--max-runs", sa.max_runs, "Stop after this many new runs (resume later)");

  std::string sweep_path, a, b, flow;
  auto* cmp = app.add_subcommand("compare", "Transition matrix between two configurations");
  cmp->add_option("--sweep", sweep_path, "Sweep directory or store root")->required();
  cmp->add_option("--a", a, "Config id")->required();
  cmp->add_option("--b", b, "Config id")->required();
  cmp->add_option("--flow", flow, "List the questions of one flow, FROM:TO");

  std::string metric = "accuracy", csv;
  auto* rep = app.add_subcommand("report", "Rank configurations by a metric");
  rep->add_option("--sweep", sweep_path, "Sweep directory or store root")->required();
  rep->add_option("--metric", metric, "accuracy|recall|mrr|map");
  rep->add_option("--csv", csv, "Write per-config metrics to this CSV file");

  int port = api::kDefaultPort;
  std::string host = "127.0.0.1", static_dir;
  auto* srv = app.add_subcommand("serve", "Serve the HTTP API");
  srv->add_option("--sweep", sweep_path, "Sweep directory or store root")->required();
  srv->add_option("--port", port, "Port (0 picks a free one)");
  srv->add_option("--host", host, "Bind address");
  srv->add_option("--static", static_dir, "Directory of UI assets to serve at /");

  std::string config, qid, context, note;
  auto* per = app.add_subcommand("perturb", "Regenerate an answer from a curated context");
  per->add_option("--sweep", sweep_path, "Sweep directory or store root")->required();
  per->add_option("--config", config, "Config id")->required();
  per->add_option("--qid", qid, "Question id")->required();
  per->add_option("--context", context, "Comma-separated chunk ids, in order")->required();
  per->add_option("--note", note, "Free-text note stored with the result");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(corpus, questions, out);
    if (*sw) return cmd_sweep(sa);
    if (*cmp) return cmd_compare(sweep_path, a, b, flow);
    if (*rep) return cmd_report(sweep_path, metric, csv);
    if (*srv) return cmd_serve(sweep_path, port, host, static_dir);
    if (*per) return cmd_perturb(sweep_path, config, qid, context, note);
  } catch (const CliError& e) {
    std::cerr << "error " << e.code << ": " << e.message << "\n";
  } catch (const Error& e) {
    std::cerr << "error " << e.code() << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error internal: " << e.what() << "\n";
  }
  return 1;
}
