#include "raglab/api.hpp"

#include <algorithm>
#include <regex>
#include <thread>

#include <httplib.h>

#include "raglab/comparison.hpp"
#include "raglab/metrics.hpp"
#include "raglab/perturbation.hpp"
#include "raglab/providers.hpp"

namespace raglab::api {

json error_body(const ApiError& e) {
  return json{{"error", {{"status", e.status}, {"code", e.code}, {"message", e.message}}}};
}

namespace {

struct Failure {
  ApiError error;
};

[[noreturn]] void fail(int status, std::string code, std::string message) {
  throw Failure{{status, std::move(code), std::move(message)}};
}

const std::string& require_param(const Request& r, const std::string& name) {
  auto it = r.query.find(name);
  if (it == r.query.end() || it->second.empty()) fail(400, "bad_request", "missing query parameter '" + name + "'");
  return it->second;
}

std::size_t size_param(const Request& r, const std::string& name, std::size_t fallback) {
  auto it = r.query.find(name);
  if (it == r.query.end()) return fallback;
  try {
    std::size_t pos = 0;
    const auto v = std::stoll(it->second, &pos);
    if (pos != it->second.size() || v < 0) throw std::invalid_argument(name);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    fail(400, "bad_request", "query parameter '" + name + "' must be a non-negative integer");
  }
}

OutcomeLabel label_param(const Request& r, const std::string& name) {
  try {
    return parse_label(require_param(r, name));
  } catch (const Error& e) {
    fail(400, "bad_request", e.what());
  }
}

json manifest_summary(const sweep::SweepManifest& m) {
  return json{{"sweep_id", m.sweep_id},
              {"status", sweep::status_name(m.status)},
              {"n_configs", m.config_ids.size()},
              {"n_questions", m.n_questions},
              {"n_errors", m.n_errors}};
}

}  // namespace

struct Service::Providers {
  std::map<std::string, std::unique_ptr<providers::Generator>> generators;
  std::unique_ptr<providers::Judge> judge;
  std::mutex mutex;
};

Service::Service(std::string root) : root_(std::move(root)) {}

std::shared_ptr<sweep::SweepStore> Service::store(const std::string& sweep_id) {
  std::lock_guard lock(mutex_);
  if (auto it = stores_.find(sweep_id); it != stores_.end()) return it->second;
  for (const auto& dir : sweep::list_sweep_dirs(root_)) {
    auto s = sweep::SweepStore::open(dir);
    if (s->manifest().sweep_id == sweep_id) {
      stores_[sweep_id] = s;
      return s;
    }
  }
  fail(404, "not_found", "unknown sweep '" + sweep_id + "'");
}

Service::Providers& Service::providers_for(const sweep::SweepStore& s) {
  std::lock_guard lock(mutex_);
  auto& slot = providers_[s.manifest().sweep_id];
  if (!slot) {
    slot = std::make_shared<Providers>();
    slot->judge = providers::make_judge(s.registry().get(s.manifest().judge_model));
  }
  return *slot;
}

Response Service::handle(const Request& r) {
  static const std::regex sweep_re(R"(^/api/sweeps/([^/]+)(/.*)?$)");
  try {
    if (r.path == "/api/sweeps" || r.path == "/api/sweeps/") {
      if (r.method != "GET") fail(405, "method_not_allowed", r.method + " not allowed");
      return list_sweeps();
    }
    std::smatch m;
    if (!std::regex_match(r.path, m, sweep_re)) fail(404, "not_found", "no route for " + r.path);
    const auto id = m[1].str();
    const auto rest = m[2].matched ? m[2].str() : std::string();
    if (rest == "/perturb") {
      if (r.method != "POST") fail(405, "method_not_allowed", r.method + " not allowed");
      return perturb(id, r);
    }
    if (r.method != "GET") fail(405, "method_not_allowed", r.method + " not allowed");
    if (rest.empty() || rest == "/") return get_sweep(id);
    if (rest == "/overview") return overview(id, r);
    if (rest == "/compare") return compare(id, r);
    if (rest == "/compare/instances") return compare_instances(id, r);
    if (rest == "/instance") return instance(id, r);
    if (rest == "/perturbations") return perturbations(id, r);
    fail(404, "not_found", "no route for " + r.path);
  } catch (const Failure& f) {
    return {f.error.status, error_body(f.error)};
  } catch (const Error& e) {
    if (e.code() == "not_found") return {404, error_body({404, "not_found", e.what()})};
    if (e.code() == "invalid_metric") return {400, error_body({400, "invalid_metric", e.what()})};
    if (e.code() == "unresolvable_chunk") {
      return {422, error_body({422, "unresolvable_chunk", e.what()})};
    }
    if (e.code() == "provider_error" || e.code() == "fixture_miss" || e.code() == "judge_error") {
      return {502, error_body({502, "provider_error", e.what()})};
    }
    if (e.code() == "invalid_argument") return {400, error_body({400, "bad_request", e.what()})};
    return {500, error_body({500, "internal", e.what()})};
  } catch (const std::exception& e) {
    return {500, error_body({500, "internal", e.what()})};
  }
}

Response Service::list_sweeps() {
  json out = json::array();
  for (const auto& dir : sweep::list_sweep_dirs(root_)) {
    std::ifstream in(std::filesystem::path(dir) / "manifest.json");
    auto m = json::parse(in).get<sweep::SweepManifest>();
    out.push_back(manifest_summary(m));
  }
  return {200, out};
}

Response Service::get_sweep(const std::string& id) {
  auto s = store(id);
  json body = manifest_summary(s->manifest());
  body["manifest"] = s->manifest();
  return {200, body};
}

Response Service::overview(const std::string& id, const Request& r) {
  auto s = store(id);
  const auto& m = s->manifest();
  const auto metric =
      metrics::parse_metric(r.query.contains("metric") ? r.query.at("metric") : "accuracy");
  if (m.status != sweep::Status::complete) {
    fail(409, "sweep_incomplete", "sweep '" + id + "' is " + std::string(sweep::status_name(m.status)));
  }

  std::vector<comparison::ConfigResult> results;
  for (const auto& e : m.configs) results.push_back({e.config, m.reports.at(e.config_id)});
  std::vector<std::size_t> order(results.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto va = results[a].report.value(metric);
    const auto vb = results[b].report.value(metric);
    if (va != vb) return va > vb;
    return results[a].report.config_id < results[b].report.config_id;
  });

  json configs = json::array();
  json rows = json::array();
  for (auto field : comparison::kComponentFields) {
    for (const auto& option : comparison::space_options(m.space, field)) {
      rows.push_back({{"field", field}, {"option", option}});
    }
  }
  json membership = json::array();
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto& res = results[order[rank]];
    json options = json::object();
    for (auto field : comparison::kComponentFields) {
      options[std::string(field)] = comparison::option_value(res.config, field);
    }
    json hist = json::object();
    const auto& h = m.histograms.at(res.report.config_id);
    for (auto l : kAllLabels) hist[std::string(label_code(l))] = h[label_index(l)];
    configs.push_back({{"rank", rank + 1},
                       {"config_id", res.report.config_id},
                       {"value", res.report.value(metric)},
                       {"config", res.config},
                       {"options", options},
                       {"report", res.report},
                       {"histogram", hist}});
    json column = json::array();
    for (const auto& row : rows) {
      column.push_back(comparison::option_value(res.config, row["field"].get<std::string>()) ==
                       row["option"].get<std::string>());
    }
    membership.push_back(column);
  }
  return {200, json{{"sweep_id", m.sweep_id},
                    {"metric", metrics::metric_name(metric)},
                    {"configs", configs},
                    {"matrix", {{"rows", rows}, {"membership", membership}}},
                    {"component_aggregates",
                     comparison::component_aggregates(m.space, results, metric)}}};
}

Response Service::compare(const std::string& id, const Request& r) {
  auto s = store(id);
  const auto& a = require_param(r, "a");
  const auto& b = require_param(r, "b");
  return {200, json(comparison::transition_matrix(s->runs(a), s->runs(b)))};
}

Response Service::compare_instances(const std::string& id, const Request& r) {
  auto s = store(id);
  const auto& a = require_param(r, "a");
  const auto& b = require_param(r, "b");
  const auto from = label_param(r, "from");
  const auto to = label_param(r, "to");
  const auto limit = size_param(r, "limit", kDefaultPageLimit);
  const auto offset = size_param(r, "offset", 0);
  const auto matrix = comparison::transition_matrix(s->runs(a), s->runs(b));
  const auto& ids = matrix.flow(from, to);
  json items = json::array();
  for (std::size_t i = offset; i < ids.size() && i < offset + limit; ++i) {
    const auto* ra = s->run(a, ids[i]);
    const auto* rb = s->run(b, ids[i]);
    const auto* q = s->question(ids[i]);
    items.push_back({{"question_id", ids[i]},
                     {"text", q ? q->text : std::string()},
                     {"glyph_fraction_a", ra->coverage.glyph_fraction()},
                     {"glyph_fraction_b", rb->coverage.glyph_fraction()},
                     {"outcome_a", ra->outcome},
                     {"outcome_b", rb->outcome}});
  }
  return {200, json{{"config_a", a},
                    {"config_b", b},
                    {"from", label_code(from)},
                    {"to", label_code(to)},
                    {"total", ids.size()},
                    {"limit", limit},
                    {"offset", offset},
                    {"items", items}}};
}

Response Service::instance(const std::string& id, const Request& r) {
  auto s = store(id);
  const auto& a = require_param(r, "a");
  const auto& b = require_param(r, "b");
  const auto& qid = require_param(r, "qid");
  double threshold = comparison::kDefaultPairingThreshold;
  if (auto it = r.query.find("threshold"); it != r.query.end()) {
    try {
      std::size_t pos = 0;
      threshold = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("threshold");
    } catch (const std::exception&) {
      fail(400, "bad_request", "threshold must be a number");
    }
    if (!(threshold > 0.0 && threshold <= 1.0)) fail(400, "bad_request", "threshold must be in (0, 1]");
  }
  const auto* q = s->question(qid);
  if (!q) fail(404, "not_found", "unknown question '" + qid + "'");
  const auto* ra = s->run(a, qid);
  const auto* rb = s->run(b, qid);
  if (!ra || !rb) fail(404, "not_found", "question '" + qid + "' was not run under both configs");
  auto payload = comparison::dual_track_payload(*ra, *rb, *q, s->chunks(a), s->chunks(b), threshold);
  json body = payload;
  body["question"] = *q;
  body["threshold"] = threshold;
  body["a"]["supporting_sentences"] = ra->response.supporting_sentences;
  body["b"]["supporting_sentences"] = rb->response.supporting_sentences;
  body["a"]["raw_response"] = ra->response.raw;
  body["b"]["raw_response"] = rb->response.raw;
  return {200, body};
}

Response Service::perturb(const std::string& id, const Request& r) {
  auto s = store(id);
  perturbation::PerturbationRequest req;
  try {
    req = json::parse(r.body).get<perturbation::PerturbationRequest>();
  } catch (const json::exception& e) {
    fail(400, "invalid_body", std::string("malformed perturbation request: ") + e.what());
  }
  const auto& entry = s->manifest().entry(req.config_id);
  const auto* q = s->question(req.question_id);
  if (!q) fail(404, "not_found", "unknown question '" + req.question_id + "'");
  const auto* base = s->run(req.config_id, req.question_id);
  if (!base || !base->ok()) fail(404, "not_found", "no successful base run for this question");

  auto& prov = providers_for(*s);
  providers::Generator* generator = nullptr;
  {
    std::lock_guard lock(prov.mutex);
    auto& slot = prov.generators[entry.config.response_model];
    if (!slot) slot = providers::make_generator(s->registry().get(entry.config.response_model));
    generator = slot.get();
  }
  auto resolver = [&](const std::string& chunk_id) -> std::optional<perturbation::ResolvedChunk> {
    auto found = s->resolve_chunk(req.config_id, chunk_id);
    if (!found) return std::nullopt;
    return perturbation::ResolvedChunk{found->first, found->second};
  };
  auto result =
      perturbation::perturb_and_regenerate(req, *base, *q, resolver, *generator, *prov.judge);
  perturbation::append_to_log(s->perturbation_log_path(), result);
  return {200, json(result)};
}

Response Service::perturbations(const std::string& id, const Request& r) {
  auto s = store(id);
  json items = json::array();
  const auto qid = r.query.contains("qid") ? r.query.at("qid") : std::string();
  for (const auto& p : perturbation::read_log(s->perturbation_log_path())) {
    if (qid.empty() || p.question_id == qid) items.push_back(p);
  }
  return {200, json{{"items", items}}};
}

void serve(const std::string& root, const ServeOptions& options, const std::atomic<bool>& stop,
           const std::function<void(int)>& on_ready) {
  Service service(root);
  httplib::Server server;

  auto cors = [&](httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", options.cors_origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  };
  auto bridge = [&](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    auto out = service.handle(r);
    cors(res);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server.Get(R"(/api/.*)", bridge);
  server.Post(R"(/api/.*)", bridge);
  server.Put(R"(/api/.*)", bridge);
  server.Patch(R"(/api/.*)", bridge);
  server.Delete(R"(/api/.*)", bridge);
  server.Options(R"(/api/.*)", [&](const httplib::Request&, httplib::Response& res) {
    cors(res);
    res.status = 204;
  });
  if (options.static_dir) server.set_mount_point("/", *options.static_dir);

  int port = options.port;
  if (port == 0) {
    port = server.bind_to_any_port(options.host);
  } else if (!server.bind_to_port(options.host, port)) {
    port = -1;
  }
  if (port < 0) throw Error("io_error", "cannot bind " + options.host + ":" + std::to_string(options.port));

  std::atomic<bool> done{false};
  std::thread listener([&] {
    server.listen_after_bind();
    done = true;
  });
  while (!server.is_running() && !done) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  if (done) {
    listener.join();
    throw Error("io_error", "server stopped before listening");
  }
  if (on_ready) on_ready(port);
  while (!stop.load() && !done) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  listener.join();
}

}  // namespace raglab::api
