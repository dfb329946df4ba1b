#pragma once

#include <array>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "raglab/sweep.hpp"
#include "raglab/types.hpp"

namespace raglab::api {

inline constexpr int kDefaultPort = 7341;
inline constexpr std::size_t kDefaultPageLimit = 100;

struct ApiError {
  int status = 500;
  std::string code;
  std::string message;
};

// Error codes the service can emit.
inline constexpr std::array<std::string_view, 9> kErrorCodes = {
    "not_found",     "bad_request",    "invalid_metric",     "invalid_body", "sweep_incomplete",
    "unresolvable_chunk", "provider_error", "method_not_allowed", "internal"};

json error_body(const ApiError& e);

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  json body;
};

// Transport-independent request handling over a store root or sweep
// directory. Sweeps are opened on first use and cached.
class Service {
 public:
  explicit Service(std::string root);

  Response handle(const Request& request);

 private:
  struct Providers;

  std::shared_ptr<sweep::SweepStore> store(const std::string& sweep_id);
  Providers& providers_for(const sweep::SweepStore& store);

  Response list_sweeps();
  Response get_sweep(const std::string& id);
  Response overview(const std::string& id, const Request& r);
  Response compare(const std::string& id, const Request& r);
  Response compare_instances(const std::string& id, const Request& r);
  Response instance(const std::string& id, const Request& r);
  Response perturb(const std::string& id, const Request& r);
  Response perturbations(const std::string& id, const Request& r);

  std::string root_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<sweep::SweepStore>> stores_;
  std::map<std::string, std::shared_ptr<Providers>> providers_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = kDefaultPort;
  std::optional<std::string> static_dir;  // built UI assets
  std::string cors_origin = "*";
};

// Blocks until `stop` becomes true (polled) or the server fails to bind.
// `on_ready` runs once the socket is listening, with the bound port.
void serve(const std::string& root, const ServeOptions& options, const std::atomic<bool>& stop,
           const std::function<void(int)>& on_ready = {});

}  // namespace raglab::api
