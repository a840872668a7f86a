#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include "automsc/classifier.hpp"

namespace automsc {

struct ServiceOptions {
  /// Directory holding the UI bundle served under "/". Empty disables it.
  std::filesystem::path assets_dir;
  /// Sends "Cache-Control: no-store" with static assets instead of a
  /// cacheable max-age.
  bool dev_mode = false;
};

/// An HTTP status code plus body, independent of the transport.
struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// JSON classification API over one immutable model.
///
///   POST /api/v1/classify  {"title","text","mscs","top_k"} -> ranked suggestions
///   GET  /api/v1/health    -> {"status","model_version","classes"}
///   GET  /<asset>          -> static UI files
///
/// The model may be installed after the server starts listening; until then
/// the API answers 503. Handlers share the model read-only.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void set_model(std::shared_ptr<const TrainedModel> model);

  HttpReply classify(const std::string& request_body) const;
  HttpReply health() const;
  HttpReply asset(const std::string& request_path) const;

  /// Binds to host:port; port 0 picks a free port. Returns the bound port
  /// or throws Error(Io).
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Requires a prior bind().
  void listen();
  void stop();
  bool running() const;

 private:
  struct Loaded {
    std::shared_ptr<const TrainedModel> model;
    std::string version;
  };
  Loaded loaded() const;

  ServiceOptions options_;
  mutable std::mutex mutex_;
  Loaded loaded_;

  struct Http;
  std::unique_ptr<Http> http_;
};

}  // namespace automsc
