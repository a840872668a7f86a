#include "automsc/service.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "automsc/error.hpp"
#include "automsc/log.hpp"

namespace automsc {

namespace {

using nlohmann::json;

HttpReply json_reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpReply error_reply(int status, const std::string& message) {
  return json_reply(status, json{{"error", message}});
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string content_type_for(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".map") return "application/json";
  if (ext == ".txt") return "text/plain; charset=utf-8";
  return "application/octet-stream";
}

}  // namespace

struct Service::Http {
  httplib::Server server;
};

Service::Service(ServiceOptions options) : options_(std::move(options)), http_(std::make_unique<Http>()) {
  auto& server = http_->server;
  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  };

  server.Post("/api/v1/classify", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, classify(req.body));
  });
  server.Get("/api/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, health());
  });
  server.Get(R"(/.*)", [this, send](const httplib::Request& req, httplib::Response& res) {
    const HttpReply reply = asset(req.path);
    send(res, reply);
    if (reply.status == 200) {
      res.set_header("Cache-Control", options_.dev_mode ? "no-store" : "public, max-age=300");
    }
  });
  server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
  });
}

Service::~Service() { stop(); }

void Service::set_model(std::shared_ptr<const TrainedModel> model) {
  Loaded next;
  if (model) next.version = model_version(*model);
  next.model = std::move(model);
  std::lock_guard lock(mutex_);
  loaded_ = std::move(next);
}

Service::Loaded Service::loaded() const {
  std::lock_guard lock(mutex_);
  return loaded_;
}

HttpReply Service::classify(const std::string& request_body) const {
  const Loaded current = loaded();
  if (!current.model) return error_reply(503, "model not loaded");
  const TrainedModel& model = *current.model;

  json req;
  try {
    req = json::parse(request_body);
  } catch (const json::parse_error& e) {
    return error_reply(400, std::string("request body is not valid JSON: ") + e.what());
  }
  if (!req.is_object()) return error_reply(400, "request body must be a JSON object");

  ArticleRecord article;
  std::string mscs;
  for (auto [key, target] : {std::pair{"title", &article.title}, std::pair{"text", &article.text},
                             std::pair{"mscs", &mscs}}) {
    const auto it = req.find(key);
    if (it == req.end() || it->is_null()) continue;
    if (!it->is_string()) return error_reply(400, std::string("field '") + key + "' must be a string");
    *target = it->get<std::string>();
  }
  if (blank(article.title) && blank(article.text) && blank(mscs)) {
    return error_reply(400, "at least one of title, text or mscs must be non-empty");
  }
  try {
    article.ref_mscs = parse_ref_mscs(mscs, RefPolicy::Reject);
  } catch (const Error& e) {
    return error_reply(400, std::string("malformed mscs field: ") + e.what());
  }

  const auto n_classes = static_cast<std::int64_t>(model.classes.size());
  std::int64_t top_k = std::min<std::int64_t>(5, n_classes);
  if (const auto it = req.find("top_k"); it != req.end() && !it->is_null()) {
    if (!it->is_number_integer()) return error_reply(422, "top_k must be an integer");
    top_k = it->get<std::int64_t>();
    if (top_k < 1 || top_k > n_classes) {
      return error_reply(422, "top_k must lie in [1, " + std::to_string(n_classes) + "]");
    }
  }

  ClassDistribution dist;
  try {
    dist = automsc::classify(model, article);
  } catch (const Error& e) {
    return error_reply(500, e.what());
  }
  json suggestions = json::array();
  for (const auto& [subject, score] : dist.top(static_cast<std::size_t>(top_k))) {
    suggestions.push_back({{"coarse", subject}, {"score", score}});
  }
  return json_reply(200, json{{"suggestions", suggestions},
                              {"method", model.method_id},
                              {"model_version", current.version}});
}

HttpReply Service::health() const {
  const Loaded current = loaded();
  if (!current.model) return json_reply(503, json{{"status", "loading"}});
  return json_reply(200, json{{"status", "ok"},
                              {"model_version", current.version},
                              {"classes", current.model->classes.size()}});
}

HttpReply Service::asset(const std::string& request_path) const {
  if (options_.assets_dir.empty()) return error_reply(404, "not found");
  std::string rel = request_path;
  while (!rel.empty() && rel.front() == '/') rel.erase(rel.begin());
  if (rel.empty()) rel = "index.html";

  const std::filesystem::path relative(rel);
  for (const auto& part : relative) {
    if (part == ".." || part == ".") return error_reply(404, "not found");
  }
  std::filesystem::path full = options_.assets_dir / relative;
  std::error_code ec;
  if (std::filesystem::is_directory(full, ec)) full /= "index.html";
  if (!std::filesystem::is_regular_file(full, ec)) return error_reply(404, "not found");

  std::ifstream in(full, std::ios::binary);
  if (!in) return error_reply(404, "not found");
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return {200, std::move(body), content_type_for(full)};
}

int Service::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = http_->server.bind_to_any_port(host);
  } else if (!http_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Service::listen() { http_->server.listen_after_bind(); }

void Service::stop() {
  if (http_) http_->server.stop();
}

bool Service::running() const { return http_->server.is_running(); }

}  // namespace automsc
