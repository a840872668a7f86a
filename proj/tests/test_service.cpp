#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <future>
#include <thread>

#include "automsc/service.hpp"
#include "support/synthetic.hpp"

#include <httplib.h>
#include <json.hpp>

using namespace automsc;
using nlohmann::json;

namespace {

std::shared_ptr<const TrainedModel> refs_model() {
  // three classes, each owning one reference code
  std::vector<ArticleRecord> corpus;
  const char* codes[] = {"81Q05", "05C10", "68T50"};
  DocId de = 1;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 6; ++i) {
      ArticleRecord a;
      a.de = de++;
      a.labels = {parse_msc_code(codes[c])};
      a.title = "article " + std::to_string(i);
      a.ref_mscs = parse_ref_mscs(codes[c]);
      corpus.push_back(a);
    }
  }
  return std::make_shared<const TrainedModel>(fit_model(corpus, variants::refs, Hyperparams{}));
}

json body_of(const HttpReply& r) { return json::parse(r.body); }

}  // namespace

TEST_CASE("classify before a model is loaded") {
  Service s;
  CHECK(s.classify(R"({"title":"x"})").status == 503);
  CHECK(s.health().status == 503);
  CHECK(body_of(s.health())["status"] == "loading");
}

TEST_CASE("classify") {
  Service s;
  const auto model = refs_model();
  s.set_model(model);

  SUBCASE("marker reference code leads the suggestions") {
    const auto r = s.classify(R"({"mscs":"81Q05"})");
    REQUIRE(r.status == 200);
    const auto j = body_of(r);
    CHECK(j["suggestions"][0]["coarse"] == 81);
    CHECK(j["method"] == "refs ");
    CHECK(j["model_version"] == model_version(*model));
    CHECK(j["suggestions"].size() == 3);  // default min(5, K)
  }
  SUBCASE("full distribution sums to one, scores descend") {
    const auto j = body_of(s.classify(R"({"mscs":"05C10","top_k":3})"));
    double sum = 0, prev = 2;
    for (const auto& sug : j["suggestions"]) {
      const double score = sug["score"];
      CHECK(score <= prev);
      prev = score;
      sum += score;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
  SUBCASE("subset is not renormalized") {
    const auto j = body_of(s.classify(R"({"mscs":"05C10","top_k":1})"));
    REQUIRE(j["suggestions"].size() == 1);
    CHECK(j["suggestions"][0]["score"].get<double>() < 1.0);
  }
  SUBCASE("bad requests") {
    CHECK(s.classify(R"({})").status == 400);
    CHECK(s.classify(R"({"title":"","text":"  ","mscs":""})").status == 400);
    CHECK(s.classify("not json").status == 400);
    CHECK(s.classify("[1,2]").status == 400);
    CHECK(s.classify(R"({"title":5})").status == 400);
    CHECK(s.classify(R"({"mscs":"81Q0"})").status == 400);
    CHECK(s.classify(R"({"mscs":"81Q05","top_k":0})").status == 422);
    CHECK(s.classify(R"({"mscs":"81Q05","top_k":4})").status == 422);
    CHECK(s.classify(R"({"mscs":"81Q05","top_k":"2"})").status == 422);
    CHECK(s.classify(R"({"mscs":"81Q05","top_k":1.5})").status == 422);
  }
  SUBCASE("identical bodies give byte-identical responses") {
    const std::string body = R"({"title":"article","mscs":"68T50,05C10","top_k":2})";
    CHECK(s.classify(body).body == s.classify(body).body);
  }
  SUBCASE("health") {
    const auto h = s.health();
    CHECK(h.status == 200);
    CHECK(body_of(h)["classes"] == 3);
    CHECK(body_of(h)["status"] == "ok");
  }
}

TEST_CASE("static assets") {
  testing::TempDir dir;
  std::ofstream(dir / "index.html") << "<!doctype html><title>ui</title>";
  std::ofstream(dir / "app.js") << "console.log(1)";
  SUBCASE("served with content types") {
    Service s(ServiceOptions{dir.path(), false});
    const auto index = s.asset("/index.html");
    CHECK(index.status == 200);
    CHECK(index.content_type.rfind("text/html", 0) == 0);
    CHECK(s.asset("/").body == index.body);
    CHECK(s.asset("/app.js").content_type.rfind("text/javascript", 0) == 0);
    CHECK(s.asset("/missing.js").status == 404);
    CHECK(s.asset("/../etc/passwd").status == 404);
  }
  SUBCASE("no asset directory") {
    Service s;
    CHECK(s.asset("/index.html").status == 404);
  }
}

TEST_CASE("over HTTP") {
  testing::TempDir dir;
  std::ofstream(dir / "index.html") << "<!doctype html>";
  Service s(ServiceOptions{dir.path(), true});
  const int port = s.bind("127.0.0.1", 0);
  std::thread server([&] { s.listen(); });
  httplib::Client client("127.0.0.1", port);
  for (int i = 0; i < 200 && !s.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));

  auto health = client.Get("/api/v1/health");
  REQUIRE(health);
  CHECK(health->status == 503);

  s.set_model(refs_model());
  health = client.Get("/api/v1/health");
  REQUIRE(health);
  CHECK(health->status == 200);

  const auto index = client.Get("/");
  REQUIRE(index);
  CHECK(index->status == 200);
  CHECK(index->get_header_value("Cache-Control") == "no-store");
  const auto missing = client.Get("/missing.js");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  const auto unknown = client.Post("/api/v1/nope", "{}", "application/json");
  REQUIRE(unknown);
  CHECK(unknown->status == 404);

  const std::string body = R"({"mscs":"68T50","top_k":3})";
  const auto serial = client.Post("/api/v1/classify", body, "application/json");
  REQUIRE(serial);
  CHECK(serial->status == 200);
  CHECK(serial->get_header_value("Content-Type") == "application/json");

  // concurrent requests return the serial answer
  std::vector<std::future<std::string>> futures;
  for (int t = 0; t < 8; ++t) {
    futures.push_back(std::async(std::launch::async, [&] {
      httplib::Client c("127.0.0.1", port);
      std::string last;
      for (int i = 0; i < 10; ++i) {
        const auto r = c.Post("/api/v1/classify", body, "application/json");
        if (!r || r->status != 200) return std::string("failed");
        last = r->body;
      }
      return last;
    }));
  }
  for (auto& f : futures) CHECK(f.get() == serial->body);

  s.stop();
  server.join();
  CHECK(!s.running());
}
