#include <doctest.h>

#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "regrow/cli.hpp"
#include "regrow/corpus.hpp"
#include "regrow/service.hpp"

using namespace regrow;
using nlohmann::json;

namespace {

const std::string kSource = REGROW_SOURCE_DIR;

EnsembleConfig quick_defaults() {
  EnsembleConfig c = EnsembleConfig::standard();
  c.rounds = {{EngineKind::Smc, 40, 1, 10.0, ProcessingOrder::Serial, true},
              {EngineKind::ParticleGibbs, 20, 2, 10.0, ProcessingOrder::Serial, true}};
  return c;
}

// A service on an ephemeral port for the lifetime of the fixture.
class Harness {
 public:
  explicit Harness(ServiceOptions options = {quick_defaults()}) : service_(std::move(options)) {
    service_.mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  ~Harness() {
    service_.wait_idle();
    server_.stop();
    thread_.join();
  }

  std::pair<int, json> call(const std::string& method, const std::string& path, const json& body = nullptr) {
    httplib::Result r;
    const std::string text = body.is_null() ? "" : body.dump();
    if (method == "GET") r = client_->Get(path);
    if (method == "POST") r = client_->Post(path, text, "application/json");
    if (method == "DELETE") r = client_->Delete(path);
    REQUIRE(r);
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }

  std::string create(const json& body = json::object()) {
    auto [status, j] = call("POST", "/sessions", body);
    REQUIRE(status == 201);
    return j["id"].get<std::string>();
  }

  void add(const std::string& sid, const std::string& text, const std::string& label) {
    auto [status, j] = call("POST", "/sessions/" + sid + "/examples", {{"text", text}, {"label", label}});
    REQUIRE(status == 201);
  }

  json infer_and_wait(const std::string& sid, const json& body = json::object()) {
    auto [status, j] = call("POST", "/sessions/" + sid + "/infer", body);
    REQUIRE(status == 202);
    service_.wait_idle();
    return call("GET", "/sessions/" + sid + "/status").second;
  }

  httplib::Client& client() { return *client_; }
  Service& service() { return service_; }

 private:
  Service service_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace

TEST_CASE("session lifecycle") {
  Harness h;
  const std::string sid = h.create();
  auto [s1, j1] = h.call("GET", "/sessions/" + sid);
  CHECK(s1 == 200);
  CHECK(j1["state"] == "idle");
  CHECK(j1["examples"].empty());

  auto [s2, j2] = h.call("POST", "/sessions/" + sid + "/examples", {{"text", "ab"}, {"label", "+"}});
  CHECK(s2 == 201);
  CHECK(j2["example"]["id"] == 1);
  CHECK(j2["stale"] == false);

  CHECK(h.call("POST", "/sessions/" + sid + "/examples", {{"text", "ab"}, {"label", "-"}}).first == 400);
  CHECK(h.call("POST", "/sessions/" + sid + "/examples", {{"text", ""}, {"label", "+"}}).first == 400);
  CHECK(h.call("POST", "/sessions/" + sid + "/examples", {{"text", "x"}, {"label", "?"}}).first == 400);
  CHECK(h.call("POST", "/sessions/" + sid + "/examples", {{"text", "a\tb"}, {"label", "+"}}).first == 400);
  const auto bad = h.client().Post("/sessions/" + sid + "/examples", "{not json", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body)["reason"] == "bad-request");

  CHECK(h.call("DELETE", "/sessions/" + sid + "/examples/99").first == 404);
  CHECK(h.call("DELETE", "/sessions/" + sid + "/examples/1").first == 204);
  CHECK(h.call("GET", "/sessions/" + sid).second["examples"].empty());

  CHECK(h.call("DELETE", "/sessions/" + sid).first == 204);
  auto [s3, j3] = h.call("GET", "/sessions/" + sid);
  CHECK(s3 == 404);
  CHECK(j3["reason"] == "not-found");
  CHECK(h.call("GET", "/sessions/nope/status").first == 404);
  CHECK(h.call("POST", "/sessions/nope/infer").first == 404);
}

TEST_CASE("sessions are isolated") {
  Harness h;
  const std::string a = h.create({{"examples", {{{"text", "ab"}, {"label", "+"}}}}});
  const std::string b = h.create();
  CHECK(a != b);
  h.add(b, "zz", "+");
  CHECK(h.call("GET", "/sessions/" + a).second["examples"].size() == 1);
  CHECK(h.call("GET", "/sessions/" + a).second["examples"][0]["text"] == "ab");
  CHECK(h.call("GET", "/sessions/" + b).second["examples"][0]["text"] == "zz");
  CHECK(h.call("POST", "/sessions", {{"examples", "ab"}}).first == 400);
}

TEST_CASE("inference needs positives") {
  Harness h;
  const std::string sid = h.create();
  h.add(sid, "a", "-");
  auto [status, j] = h.call("POST", "/sessions/" + sid + "/infer");
  CHECK(status == 422);
  CHECK(j["reason"] == "positives-required");
  auto [cs, cj] = h.call("GET", "/sessions/" + sid + "/candidates");
  CHECK(cs == 404);
  CHECK(cj["reason"] == "no-result");
}

TEST_CASE("candidates, acceptance matrix and staleness") {
  Harness h;
  const std::string sid = h.create();
  h.add(sid, "ab", "+");
  h.add(sid, "abb", "+");
  h.add(sid, "a", "-");
  const json status = h.infer_and_wait(sid, {{"seed", 3}});
  CHECK(status["state"] == "done");
  CHECK(status["stale"] == false);

  auto [cs, cj] = h.call("GET", "/sessions/" + sid + "/candidates?k=5");
  REQUIRE(cs == 200);
  CHECK(cj["status"] == "ok");
  CHECK(cj["stale"] == false);
  CHECK(cj["candidates"].size() <= 5);
  CHECK(cj["examples"].size() == 3);
  double previous = 1.0;
  for (const auto& c : cj["candidates"]) {
    CHECK(c["accepts"] == json::array({true, true, false}));
    CHECK(c["posterior"].get<double>() <= previous);
    previous = c["posterior"].get<double>();
  }
  CHECK(h.call("GET", "/sessions/" + sid + "/candidates?k=0").first == 400);
  CHECK(h.call("GET", "/sessions/" + sid + "/candidates?k=x").first == 400);

  h.add(sid, "abbb", "-");
  auto [s2, j2] = h.call("GET", "/sessions/" + sid + "/candidates");
  CHECK(j2["stale"] == true);
  CHECK(j2["examples"].size() == 4);
  CHECK(j2["candidates"][0]["accepts"].size() == 4);
  CHECK(h.call("GET", "/sessions/" + sid).second["stale"] == true);

  h.infer_and_wait(sid, {{"seed", 3}});
  CHECK(h.call("GET", "/sessions/" + sid + "/candidates").second["stale"] == false);
  CHECK(h.call("DELETE", "/sessions/" + sid + "/examples/4").first == 204);
  CHECK(h.call("GET", "/sessions/" + sid + "/candidates").second["stale"] == true);
}

TEST_CASE("concurrent inference on one session is refused") {
  EnsembleConfig slow = EnsembleConfig::standard();
  slow.rounds = {{EngineKind::Rejection, 100000000, 1, 1.5, ProcessingOrder::Serial, true}};
  ServiceOptions options{slow};
  Harness h(options);
  const std::string sid = h.create({{"examples", {{{"text", "abcabc"}, {"label", "+"}}}}});
  auto [s1, j1] = h.call("POST", "/sessions/" + sid + "/infer");
  CHECK(s1 == 202);
  CHECK(j1["state"] == "running");
  auto [s2, j2] = h.call("POST", "/sessions/" + sid + "/infer");
  CHECK(s2 == 409);
  CHECK(j2["reason"] == "conflict");
  h.service().wait_idle();
  CHECK(h.call("GET", "/sessions/" + sid + "/status").second["state"] == "done");
}

TEST_CASE("infer body validation") {
  Harness h;
  const std::string sid = h.create({{"examples", {{{"text", "ab"}, {"label", "+"}}}}});
  CHECK(h.call("POST", "/sessions/" + sid + "/infer", {{"max_seconds", -1}}).first == 400);
  CHECK(h.call("POST", "/sessions/" + sid + "/infer", {{"ensemble", {{"rounds", json::array()}}}}).first == 400);
  CHECK(h.call("POST", "/sessions/" + sid + "/infer", {{"seed", "x"}}).first == 400);
  const json ok = h.infer_and_wait(
      sid, {{"ensemble", {{"rounds", {{{"engine", "smc"}, {"count", 10}}}}, {"alpha_r", {0.5}}, {"alpha_n", {1.0}}}}});
  CHECK(ok["state"] == "done");
}

TEST_CASE("CORS") {
  Harness h;
  const auto pre = h.client().Options("/sessions");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Origin") == "*");
  const auto get = h.client().Get("/sessions/none");
  REQUIRE(get);
  CHECK(get->get_header_value("Access-Control-Allow-Origin") == "*");
}

TEST_CASE("bracket examples replayed one by one match the command line") {
  ServiceOptions options;
  options.max_budget_seconds = 600;
  Harness h(options);
  const auto corpus = load_corpus(kSource + "/data/fixtures.jsonl");
  const Dataset* bracket = nullptr;
  for (const auto& d : corpus)
    if (d.id == "bracket-hello") bracket = &d;
  REQUIRE(bracket);

  const std::string sid = h.create();
  std::vector<std::pair<std::string, std::string>> steps;
  for (const auto& p : bracket->positives) steps.emplace_back(p, "+");
  for (const auto& n : bracket->negatives) steps.emplace_back(n, "-");
  bool first = true;
  for (const auto& [text, label] : steps) {
    h.add(sid, text, label);
    if (!first) {
      CHECK(h.call("GET", "/sessions/" + sid).second["stale"] == true);
    }
    first = false;
    h.infer_and_wait(sid, {{"seed", 4}});
    CHECK(h.call("GET", "/sessions/" + sid).second["stale"] == false);
  }
  const json service = h.call("GET", "/sessions/" + sid + "/candidates?k=10").second;

  const std::string fixtures = kSource + "/data/fixtures.jsonl";
  const char* argv[] = {"regrow", "synth", "--data", fixtures.c_str(), "--id", "bracket-hello",
                        "--seed", "4", "--k", "10", "--format", "json"};
  std::ostringstream out, err;
  REQUIRE(run_cli(12, argv, out, err) == 0);
  const json cli = json::parse(out.str());
  REQUIRE(cli["candidates"].size() == service["candidates"].size());
  for (std::size_t i = 0; i < cli["candidates"].size(); ++i) {
    CHECK(cli["candidates"][i]["regex"] == service["candidates"][i]["regex"]);
    CHECK(cli["candidates"][i]["posterior"] == service["candidates"][i]["posterior"]);
  }
  CHECK(cli["uninformative"] == service["uninformative"]);
}
