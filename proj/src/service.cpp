#include "regrow/service.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "regrow/automata.hpp"
#include "regrow/errors.hpp"

namespace regrow {

using nlohmann::json;

namespace {

struct Example {
  int id = 0;
  std::string text;
  bool positive = true;
};

enum class JobState { Idle, Running, Done, Failed };

const char* to_string(JobState s) {
  switch (s) {
    case JobState::Idle:
      return "idle";
    case JobState::Running:
      return "running";
    case JobState::Done:
      return "done";
    case JobState::Failed:
      return "failed";
  }
  return "?";
}

struct Session {
  std::mutex mutex;
  std::string id;
  std::vector<Example> examples;
  int next_example_id = 1;
  std::uint64_t version = 0;  // bumped on every example mutation
  JobState state = JobState::Idle;
  std::optional<std::string> error;
  std::optional<Ranking> result;
  std::uint64_t result_version = 0;

  bool stale() const { return result && result_version != version; }
};

json example_json(const Example& e) {
  return {{"id", e.id}, {"text", e.text}, {"label", e.positive ? "+" : "-"}};
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& reason, const std::string& message) {
  reply(res, status, {{"error", message}, {"reason", reason}});
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  if (req.body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw InputError("body must be a JSON object");
    return j;
  } catch (const std::exception& e) {
    fail(res, 400, "bad-request", std::string("invalid JSON body: ") + e.what());
    return std::nullopt;
  }
}

Dataset dataset_of(const Session& s) {
  Dataset d;
  d.id = s.id;
  for (const auto& e : s.examples) (e.positive ? d.positives : d.negatives).push_back(e.text);
  return d;
}

std::string new_token() {
  static std::mutex m;
  static std::mt19937_64 gen{std::random_device{}()};
  std::lock_guard lock(m);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
  return buf;
}

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  std::mutex mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::vector<std::thread> jobs;

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(mutex);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  // Returns an error message, or nothing when the example was added.
  std::optional<std::string> add_example(Session& s, const json& j, Example* added) {
    if (!j.contains("text") || !j.at("text").is_string()) return "example needs a string 'text'";
    if (!j.contains("label") || !j.at("label").is_string()) return "example needs a 'label' of '+' or '-'";
    const std::string text = j.at("text").get<std::string>();
    const std::string label = j.at("label").get<std::string>();
    if (label != "+" && label != "-") return "label must be '+' or '-'";
    if (text.empty()) return "example text must be non-empty";
    for (char c : text)
      if (!options.alphabet->contains(c)) return "example contains a character outside the alphabet";
    for (const auto& e : s.examples)
      if (e.text == text) return "example '" + text + "' is already present";
    Example e{s.next_example_id++, text, label == "+"};
    s.examples.push_back(e);
    ++s.version;
    if (added) *added = e;
    return std::nullopt;
  }

  json session_json(const Session& s) const {
    json examples = json::array();
    for (const auto& e : s.examples) examples.push_back(example_json(e));
    return {{"id", s.id},
            {"examples", examples},
            {"state", to_string(s.state)},
            {"stale", s.stale()},
            {"has_result", s.result.has_value()},
            {"error", s.error ? json(*s.error) : json(nullptr)}};
  }

  json status_json(const Session& s) const {
    json j = {{"state", to_string(s.state)},
              {"stale", s.stale()},
              {"error", s.error ? json(*s.error) : json(nullptr)},
              {"result_status", nullptr},
              {"uninformative", nullptr}};
    if (s.result) {
      j["result_status"] = regrow::to_string(s.result->status);
      j["uninformative"] = uninformative(*s.result);
    }
    return j;
  }

  bool uninformative(const Ranking& r) const {
    return r.candidates.empty() || r.candidates.front().posterior < options.uninformative_threshold;
  }

  void start_job(std::shared_ptr<Session> s, Dataset data, EnsembleConfig config, std::uint64_t version) {
    std::lock_guard lock(mutex);
    jobs.emplace_back([this, s, data = std::move(data), config = std::move(config), version] {
      std::optional<Ranking> ranking;
      std::optional<std::string> error;
      try {
        ranking = run_ensemble(data, config, options.alphabet).ranking;
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard session_lock(s->mutex);
      if (ranking) {
        s->result = std::move(ranking);
        s->result_version = version;
        s->state = JobState::Done;
        s->error.reset();
      } else {
        s->state = JobState::Failed;
        s->error = error;
      }
    });
  }

  void join_all() {
    std::vector<std::thread> running;
    {
      std::lock_guard lock(mutex);
      running.swap(jobs);
    }
    for (auto& t : running)
      if (t.joinable()) t.join();
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  options.defaults.validate();
  if (!(options.max_budget_seconds > 0.0)) throw InputError("max budget must be positive");
  impl_->options = std::move(options);
}

Service::~Service() { impl_->join_all(); }

void Service::wait_idle() { impl_->join_all(); }

void Service::mount(httplib::Server& server) {
  Impl& impl = *impl_;
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/sessions", [&impl](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req, res);
    if (!body) return;
    auto s = std::make_shared<Session>();
    if (body->contains("examples")) {
      const json& list = body->at("examples");
      if (!list.is_array()) return fail(res, 400, "bad-request", "'examples' must be an array");
      for (const auto& e : list) {
        if (auto err = impl.add_example(*s, e, nullptr)) return fail(res, 400, "bad-request", *err);
      }
    }
    std::lock_guard lock(impl.mutex);
    do s->id = new_token();
    while (impl.sessions.count(s->id));
    impl.sessions.emplace(s->id, s);
    reply(res, 201, impl.session_json(*s));
  });

  server.Get(R"(/sessions/([^/]+))", [&impl](const httplib::Request& req, httplib::Response& res) {
    auto s = impl.find(req.matches[1]);
    if (!s) return fail(res, 404, "not-found", "unknown session");
    std::lock_guard lock(s->mutex);
    reply(res, 200, impl.session_json(*s));
  });

  server.Delete(R"(/sessions/([^/]+))", [&impl](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(impl.mutex);
    if (!impl.sessions.erase(req.matches[1])) return fail(res, 404, "not-found", "unknown session");
    res.status = 204;
  });

  server.Post(R"(/sessions/([^/]+)/examples)", [&impl](const httplib::Request& req, httplib::Response& res) {
    auto s = impl.find(req.matches[1]);
    if (!s) return fail(res, 404, "not-found", "unknown session");
    auto body = parse_body(req, res);
    if (!body) return;
    std::lock_guard lock(s->mutex);
    Example added;
    if (auto err = impl.add_example(*s, *body, &added)) return fail(res, 400, "bad-request", *err);
    reply(res, 201, {{"example", example_json(added)}, {"stale", s->stale()}});
  });

  server.Delete(R"(/sessions/([^/]+)/examples/(\d+))", [&impl](const httplib::Request& req,
                                                               httplib::Response& res) {
    auto s = impl.find(req.matches[1]);
    if (!s) return fail(res, 404, "not-found", "unknown session");
    const int eid = std::stoi(req.matches[2]);
    std::lock_guard lock(s->mutex);
    auto it = std::find_if(s->examples.begin(), s->examples.end(), [&](const Example& e) { return e.id == eid; });
    if (it == s->examples.end()) return fail(res, 404, "not-found", "unknown example");
    s->examples.erase(it);
    ++s->version;
    res.status = 204;
  });

  server.Post(R"(/sessions/([^/]+)/infer)", [&impl](const httplib::Request& req, httplib::Response& res) {
    auto s = impl.find(req.matches[1]);
    if (!s) return fail(res, 404, "not-found", "unknown session");
    auto body = parse_body(req, res);
    if (!body) return;
    EnsembleConfig config = impl.options.defaults;
    try {
      if (body->contains("ensemble")) config = parse_ensemble_config(body->at("ensemble").dump());
      if (body->contains("seed")) config.seed = body->at("seed").get<std::uint64_t>();
      double budget = impl.options.max_budget_seconds;
      if (config.max_seconds) budget = std::min(budget, *config.max_seconds);
      if (body->contains("max_seconds")) budget = std::min(budget, body->at("max_seconds").get<double>());
      if (!(budget > 0.0)) throw InputError("max_seconds must be positive");
      config.max_seconds = budget;
    } catch (const std::exception& e) {
      return fail(res, 400, "bad-request", e.what());
    }

    std::lock_guard lock(s->mutex);
    if (s->state == JobState::Running) return fail(res, 409, "conflict", "inference already running");
    Dataset data = dataset_of(*s);
    if (!data.runnable()) return fail(res, 422, "positives-required", PositivesRequired().what());
    s->state = JobState::Running;
    s->error.reset();
    impl.start_job(s, std::move(data), std::move(config), s->version);
    reply(res, 202, impl.status_json(*s));
  });

  server.Get(R"(/sessions/([^/]+)/status)", [&impl](const httplib::Request& req, httplib::Response& res) {
    auto s = impl.find(req.matches[1]);
    if (!s) return fail(res, 404, "not-found", "unknown session");
    std::lock_guard lock(s->mutex);
    reply(res, 200, impl.status_json(*s));
  });

  server.Get(R"(/sessions/([^/]+)/candidates)", [&impl](const httplib::Request& req, httplib::Response& res) {
    auto s = impl.find(req.matches[1]);
    if (!s) return fail(res, 404, "not-found", "unknown session");
    std::size_t k = 10;
    if (req.has_param("k")) {
      try {
        const long v = std::stol(req.get_param_value("k"));
        if (v < 1) throw std::out_of_range("k");
        k = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        return fail(res, 400, "bad-request", "k must be a positive integer");
      }
    }
    std::lock_guard lock(s->mutex);
    if (!s->result) return fail(res, 404, "no-result", "no inference result yet");
    const Alphabet& alphabet = *impl.options.alphabet;
    json examples = json::array();
    for (const auto& e : s->examples) examples.push_back(example_json(e));
    json candidates = json::array();
    const auto& list = s->result->candidates;
    for (std::size_t i = 0; i < list.size() && i < k; ++i) {
      json accepts = json::array();
      for (const auto& e : s->examples) accepts.push_back(matches(list[i].ast, e.text, alphabet));
      candidates.push_back({{"rank", i + 1},
                            {"regex", list[i].canonical},
                            {"posterior", list[i].posterior},
                            {"log_prior", list[i].log_prior},
                            {"log_likelihood", *list[i].log_likelihood},
                            {"accepts", accepts}});
    }
    reply(res, 200,
          {{"status", regrow::to_string(s->result->status)},
           {"stale", s->stale()},
           {"uninformative", impl.uninformative(*s->result)},
           {"total", list.size()},
           {"examples", examples},
           {"candidates", candidates}});
  });
}

void serve(const std::string& host, int port, ServiceOptions options) {
  Service service(std::move(options));
  httplib::Server server;
  service.mount(server);
  if (!server.listen(host, port)) throw InputError("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace regrow
