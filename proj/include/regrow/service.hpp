#pragma once

#include <memory>
#include <string>

#include "regrow/inference.hpp"

namespace httplib {
class Server;
}

namespace regrow {

struct ServiceOptions {
  EnsembleConfig defaults = EnsembleConfig::standard();
  double max_budget_seconds = 60.0;  // hard cap on one inference job
  double uninformative_threshold = 0.9;
  AlphabetPtr alphabet = Alphabet::printable_ascii();
};

// In-memory teaching sessions over HTTP/JSON:
//   POST   /sessions                       create (optional {"examples": [...]})
//   GET    /sessions/{id}                  examples and job state
//   DELETE /sessions/{id}
//   POST   /sessions/{id}/examples         {"text": "...", "label": "+" | "-"}
//   DELETE /sessions/{id}/examples/{eid}
//   POST   /sessions/{id}/infer            async; optional {"seed", "max_seconds", "ensemble"}
//   GET    /sessions/{id}/status
//   GET    /sessions/{id}/candidates?k=N   ranked regexes with per-example acceptance
// Errors carry {"error": message, "reason": code}.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void mount(httplib::Server& server);

  // Blocks until every running inference job has finished.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Binds host:port and serves until the process is stopped.
void serve(const std::string& host, int port, ServiceOptions options);

}  // namespace regrow
