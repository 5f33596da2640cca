#pragma once

#include "kgmem/memory_engine.hpp"

#include <memory>
#include <string>

namespace kgmem {

// JSON-over-HTTP front end for a MemoryEngine.
//
//   POST /v1/context                 TurnRequest -> MemoryContext
//   POST /v1/turns                   TurnRequest + assistant_text -> TurnReceipt
//   GET  /v1/sessions/{id}/summary   SummaryRecord, 404 when absent
//   GET  /v1/users/{name}/persona    PersonaGraph (empty for unknown users)
//   GET  /healthz
//
// Errors: 400 validation, 404 unknown id, 500 storage, 502 provider.
class Service {
public:
    explicit Service(MemoryEngine& engine);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Port 0 picks a free port. Returns the bound port; throws Error on failure.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void run();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Maps a library exception to its HTTP status.
int http_status_for(const std::exception& e);

}  // namespace kgmem
