#include "kgmem/service.hpp"

#include "kgmem/error.hpp"
#include "kgmem/json_io.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <iostream>

namespace kgmem {

using nlohmann::json;

int http_status_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const json::exception*>(&e)) return 400;
    if (dynamic_cast<const NotFoundError*>(&e)) return 404;
    if (dynamic_cast<const ProviderError*>(&e)) return 502;
    return 500;
}

namespace {

const char* error_kind(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const json::exception*>(&e)) return "validation";
    if (dynamic_cast<const NotFoundError*>(&e)) return "not_found";
    if (dynamic_cast<const ProviderError*>(&e)) return "provider";
    if (dynamic_cast<const CorruptionError*>(&e)) return "corruption";
    if (dynamic_cast<const StorageError*>(&e)) return "storage";
    return "internal";
}

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const std::exception& e) {
            reply(res, http_status_for(e), {{"error", {{"kind", error_kind(e)}, {"message", e.what()}}}});
        }
    };
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("request body is not JSON: ") + e.what());
    }
}

}  // namespace

struct Service::Impl {
    explicit Impl(MemoryEngine& e) : engine(e) {}

    MemoryEngine& engine;
    httplib::Server server;
};

Service::Service(MemoryEngine& engine) : impl_(std::make_unique<Impl>(engine)) {
    auto& srv = impl_->server;
    MemoryEngine& eng = engine;

    srv.Get("/healthz", guarded([&eng](const httplib::Request&, httplib::Response& res) {
                json store = {{"path", eng.config().store.path}, {"messages", eng.store().message_count()}};
                json provider = {{"kind", eng.provider().name()},
                                 {"embedding_dimension", eng.provider().embedding_dimension()}};
                reply(res, 200,
                      {{"status", "ok"},
                       {"store", store},
                       {"index", {{"entries", eng.graph().index().size()}}},
                       {"provider", provider}});
            }));

    srv.Post("/v1/context", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
                 const auto request = turn_request_from_json(parse_body(req));
                 reply(res, 200, to_json(eng.retrieve_context(request)));
             }));

    srv.Post("/v1/turns", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
                 const auto body = parse_body(req);
                 const auto request = turn_request_from_json(body);
                 if (!body.contains("assistant_text") || !body["assistant_text"].is_string()) {
                     throw ValidationError("field 'assistant_text' must be a string");
                 }
                 const auto receipt = eng.record_turn(request, body["assistant_text"].get<std::string>(),
                                                      usage_from_json(body, "assistant_usage"));
                 reply(res, 200, to_json(receipt));
             }));

    srv.Get(R"(/v1/sessions/([^/]+)/summary)", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
                const std::string session = req.matches[1];
                const auto summary = eng.store().get_summary(session);
                if (!summary) throw NotFoundError("no summary for session " + session);
                reply(res, 200, to_json(*summary));
            }));

    srv.Get(R"(/v1/users/([^/]+)/persona)", guarded([&eng](const httplib::Request& req, httplib::Response& res) {
                reply(res, 200, to_json(eng.graph().get_persona(std::string(req.matches[1]))));
            }));
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

bool Service::running() const { return impl_->server.is_running(); }

}  // namespace kgmem
