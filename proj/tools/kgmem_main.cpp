#include "kgmem/config.hpp"
#include "kgmem/error.hpp"
#include "kgmem/eval.hpp"
#include "kgmem/json_io.hpp"
#include "kgmem/memory_engine.hpp"
#include "kgmem/service.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

kgmem::Service* g_service = nullptr;

void handle_signal(int) {
    if (g_service) g_service->stop();
}

struct CommonFlags {
    std::string config_path;
    std::optional<int> k;
    std::optional<double> decay_rate;
    std::optional<std::string> provider;
};

kgmem::Config resolve_config(const CommonFlags& flags) {
    kgmem::Config cfg = flags.config_path.empty() ? kgmem::Config{} : kgmem::Config::load(flags.config_path);
    if (flags.k) cfg.retrieval.k = *flags.k;
    if (flags.decay_rate) cfg.retrieval.decay_rate = *flags.decay_rate;
    if (flags.provider) cfg.provider.kind = *flags.provider;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--k", flags.k, "Top-K triplets retrieved per query")->check(CLI::PositiveNumber);
    cmd->add_option("--decay-rate", flags.decay_rate, "Recency decay rate; 0 gives uniform weights")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--provider", flags.provider, "Provider implementation")
        ->check(CLI::IsMember({"http", "mock"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kgmem: persistent session summaries and a recency-weighted user knowledge graph"};
    app.require_subcommand(1);
    CommonFlags flags;

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    add_common(serve, flags);
    std::optional<int> port;
    std::optional<std::string> host;
    serve->add_option("--port", port, "Listen port (overrides service.port)");
    serve->add_option("--host", host, "Listen address (overrides service.host)");

    auto* replay = app.add_subcommand("replay", "Replay a LongMemEval-format dataset and report accuracy");
    add_common(replay, flags);
    std::string dataset_path;
    std::string mode = "memoria";
    std::optional<std::string> category;
    std::string report_path;
    bool no_timing = false;
    bool with_ablation = false;
    replay->add_option("dataset", dataset_path, "Dataset JSON file")->required()->check(CLI::ExistingFile);
    replay->add_option("--mode", mode, "memoria or full-context")
        ->check(CLI::IsMember({"memoria", "full-context"}));
    replay->add_option("--category", category, "Only replay this question type");
    replay->add_option("--report", report_path, "Write the JSON report here");
    replay->add_flag("--no-timing", no_timing, "Leave latency figures out of the JSON report");
    replay->add_flag("--with-ablation", with_ablation, "Also run with uniform weights and report the delta");

    auto* inspect = app.add_subcommand("inspect-user", "Print a user's persona graph and stored triplets");
    add_common(inspect, flags);
    std::string user_name;
    inspect->add_option("name", user_name, "User name")->required();

    auto* show = app.add_subcommand("show-summary", "Print the stored summary of a session");
    add_common(show, flags);
    std::string session_id;
    show->add_option("session", session_id, "Session id")->required();

    auto* init = app.add_subcommand("init-store", "Create (or verify) the store and index files");
    add_common(init, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        const kgmem::Config cfg = resolve_config(flags);

        if (*serve) {
            kgmem::MemoryEngine engine(cfg);
            kgmem::Service service(engine);
            const int bound = service.bind(host.value_or(cfg.service.host), port.value_or(cfg.service.port));
            g_service = &service;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            std::cerr << "kgmem listening on " << host.value_or(cfg.service.host) << ":" << bound << std::endl;
            service.run();
            g_service = nullptr;
            return 0;
        }

        if (*replay) {
            const auto dataset = kgmem::eval::load_longmemeval(dataset_path);
            kgmem::eval::Options opts;
            opts.mode = kgmem::eval::mode_from_string(mode);
            opts.category = category;
            opts.llm_judge = cfg.provider.kind == "http";
            const auto report = kgmem::eval::replay(dataset, cfg, opts);
            std::cout << report.table();
            nlohmann::json out = report.to_json(!no_timing);
            if (with_ablation) {
                kgmem::Config ablated = cfg;
                ablated.retrieval.decay_rate = 0.0;
                const auto baseline = kgmem::eval::replay(dataset, ablated, opts);
                std::cout << "\nuniform-weight ablation (decay rate 0):\n" << baseline.table();
                const auto delta = kgmem::eval::ablation_delta(report, baseline);
                std::cout << "accuracy delta (decay - uniform): " << delta.dump() << "\n";
                out["ablation"] = {{"report", baseline.to_json(!no_timing)}, {"delta", delta}};
            }
            if (!report_path.empty()) {
                std::ofstream f(report_path);
                if (!f) throw kgmem::Error("cannot write report " + report_path);
                f << out.dump(2) << "\n";
            }
            return 0;
        }

        kgmem::MemoryEngine engine(cfg);
        if (*inspect) {
            nlohmann::json triplets = nlohmann::json::array();
            for (const auto& t : engine.graph().triplets_for_user(user_name)) triplets.push_back(kgmem::to_json(t));
            nlohmann::json out = {{"persona", kgmem::to_json(engine.graph().get_persona(user_name))},
                                  {"triplets", triplets},
                                  {"has_history", engine.store().has_user_history(user_name)}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }
        if (*show) {
            const auto summary = engine.store().get_summary(session_id);
            if (!summary) {
                std::cerr << "no summary for session " << session_id << "\n";
                return 1;
            }
            std::cout << kgmem::to_json(*summary).dump(2) << "\n";
            return 0;
        }
        if (*init) {
            std::cout << "store " << cfg.store.path << " ready (" << engine.store().message_count()
                      << " messages), index " << (cfg.index.path.empty() ? "<memory>" : cfg.index.path) << " ("
                      << engine.graph().index().size() << " entries)\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
