#include "kgmem/config.hpp"
#include "kgmem/decay.hpp"
#include "kgmem/error.hpp"
#include "kgmem/eval.hpp"
#include "kgmem/json_io.hpp"
#include "kgmem/memory_engine.hpp"
#include "kgmem/tokens.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace kgmem;

namespace {

// nlohmann -> Python through the json module; results are small.
py::object to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

std::optional<Timestamp> parse_optional(const std::optional<std::string>& text) {
    if (!text) return std::nullopt;
    return parse_timestamp(*text);
}

Config make_config(const std::optional<std::string>& config_json, const std::string& store_path,
                   const std::string& index_path) {
    Config c = config_json ? Config::from_json_text(*config_json) : Config{};
    if (!config_json) {
        c.store.path = store_path;
        c.index.path = index_path;
    }
    return c;
}

ChatPurpose purpose_from(const std::string& name) {
    if (name == "generic") return ChatPurpose::Generic;
    if (name == "extract") return ChatPurpose::ExtractTriplets;
    if (name == "summarize") return ChatPurpose::Summarize;
    if (name == "answer") return ChatPurpose::Answer;
    if (name == "judge") return ChatPurpose::Judge;
    throw ValidationError("unknown purpose '" + name + "'");
}

namespace errors {
PyObject* base = nullptr;
PyObject* validation = nullptr;
PyObject* not_found = nullptr;
PyObject* provider = nullptr;
PyObject* storage = nullptr;
PyObject* corruption = nullptr;
PyObject* config = nullptr;
}  // namespace errors

PyObject* make_error(py::module_& m, const char* name, PyObject* base) {
    const std::string qualified = std::string("kgmem.") + name;
    PyObject* type = PyErr_NewException(qualified.c_str(), base, nullptr);
    if (!type) throw py::error_already_set();
    m.add_object(name, py::reinterpret_borrow<py::object>(type));
    return type;
}

class PyEngine {
public:
    PyEngine(const std::optional<std::string>& config_json, const std::string& store_path,
             const std::string& index_path)
        : engine_(make_config(config_json, store_path, index_path)) {}

    py::object retrieve_context(const std::string& user, const std::string& session, const std::string& text,
                                const std::optional<std::string>& timestamp) {
        const TurnRequest req{user, session, text, parse_optional(timestamp)};
        MemoryContext ctx;
        {
            py::gil_scoped_release release;
            ctx = engine_.retrieve_context(req);
        }
        return to_py(to_json(ctx));
    }

    py::object record_turn(const std::string& user, const std::string& session, const std::string& text,
                           const std::string& assistant_text, const std::optional<std::string>& timestamp) {
        const TurnRequest req{user, session, text, parse_optional(timestamp)};
        TurnReceipt receipt;
        {
            py::gil_scoped_release release;
            receipt = engine_.record_turn(req, assistant_text);
        }
        return to_py(to_json(receipt));
    }

    py::object summary(const std::string& session) {
        const auto s = engine_.store().get_summary(session);
        return s ? to_py(to_json(*s)) : py::none();
    }

    py::object persona(const std::string& user) { return to_py(to_json(engine_.graph().get_persona(user))); }

    py::object messages(const std::string& session) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& m : engine_.store().get_session_messages(session)) out.push_back(to_json(m));
        return to_py(out);
    }

private:
    MemoryEngine engine_;
};

}  // namespace

PYBIND11_MODULE(_kgmem, m) {
    m.doc() = "Persistent conversational memory: knowledge triplets, rolling summaries, recency-weighted recall.";

    // Type objects live for the whole process; the module holds the references.
    errors::base = make_error(m, "KgmemError", PyExc_RuntimeError);
    errors::validation = make_error(m, "ValidationError", errors::base);
    errors::not_found = make_error(m, "NotFoundError", errors::base);
    errors::provider = make_error(m, "ProviderError", errors::base);
    errors::storage = make_error(m, "StorageError", errors::base);
    errors::corruption = make_error(m, "CorruptionError", errors::storage);
    errors::config = make_error(m, "ConfigError", errors::base);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            PyErr_SetString(errors::validation, e.what());
        } catch (const NotFoundError& e) {
            PyErr_SetString(errors::not_found, e.what());
        } catch (const ProviderError& e) {
            PyErr_SetString(errors::provider, e.what());
        } catch (const CorruptionError& e) {
            PyErr_SetString(errors::corruption, e.what());
        } catch (const StorageError& e) {
            PyErr_SetString(errors::storage, e.what());
        } catch (const ConfigError& e) {
            PyErr_SetString(errors::config, e.what());
        } catch (const Error& e) {
            PyErr_SetString(errors::base, e.what());
        }
    });

    m.def("count_tokens", [](const std::string& text) { return count_tokens(text); });

    m.def("normalize_ages", [](const std::vector<double>& ages) { return decay::normalize_ages(ages); },
          py::arg("ages_minutes"));
    m.def(
        "decay_weights",
        [](const std::vector<double>& ages, double rate) {
            return rate == 0.0 ? decay::uniform(ages).weights : decay::weigh_ages(ages, rate).weights;
        },
        py::arg("ages_minutes"), py::arg("decay_rate") = 0.02,
        "Recency weights summing to 1; decay_rate 0 gives uniform weights.");

    py::class_<MockProvider>(m, "MockProvider")
        .def(py::init<std::size_t, std::uint64_t>(), py::arg("dim") = 256, py::arg("seed") = 0)
        .def(
            "chat",
            [](MockProvider& p, const std::string& user_text, const std::string& system_text,
               const std::string& purpose) {
                ChatExchange ex;
                ex.system_text = system_text;
                ex.user_text = user_text;
                ex.purpose = purpose_from(purpose);
                ex.slots = {{"message", user_text}};
                const auto r = p.chat_complete(ex);
                py::dict out;
                out["text"] = r.text;
                out["prompt_tokens"] = r.usage.prompt_tokens;
                out["completion_tokens"] = r.usage.completion_tokens;
                out["total_tokens"] = r.usage.total_tokens;
                return out;
            },
            py::arg("user_text"), py::arg("system_text") = "", py::arg("purpose") = "generic")
        .def("embed", [](MockProvider& p, const std::string& text) { return p.embed(text).values; })
        .def_property_readonly("dimension", &MockProvider::embedding_dimension);

    py::class_<PyEngine>(m, "Engine")
        .def(py::init<const std::optional<std::string>&, const std::string&, const std::string&>(),
             py::arg("config_json") = py::none(), py::arg("store_path") = ":memory:", py::arg("index_path") = "")
        .def("retrieve_context", &PyEngine::retrieve_context, py::arg("user_name"), py::arg("session_id"),
             py::arg("user_text"), py::arg("timestamp") = py::none())
        .def("record_turn", &PyEngine::record_turn, py::arg("user_name"), py::arg("session_id"),
             py::arg("user_text"), py::arg("assistant_text"), py::arg("timestamp") = py::none())
        .def("summary", &PyEngine::summary, py::arg("session_id"))
        .def("persona", &PyEngine::persona, py::arg("user_name"))
        .def("messages", &PyEngine::messages, py::arg("session_id"));

    m.def(
        "replay",
        [](const std::string& dataset_path, const std::string& mode, std::optional<double> decay_rate,
           std::optional<std::string> category, bool include_timing) {
            Config cfg;
            cfg.store.path = ":memory:";
            cfg.index.path.clear();
            if (decay_rate) cfg.retrieval.decay_rate = *decay_rate;
            eval::Options opts;
            opts.mode = eval::mode_from_string(mode);
            opts.category = std::move(category);
            eval::Report report;
            {
                py::gil_scoped_release release;
                report = eval::replay(eval::load_longmemeval(dataset_path), cfg, opts);
            }
            return to_py(report.to_json(include_timing));
        },
        py::arg("dataset_path"), py::arg("mode") = "memoria", py::arg("decay_rate") = py::none(),
        py::arg("category") = py::none(), py::arg("include_timing") = false);
}
