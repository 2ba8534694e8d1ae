#include <algorithm>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "novscope/citemetrics.hpp"
#include "novscope/error.hpp"
#include "novscope/pipeline.hpp"
#include "novscope/scoring.hpp"

namespace py = pybind11;
using namespace novscope;

namespace {

EmbeddingModel model_from_logits(const std::vector<std::vector<double>>& logits, const std::vector<double>& log_r) {
    if (logits.empty() || logits.front().empty()) throw ValidationError("logits must be a non-empty matrix");
    std::size_t dim = logits.front().size();
    // Index 0 of a vocabulary is the rare-node bucket; user node i is model node i + 1.
    std::vector<std::string> ids;
    std::vector<double> flat(dim, 0.0);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (logits[i].size() != dim) throw ValidationError("logits rows differ in length");
        ids.push_back("n" + std::to_string(i));
        flat.insert(flat.end(), logits[i].begin(), logits[i].end());
    }
    if (!log_r.empty() && log_r.size() != logits.size())
        throw ValidationError("log_r length differs from the number of nodes");
    std::vector<double> r(logits.size() + 1, 0.0);
    std::copy(log_r.begin(), log_r.end(), r.begin() + 1);
    return EmbeddingModel(0, Channel::content, std::make_shared<const NodeVocab>(ids), static_cast<int>(dim),
                          std::move(flat), std::move(r));
}

std::vector<int> shifted(std::vector<int> nodes) {
    for (int& n : nodes) ++n;
    return nodes;
}

CitationGraph graph_of(const std::vector<std::pair<std::string, std::string>>& edges,
                       const std::unordered_map<std::string, int>& years) {
    std::vector<CitationEdge> e;
    for (const auto& [citing, cited] : edges) {
        auto it = years.find(citing);
        if (it == years.end()) throw ValidationError("no year for citing paper " + citing);
        e.push_back({citing, cited, it->second});
    }
    return CitationGraph(e, years);
}

}  // namespace

PYBIND11_MODULE(_novscope, m) {
    m.doc() = "Surprise, prescience and citation metrics";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<StaleCacheError>(m, "StaleCacheError", PyExc_RuntimeError);

    m.def(
        "surprise",
        [](const std::vector<std::vector<double>>& logits, const std::vector<int>& nodes) {
            return surprise(model_from_logits(logits, {}), shifted(nodes));
        },
        py::arg("logits"), py::arg("nodes"), "Surprise of a node set under softmax(logits); None below two nodes.");
    m.def(
        "log_propensity",
        [](const std::vector<std::vector<double>>& logits, const std::vector<double>& log_r, const std::vector<int>& nodes) {
            return model_from_logits(logits, log_r).log_propensity(shifted(nodes));
        },
        py::arg("logits"), py::arg("log_r"), py::arg("nodes"));
    m.def(
        "percentile_rank", [](const std::vector<double>& v) { return percentile_rank(v); }, py::arg("values"));
    m.def(
        "disruption",
        [](const std::vector<std::pair<std::string, std::string>>& edges, const std::unordered_map<std::string, int>& years,
           const std::string& focal, int window) { return disruption(graph_of(edges, years), focal, window); },
        py::arg("edges"), py::arg("years"), py::arg("focal"), py::arg("window") = 5);
    m.def(
        "two_step_credit",
        [](const std::vector<std::pair<std::string, std::string>>& edges, const std::unordered_map<std::string, int>& years,
           const std::string& focal, int min_two_step) {
            return two_step_credit(graph_of(edges, years), focal, min_two_step);
        },
        py::arg("edges"), py::arg("years"), py::arg("focal"), py::arg("min_two_step") = 5);
    m.def("default_config", [] { return format_run_config(); });
    m.def(
        "run_stage",
        [](const std::filesystem::path& config, const std::string& stage, bool force) {
            auto cfg = load_run_config(config);
            apply_environment(cfg);
            Pipeline p(std::move(cfg), force);
            auto r = p.run(stage_from_string(stage));
            std::vector<std::string> outputs;
            for (const auto& o : r.outputs) outputs.push_back(o.string());
            py::dict d;
            d["config_hash"] = r.config_hash;
            d["outputs"] = outputs;
            d["warnings"] = r.warnings;
            return d;
        },
        py::arg("config"), py::arg("stage"), py::arg("force") = false);
}
