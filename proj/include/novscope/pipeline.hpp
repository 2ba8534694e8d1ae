#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "novscope/citemetrics.hpp"
#include "novscope/corpus.hpp"
#include "novscope/embedding.hpp"
#include "novscope/hypergraph.hpp"
#include "novscope/regression.hpp"
#include "novscope/scoring.hpp"
#include "novscope/synth.hpp"

namespace novscope {

enum class Stage : std::uint8_t { synth, ingest, build, fit, score, metrics, regress, report };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

struct RunConfig {
    // [paths]; relative paths resolve against the config file's directory.
    std::filesystem::path data_dir = "data";
    std::optional<std::filesystem::path> papers, authors, citations, names;
    std::filesystem::path cache_dir = ".novscope-cache";
    std::filesystem::path output_dir = "out";

    // [run]
    std::uint64_t seed = 1;
    std::vector<Channel> channels{Channel::content, Channel::context};
    int threads = 1;

    IngestConfig ingest;  // [ingest]

    // [build]
    SnapshotConfig snapshot;
    int negative_ratio = 5;
    std::optional<int> first_year, last_year;

    // [fit]
    FitConfig fit;
    bool warm_start = true;

    ScoreConfig score;      // [score] horizon
    MetricsConfig metrics;  // [metrics]

    // [regress]
    std::vector<std::filesystem::path> model_files;
    bool default_models = true;

    SynthConfig synth;  // [synth]

    IngestPaths input_paths() const;
};

// Parses the key-value config (INI sections above). Unknown sections or keys
// are rejected so that typos do not silently fall back to defaults.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);
// INI rendering of a config; with default arguments, documents every default.
std::string format_run_config(const RunConfig& cfg = {});

// Applies NOVSCOPE_CACHE_DIR when set.
void apply_environment(RunConfig& cfg);

// Canonical text of the settings a stage depends on directly.
std::string stage_settings(const RunConfig& cfg, Stage stage);

// One row per corpus paper joining covariates, scores (suffix _con / _ref)
// and citation metrics. Missing numeric values are NaN.
Table build_analysis_table(const Corpus& corpus, const CitationGraph& graph,
                           const std::vector<ScoreRow>& scores, const std::vector<MetricsRow>& metrics);

// Built-in specs in the shape of the solo-author gap and reward-interaction models.
std::vector<ModelSpec> default_model_specs(const std::vector<Channel>& channels);

// Snapshot construction, negative sampling and the per-year fit chain for one
// channel, in memory.
std::vector<std::shared_ptr<const EmbeddingModel>> fit_channel(const Corpus& corpus, Channel channel,
                                                               const RunConfig& cfg);

struct StageResult {
    Stage stage = Stage::ingest;
    std::string config_hash;
    std::vector<std::filesystem::path> outputs;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
};

// File-backed stage runner. Each stage checks its predecessors' stamps: a
// missing stamp is a ValidationError naming the stage to run, and a stamp whose
// hash differs from the one implied by the current config is a StaleCacheError
// unless `force` is set. Every run appends a line to output_dir/manifest.jsonl.
class Pipeline {
public:
    explicit Pipeline(RunConfig cfg, bool force = false);

    const RunConfig& config() const { return cfg_; }
    StageResult run(Stage stage);

    // Expected hash of a stage given the current config and the recorded input hashes.
    std::string expected_hash(Stage stage) const;

private:
    StageResult run_synth();
    StageResult run_ingest();
    StageResult run_build();
    StageResult run_fit();
    StageResult run_score();
    StageResult run_metrics();
    StageResult run_regress(bool full_report);

    void require(Stage stage) const;
    Corpus load_corpus() const;
    void finish(StageResult& result, const std::vector<std::string>& inputs);

    std::filesystem::path stamp_path(Stage stage) const;

    RunConfig cfg_;
    bool force_;
};

}  // namespace novscope
