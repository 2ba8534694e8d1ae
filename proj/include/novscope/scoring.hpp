#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "novscope/corpus.hpp"
#include "novscope/embedding.hpp"
#include "novscope/hypergraph.hpp"

namespace novscope {

struct ScoreConfig {
    int horizon = 2;
    // Must match the node extraction used when building snapshots.
    SnapshotConfig nodes;
};

struct ScoreRow {
    std::string paper_id;
    Channel channel = Channel::content;
    std::optional<double> raw_surprise_t0;
    std::optional<double> raw_surprise_t2;
    std::optional<double> raw_prescience;
    std::optional<double> pct_surprise;
    std::optional<double> pct_prescience;
};

// Negative log-coherence; nullopt for fewer than two nodes.
std::optional<double> surprise(const EmbeddingModel& model, std::span<const int> nodes);
std::optional<double> surprise(const EmbeddingModel& model, const PaperRecord& paper,
                               const SnapshotConfig& nodes = {});

// surprise(t0) - surprise(t0 + horizon). Throws ValidationError if the model years
// are not `horizon` apart.
std::optional<double> prescience(const EmbeddingModel& model_t0, const EmbeddingModel& model_t2,
                                 const PaperRecord& paper, int horizon = 2,
                                 const SnapshotConfig& nodes = {});

// (average rank - 1) / (n - 1); nullopt when n < 2.
std::optional<std::vector<double>> percentile_rank(std::span<const double> values);

// Average-rank percentile of `value` inside an ascending distribution containing it.
double rank_in_sorted(double value, std::span<const double> sorted);

using FieldDistributions = std::map<std::string, std::vector<double>>;

// Maximum over the paper's level-one fields of its percentile within each field's
// distribution; fields with fewer than two values are skipped.
std::optional<double> field_max_rank(const PaperRecord& paper, double raw,
                                     const FieldDistributions& distributions);

class ModelSet {
public:
    void add(std::shared_ptr<const EmbeddingModel> model);
    const EmbeddingModel* find(Channel channel, int year) const;
    std::vector<int> years(Channel channel) const;
    bool has_channel(Channel channel) const;

private:
    std::map<std::pair<Channel, int>, std::shared_ptr<const EmbeddingModel>> models_;
};

// One row per (paper, channel) in corpus order. Field distributions are built
// from all corpus papers before ranking. Throws ValidationError listing the
// years that lack a publication-year model.
std::vector<ScoreRow> score_corpus(const Corpus& corpus, const ModelSet& models,
                                   const std::vector<Channel>& channels, const ScoreConfig& cfg = {});

std::string format_scores_csv(const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> parse_scores_csv(const std::string& text);

}  // namespace novscope
