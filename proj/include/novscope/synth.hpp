#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "novscope/corpus.hpp"
#include "novscope/hypergraph.hpp"

namespace novscope {

// Small deterministic generator with portable draws (no std distributions).
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed);
    std::uint64_t next();
    double uniform();  // [0, 1)
    double normal();
    int poisson(double mean);
    std::size_t below(std::size_t n);
    // Index drawn proportional to nonnegative weights.
    std::size_t weighted(const std::vector<double>& weights);

private:
    std::uint64_t state_[4];
};

struct RewardEffects {
    double alpha = 2.0;
    double beta_female = 0.0;
    double lambda = 0.5;  // slope on the context surprise percentile
    double tau = 0.04;    // female x context surprise percentile
    double noise_sd = 0.25;
};

struct CitationEffects {
    double mean_references = 4.0;
    double lambda = 1.0;  // log-attractiveness slope on the context surprise percentile
    double tau = 0.0;
};

struct SynthConfig {
    int n_papers = 2000;
    int n_authors = 800;
    int n_concepts = 200;
    int n_journals = 60;
    int n_institutions = 40;
    int year_first = 2015;
    int year_last = 2020;
    int D_true = 4;
    double female_share = 0.3;
    double unresolved_share = 0.05;  // authors with ambiguous or initial-only names
    double multi_author_share = 0.1;
    double cross_proposal_share = 0.1;
    int min_set_size = 2;
    int max_set_size = 7;
    double beta_female_ctx_surprise = 0.03;
    double beta_female_con_surprise = 0.0;
    RewardEffects jif;
    CitationEffects citations;
    std::uint64_t seed = 1;

    // Throws ValidationError for infeasible settings.
    void validate() const;
};

struct PlantedEmbedding {
    std::vector<std::string> ids;
    int dim = 0;
    std::vector<double> theta;  // ids.size() x dim, rows on the simplex
    std::vector<double> r;
};

struct SynthCorpus {
    std::vector<PaperRecord> papers;
    std::vector<AuthorRecord> authors;
    std::vector<CitationEdge> citations;
    std::vector<NameEvidence> names;
    PlantedEmbedding content_truth;
    PlantedEmbedding context_truth;
    // Planted-model percentile of each paper's true surprise within its field.
    std::vector<double> true_pct_context;
    std::vector<double> true_pct_content;
    std::string truth_json;
};

SynthCorpus generate(const SynthConfig& cfg);

// Writes papers.jsonl, authors.jsonl, citations.jsonl, names.tsv and truth.json.
void write_synth_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

Corpus to_corpus(const SynthCorpus& synth, const IngestConfig& cfg = {});

// Log coherence of a node set under planted theta.
double planted_log_coherence(const PlantedEmbedding& truth, const std::vector<int>& nodes);

// Snapshot whose combination counts are Poisson(scale * lambda_h) under a planted
// embedding, over a candidate universe of node sets. Used to check that the fit
// recovers known structure.
struct PlantedSnapshotConfig {
    int n_nodes = 200;
    int dim = 4;
    int n_hyperedges = 5000;
    int n_candidates = 20000;
    int min_size = 2;
    int max_size = 4;
    double home_logit = 4.0;
    double salience_sd = 0.4;
    int year = 2000;
    std::uint64_t seed = 1;
};

struct PlantedSnapshot {
    PlantedEmbedding truth;
    std::vector<NodeSet> candidates;
    std::vector<double> expected;  // Poisson mean per candidate
    std::vector<int> counts;
    std::shared_ptr<const NodeVocab> vocab;
    int year = 0;
};

PlantedSnapshot planted_snapshot(const PlantedSnapshotConfig& cfg);

// Snapshot from the candidates with positive counts among `which` (indices into candidates).
HypergraphSnapshot snapshot_from_counts(const PlantedSnapshot& planted, const std::vector<std::size_t>& which);

}  // namespace novscope
