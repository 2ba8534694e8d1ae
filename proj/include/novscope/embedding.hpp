#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "novscope/hypergraph.hpp"

namespace novscope {

enum class Optimizer : std::uint8_t {
    gradient,    // full-batch gradient ascent, backtracking line search
    lbfgs,       // full-batch limited-memory quasi-Newton, backtracking line search
    stochastic,  // minibatch Adam; not monotone
};

std::string_view to_string(Optimizer o);
Optimizer optimizer_from_string(std::string_view s);

struct FitConfig {
    int dim = 25;
    int max_epochs = 500;
    double tolerance = 1e-6;
    Optimizer optimizer = Optimizer::gradient;
    std::uint64_t seed = 0;
    double init_logit_sd = 0.1;
    int lbfgs_memory = 10;
    // stochastic mode only
    int batch_size = 512;
    double learning_rate = 0.05;
    // >1 splits gradient accumulation across threads; the reduction order is fixed
    int threads = 1;
};

struct FitDiagnostics {
    double log_likelihood = 0.0;
    int epochs = 0;
    double last_relative_change = 0.0;
    bool converged = false;
    // Objective after initialization (index 0) and after every epoch.
    std::vector<double> trace;
};

// Mixed-membership node embedding for one year and channel. Stores the free
// parameters (softmax logits and log-salience) and caches theta and log theta.
class EmbeddingModel {
public:
    EmbeddingModel(int year, Channel channel, std::shared_ptr<const NodeVocab> vocab, int dim,
                   std::vector<double> logits, std::vector<double> log_r,
                   FitDiagnostics diag = {});

    int year() const { return year_; }
    Channel channel() const { return channel_; }
    int dim() const { return dim_; }
    int num_nodes() const { return vocab_->size(); }
    const NodeVocab& vocab() const { return *vocab_; }
    std::shared_ptr<const NodeVocab> vocab_ptr() const { return vocab_; }

    std::span<const double> theta(int node) const;
    std::span<const double> log_theta(int node) const;
    double r(int node) const { return std::exp(log_r_.at(static_cast<std::size_t>(node))); }

    const std::vector<double>& logits() const { return logits_; }
    const std::vector<double>& log_r() const { return log_r_; }
    const FitDiagnostics& diagnostics() const { return diag_; }

    // Throws ValidationError on empty sets or out-of-vocabulary indices.
    double log_coherence(std::span<const int> nodes) const;
    double log_propensity(std::span<const int> nodes) const;

private:
    int year_;
    Channel channel_;
    std::shared_ptr<const NodeVocab> vocab_;
    int dim_;
    std::vector<double> logits_;
    std::vector<double> log_r_;
    std::vector<double> theta_;
    std::vector<double> log_theta_;
    FitDiagnostics diag_;
};

// sum_d prod_{i in nodes} theta_id, evaluated in log space over sorted nodes.
double coherence(const EmbeddingModel& model, std::span<const int> nodes);
// coherence times prod_i r_i.
double propensity(const EmbeddingModel& model, std::span<const int> nodes);

// Poisson log-likelihood over observed combinations (count * log lambda - lambda,
// log count! omitted) minus the sum of lambda over negative samples. Parameters
// are laid out as num_nodes*dim logits (row-major) followed by num_nodes log r.
class PoissonObjective {
public:
    PoissonObjective(const HypergraphSnapshot& snapshot, const NegativeSampleSet& negatives,
                     int dim, int threads = 1);

    int num_nodes() const { return num_nodes_; }
    int dim() const { return dim_; }
    std::size_t num_params() const {
        return static_cast<std::size_t>(num_nodes_) * static_cast<std::size_t>(dim_ + 1);
    }

    double value(std::span<const double> params) const;
    double value_and_gradient(std::span<const double> params, std::span<double> grad) const;

private:
    struct Term {
        std::uint32_t offset;  // into nodes_
        std::uint32_t size;
        double count;  // 0 for negatives
    };
    double accumulate(std::span<const double> params, std::span<double> grad, bool want_grad) const;
    double accumulate_range(std::size_t begin, std::size_t end, std::span<const double> log_theta,
                            std::span<const double> theta, std::span<const double> log_r,
                            std::span<double> grad_theta_space, std::span<double> grad_log_r,
                            bool want_grad) const;

    int num_nodes_;
    int dim_;
    int threads_;
    std::vector<int> nodes_;
    std::vector<Term> terms_;
};

double log_likelihood(const EmbeddingModel& model, const HypergraphSnapshot& snapshot,
                      const NegativeSampleSet& negatives);

// Maximum-likelihood fit. Deterministic for a fixed seed. Throws NumericalError
// naming the epoch if the objective becomes non-finite, ValidationError on an
// empty snapshot or a warm start with a different vocabulary or dimension.
EmbeddingModel fit(const HypergraphSnapshot& snapshot, const NegativeSampleSet& negatives,
                   const FitConfig& cfg, const EmbeddingModel* warm_start = nullptr);

// Initial parameters: logits ~ N(0, init_logit_sd^2); log r from each node's
// mean multiplicity over the combinations it appears in.
std::vector<double> initial_parameters(const HypergraphSnapshot& snapshot, const FitConfig& cfg);

// Binary checkpoint: header (magic, version, year, channel, dim, node count,
// vocab hash), vocabulary ids, then little-endian float64 logits and log r.
void save_checkpoint(const std::filesystem::path& path, const EmbeddingModel& model);
EmbeddingModel load_checkpoint(const std::filesystem::path& path);

// One node per line: id, r, then dim theta values, tab-separated.
std::string export_text(const EmbeddingModel& model);

}  // namespace novscope
