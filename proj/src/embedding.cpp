#include "novscope/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "novscope/error.hpp"
#include "novscope/io.hpp"

namespace novscope {

namespace {

constexpr char kCheckpointMagic[8] = {'N', 'V', 'S', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;
// Floor applied to log-coherence; exp(-700) is well inside double range.
constexpr double kMinLogCoherence = -700.0;
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
// Largest change of any single parameter in one quasi-Newton step.
constexpr double kMaxMove = 1.0;

double log_sum_exp(std::span<const double> a) {
    double m = *std::max_element(a.begin(), a.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : a) s += std::exp(v - m);
    return m + std::log(s);
}

// Row-wise softmax of logits into theta and log theta.
void softmax_rows(std::span<const double> logits, int n, int dim, std::vector<double>& theta,
                  std::vector<double>& log_theta) {
    theta.resize(logits.size());
    log_theta.resize(logits.size());
    for (int i = 0; i < n; ++i) {
        auto off = static_cast<std::size_t>(i) * static_cast<std::size_t>(dim);
        auto row = logits.subspan(off, static_cast<std::size_t>(dim));
        double lse = log_sum_exp(row);
        for (int d = 0; d < dim; ++d) {
            double lt = row[static_cast<std::size_t>(d)] - lse;
            log_theta[off + static_cast<std::size_t>(d)] = lt;
            theta[off + static_cast<std::size_t>(d)] = std::exp(lt);
        }
    }
}

// log sum_d prod_{i} theta_id for already-validated node indices.
double log_coherence_of(std::span<const int> nodes, std::span<const double> log_theta, int dim,
                        std::span<double> scratch) {
    std::fill(scratch.begin(), scratch.end(), 0.0);
    for (int v : nodes) {
        const double* lt = log_theta.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(dim);
        for (int d = 0; d < dim; ++d) scratch[static_cast<std::size_t>(d)] += lt[d];
    }
    return std::max(log_sum_exp(scratch), kMinLogCoherence);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

std::string_view to_string(Optimizer o) {
    switch (o) {
        case Optimizer::gradient: return "gradient";
        case Optimizer::lbfgs: return "lbfgs";
        default: return "stochastic";
    }
}

Optimizer optimizer_from_string(std::string_view s) {
    if (s == "gradient") return Optimizer::gradient;
    if (s == "lbfgs") return Optimizer::lbfgs;
    if (s == "stochastic") return Optimizer::stochastic;
    throw ValidationError("unknown optimizer '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// EmbeddingModel

EmbeddingModel::EmbeddingModel(int year, Channel channel, std::shared_ptr<const NodeVocab> vocab,
                               int dim, std::vector<double> logits, std::vector<double> log_r,
                               FitDiagnostics diag)
    : year_(year),
      channel_(channel),
      vocab_(std::move(vocab)),
      dim_(dim),
      logits_(std::move(logits)),
      log_r_(std::move(log_r)),
      diag_(std::move(diag)) {
    if (!vocab_) throw ValidationError("embedding model needs a vocabulary");
    if (dim_ < 1) throw ValidationError("latent dimension must be >= 1");
    auto n = static_cast<std::size_t>(vocab_->size());
    if (logits_.size() != n * static_cast<std::size_t>(dim_) || log_r_.size() != n)
        throw ValidationError("embedding parameter sizes do not match vocabulary and dimension");
    softmax_rows(logits_, vocab_->size(), dim_, theta_, log_theta_);
}

std::span<const double> EmbeddingModel::theta(int node) const {
    if (node < 0 || node >= num_nodes()) throw ValidationError("node index out of range");
    return std::span<const double>(theta_).subspan(
        static_cast<std::size_t>(node) * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_));
}

std::span<const double> EmbeddingModel::log_theta(int node) const {
    if (node < 0 || node >= num_nodes()) throw ValidationError("node index out of range");
    return std::span<const double>(log_theta_).subspan(
        static_cast<std::size_t>(node) * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_));
}

double EmbeddingModel::log_coherence(std::span<const int> nodes) const {
    if (nodes.empty()) throw ValidationError("coherence of an empty node set");
    std::vector<int> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end());
    for (int v : sorted)
        if (v < 0 || v >= num_nodes())
            throw ValidationError("node index " + std::to_string(v) + " not in vocabulary");
    std::vector<double> scratch(static_cast<std::size_t>(dim_));
    return log_coherence_of(sorted, log_theta_, dim_, scratch);
}

double EmbeddingModel::log_propensity(std::span<const int> nodes) const {
    double lc = log_coherence(nodes);
    std::vector<int> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end());
    double s = 0.0;
    for (int v : sorted) s += log_r_[static_cast<std::size_t>(v)];
    return lc + s;
}

double coherence(const EmbeddingModel& model, std::span<const int> nodes) {
    return std::exp(model.log_coherence(nodes));
}

double propensity(const EmbeddingModel& model, std::span<const int> nodes) {
    return std::exp(model.log_propensity(nodes));
}

// ---------------------------------------------------------------------------
// Objective

PoissonObjective::PoissonObjective(const HypergraphSnapshot& snapshot,
                                   const NegativeSampleSet& negatives, int dim, int threads)
    : num_nodes_(snapshot.num_nodes()), dim_(dim), threads_(std::max(1, threads)) {
    if (dim_ < 1) throw ValidationError("latent dimension must be >= 1");
    auto add = [&](const NodeSet& s, double count) {
        if (s.empty()) throw ValidationError("empty combination in objective");
        for (int v : s)
            if (v < 0 || v >= num_nodes_)
                throw ValidationError("combination references node outside the vocabulary");
        terms_.push_back({static_cast<std::uint32_t>(nodes_.size()),
                          static_cast<std::uint32_t>(s.size()), count});
        nodes_.insert(nodes_.end(), s.begin(), s.end());
    };
    for (const auto& c : snapshot.edge_counts) add(c.nodes, c.count);
    for (const auto& s : negatives.samples) add(s, 0.0);
}

double PoissonObjective::accumulate_range(std::size_t begin, std::size_t end,
                                          std::span<const double> log_theta,
                                          std::span<const double> theta,
                                          std::span<const double> log_r,
                                          std::span<double> gacc, std::span<double> wacc,
                                          bool want_grad) const {
    (void)theta;
    const auto D = static_cast<std::size_t>(dim_);
    std::vector<double> a(D);
    double total = 0.0;
    for (std::size_t t = begin; t < end; ++t) {
        const auto& term = terms_[t];
        std::span<const int> nodes(nodes_.data() + term.offset, term.size);
        std::fill(a.begin(), a.end(), 0.0);
        double sum_log_r = 0.0;
        for (int v : nodes) {
            const double* lt = log_theta.data() + static_cast<std::size_t>(v) * D;
            for (std::size_t d = 0; d < D; ++d) a[d] += lt[d];
            sum_log_r += log_r[static_cast<std::size_t>(v)];
        }
        double raw_lc = log_sum_exp(a);
        double lc = std::max(raw_lc, kMinLogCoherence);
        double log_lambda = lc + sum_log_r;
        double lambda = std::exp(log_lambda);
        total += term.count * log_lambda - lambda;
        if (!want_grad) continue;
        double w = term.count - lambda;
        for (int v : nodes) wacc[static_cast<std::size_t>(v)] += w;
        // Inside the floor the coherence is constant and contributes no gradient.
        if (raw_lc < kMinLogCoherence) continue;
        for (std::size_t d = 0; d < D; ++d) a[d] = w * std::exp(a[d] - raw_lc);
        for (int v : nodes) {
            double* g = gacc.data() + static_cast<std::size_t>(v) * D;
            for (std::size_t d = 0; d < D; ++d) g[d] += a[d];
        }
    }
    return total;
}

double PoissonObjective::accumulate(std::span<const double> params, std::span<double> grad,
                                    bool want_grad) const {
    if (params.size() != num_params()) throw ValidationError("parameter vector has wrong size");
    const auto N = static_cast<std::size_t>(num_nodes_);
    const auto D = static_cast<std::size_t>(dim_);
    auto logits = params.subspan(0, N * D);
    auto log_r = params.subspan(N * D, N);
    std::vector<double> theta, log_theta;
    softmax_rows(logits, num_nodes_, dim_, theta, log_theta);

    const std::size_t n_terms = terms_.size();
    const std::size_t n_chunks =
        std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(threads_), n_terms / 1024));
    std::vector<std::vector<double>> gacc(n_chunks), wacc(n_chunks);
    std::vector<double> totals(n_chunks, 0.0);
    auto run_chunk = [&](std::size_t c) {
        if (want_grad) {
            gacc[c].assign(N * D, 0.0);
            wacc[c].assign(N, 0.0);
        }
        std::size_t b = n_terms * c / n_chunks, e = n_terms * (c + 1) / n_chunks;
        totals[c] = accumulate_range(b, e, log_theta, theta, log_r, gacc[c], wacc[c], want_grad);
    };
    if (n_chunks == 1) {
        run_chunk(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t c = 0; c < n_chunks; ++c) pool.emplace_back(run_chunk, c);
        for (auto& th : pool) th.join();
    }

    double total = 0.0;
    for (double t : totals) total += t;
    if (!want_grad) return total;

    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c) {
        for (std::size_t i = 0; i < N * D; ++i) grad[i] += gacc[c][i];
        for (std::size_t i = 0; i < N; ++i) grad[N * D + i] += wacc[c][i];
    }
    // Chain rule through the softmax: dL/dlogit_ie = G_ie - theta_ie * W_i.
    for (std::size_t i = 0; i < N; ++i) {
        double w = grad[N * D + i];
        for (std::size_t d = 0; d < D; ++d) grad[i * D + d] -= theta[i * D + d] * w;
    }
    return total;
}

double PoissonObjective::value(std::span<const double> params) const {
    return accumulate(params, {}, false);
}

double PoissonObjective::value_and_gradient(std::span<const double> params,
                                            std::span<double> grad) const {
    if (grad.size() != num_params()) throw ValidationError("gradient buffer has wrong size");
    return accumulate(params, grad, true);
}

double log_likelihood(const EmbeddingModel& model, const HypergraphSnapshot& snapshot,
                      const NegativeSampleSet& negatives) {
    if (!snapshot.vocab || snapshot.vocab->hash() != model.vocab().hash())
        throw ValidationError("model vocabulary does not match snapshot vocabulary");
    PoissonObjective obj(snapshot, negatives, model.dim());
    std::vector<double> params(model.logits());
    params.insert(params.end(), model.log_r().begin(), model.log_r().end());
    return obj.value(params);
}

// ---------------------------------------------------------------------------
// Fitting

std::vector<double> initial_parameters(const HypergraphSnapshot& snapshot, const FitConfig& cfg) {
    const auto N = static_cast<std::size_t>(snapshot.num_nodes());
    const auto D = static_cast<std::size_t>(cfg.dim);
    std::vector<double> params(N * (D + 1));
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, cfg.init_logit_sd);
    for (std::size_t i = 0; i < N * D; ++i) params[i] = normal(rng);

    std::vector<double> mult(N, 0.0), distinct(N, 0.0);
    for (const auto& c : snapshot.edge_counts)
        for (int v : c.nodes) {
            mult[static_cast<std::size_t>(v)] += c.count;
            distinct[static_cast<std::size_t>(v)] += 1.0;
        }
    for (std::size_t i = 0; i < N; ++i)
        params[N * D + i] = distinct[i] > 0 ? std::log(mult[i] / distinct[i]) : 0.0;
    return params;
}

namespace {

struct Ascent {
    const PoissonObjective& obj;
    const FitConfig& cfg;
    std::vector<double> x;
    std::vector<double> grad;
    double f = 0.0;
    FitDiagnostics diag;

    Ascent(const PoissonObjective& o, const FitConfig& c, std::vector<double> x0)
        : obj(o), cfg(c), x(std::move(x0)), grad(x.size()) {
        f = obj.value_and_gradient(x, grad);
        check(0);
        diag.trace.push_back(f);
    }

    void check(int epoch) const {
        if (!std::isfinite(f) || !std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); }))
            throw NumericalError("objective diverged (non-finite) at epoch " + std::to_string(epoch));
    }

    // Backtracking along direction `dir` (an ascent direction). Returns false if
    // no step of length >= step * 2^-kMaxBacktracks improves the objective.
    bool line_search(std::span<const double> dir, double& step, std::vector<double>& trial,
                     double& f_trial) const {
        double slope = dot(grad, dir);
        for (int k = 0; k < kMaxBacktracks; ++k) {
            for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + step * dir[i];
            f_trial = obj.value(trial);
            if (std::isfinite(f_trial) && f_trial >= f + kArmijo * step * slope && f_trial >= f)
                return true;
            step *= 0.5;
        }
        return false;
    }

    // Records an accepted epoch; returns true when the tolerance is reached.
    bool accept(int epoch, std::vector<double>& trial, double f_trial) {
        double rel = (f_trial - f) / std::max(1.0, std::abs(f));
        x.swap(trial);
        f = obj.value_and_gradient(x, grad);
        check(epoch);
        diag.trace.push_back(f);
        diag.epochs = epoch;
        diag.last_relative_change = rel;
        return rel < cfg.tolerance;
    }

    void run_gradient() {
        std::vector<double> trial(x.size());
        double gnorm = std::sqrt(dot(grad, grad));
        double step = 1.0 / std::max(1.0, gnorm);
        for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
            double f_trial = 0.0;
            if (!line_search(grad, step, trial, f_trial)) {
                diag.converged = true;
                return;
            }
            if (accept(epoch, trial, f_trial)) {
                diag.converged = true;
                return;
            }
            step *= 2.0;
        }
    }

    void run_lbfgs() {
        const auto n = x.size();
        std::deque<std::vector<double>> S, Y;
        std::deque<double> rho;
        std::vector<double> dir(n), trial(n), prev_x(n), prev_g(n);
        std::vector<double> alpha(static_cast<std::size_t>(cfg.lbfgs_memory));
        for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
            // Two-loop recursion on the minimization of -f (gradient -grad).
            for (std::size_t i = 0; i < n; ++i) dir[i] = grad[i];
            for (std::size_t k = S.size(); k-- > 0;) {
                alpha[k] = rho[k] * dot(S[k], dir);
                for (std::size_t i = 0; i < n; ++i) dir[i] += alpha[k] * Y[k][i];
            }
            double step = 1.0;
            if (!S.empty()) {
                const auto& s = S.back();
                const auto& y = Y.back();
                double gamma = dot(s, y) / dot(y, y);
                for (auto& v : dir) v *= gamma;
            } else {
                step = 1.0 / std::max(1.0, std::sqrt(dot(grad, grad)));
            }
            for (std::size_t k = 0; k < S.size(); ++k) {
                double beta = rho[k] * -dot(Y[k], dir);
                for (std::size_t i = 0; i < n; ++i) dir[i] += S[k][i] * (alpha[k] + beta);
            }
            if (!(dot(grad, dir) > 0.0)) {
                S.clear();
                Y.clear();
                rho.clear();
                dir = grad;
                step = 1.0 / std::max(1.0, std::sqrt(dot(grad, grad)));
            }
            double largest = 0.0;
            for (double v : dir) largest = std::max(largest, std::abs(v));
            if (step * largest > kMaxMove) step = kMaxMove / largest;
            double f_trial = 0.0;
            if (!line_search(dir, step, trial, f_trial)) {
                if (S.empty()) {
                    diag.converged = true;
                    return;
                }
                // Stale curvature pairs; retry with steepest ascent next epoch.
                S.clear();
                Y.clear();
                rho.clear();
                --epoch;
                continue;
            }
            prev_x = x;
            prev_g = grad;
            bool done = accept(epoch, trial, f_trial);
            std::vector<double> s(n), y(n);
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = x[i] - prev_x[i];
                y[i] = prev_g[i] - grad[i];  // gradient of -f
            }
            double sy = dot(s, y);
            if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
                S.push_back(std::move(s));
                Y.push_back(std::move(y));
                rho.push_back(1.0 / sy);
                if (static_cast<int>(S.size()) > cfg.lbfgs_memory) {
                    S.pop_front();
                    Y.pop_front();
                    rho.pop_front();
                }
            }
            if (done) {
                diag.converged = true;
                return;
            }
        }
    }
};

}  // namespace

EmbeddingModel fit(const HypergraphSnapshot& snapshot, const NegativeSampleSet& negatives,
                   const FitConfig& cfg, const EmbeddingModel* warm_start) {
    if (snapshot.empty()) throw ValidationError("cannot fit an empty snapshot (year " +
                                                std::to_string(snapshot.year) + ")");
    if (cfg.max_epochs < 0 || !(cfg.tolerance >= 0.0))
        throw ValidationError("invalid fit configuration");
    PoissonObjective obj(snapshot, negatives, cfg.dim, cfg.threads);

    std::vector<double> x0;
    if (warm_start != nullptr) {
        if (warm_start->dim() != cfg.dim || warm_start->vocab().hash() != snapshot.vocab->hash())
            throw ValidationError("warm start model has a different vocabulary or dimension");
        x0 = warm_start->logits();
        x0.insert(x0.end(), warm_start->log_r().begin(), warm_start->log_r().end());
    } else {
        x0 = initial_parameters(snapshot, cfg);
    }

    const auto N = static_cast<std::size_t>(snapshot.num_nodes());
    const auto D = static_cast<std::size_t>(cfg.dim);
    Ascent ascent(obj, cfg, std::move(x0));

    if (cfg.optimizer == Optimizer::gradient) {
        ascent.run_gradient();
    } else if (cfg.optimizer == Optimizer::lbfgs) {
        ascent.run_lbfgs();
    } else {
        // Minibatch Adam over combinations; the objective is re-evaluated on the
        // full data after each pass.
        HypergraphSnapshot batch_snap;
        batch_snap.year = snapshot.year;
        batch_snap.channel = snapshot.channel;
        batch_snap.vocab = snapshot.vocab;
        std::vector<std::pair<const NodeSet*, int>> items;
        for (const auto& c : snapshot.edge_counts) items.emplace_back(&c.nodes, c.count);
        for (const auto& s : negatives.samples) items.emplace_back(&s, 0);
        std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995ULL);
        const auto P = ascent.x.size();
        std::vector<double> m(P, 0.0), v(P, 0.0), g(P);
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        long step_count = 0;
        const double scale = static_cast<double>(items.size());
        for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
            for (std::size_t i = items.size(); i > 1; --i)
                std::swap(items[i - 1], items[static_cast<std::size_t>(rng() % i)]);
            for (std::size_t b = 0; b < items.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
                std::size_t e = std::min(items.size(), b + static_cast<std::size_t>(cfg.batch_size));
                batch_snap.edge_counts.clear();
                NegativeSampleSet batch_neg;
                for (std::size_t k = b; k < e; ++k) {
                    if (items[k].second > 0) {
                        batch_snap.edge_counts.push_back({*items[k].first, items[k].second});
                    } else {
                        batch_neg.samples.push_back(*items[k].first);
                    }
                }
                PoissonObjective batch(batch_snap, batch_neg, cfg.dim);
                batch.value_and_gradient(ascent.x, g);
                double w = scale / static_cast<double>(e - b);
                ++step_count;
                double c1 = 1.0 - std::pow(b1, static_cast<double>(step_count));
                double c2 = 1.0 - std::pow(b2, static_cast<double>(step_count));
                for (std::size_t i = 0; i < P; ++i) {
                    double gi = g[i] * w;
                    m[i] = b1 * m[i] + (1 - b1) * gi;
                    v[i] = b2 * v[i] + (1 - b2) * gi * gi;
                    ascent.x[i] += cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
                }
            }
            double prev = ascent.f;
            ascent.f = obj.value_and_gradient(ascent.x, ascent.grad);
            ascent.check(epoch);
            ascent.diag.trace.push_back(ascent.f);
            ascent.diag.epochs = epoch;
            double rel = std::abs(ascent.f - prev) / std::max(1.0, std::abs(prev));
            ascent.diag.last_relative_change = rel;
            if (rel < cfg.tolerance) {
                ascent.diag.converged = true;
                break;
            }
        }
    }

    ascent.diag.log_likelihood = ascent.f;
    std::vector<double> logits(ascent.x.begin(), ascent.x.begin() + static_cast<std::ptrdiff_t>(N * D));
    std::vector<double> log_r(ascent.x.begin() + static_cast<std::ptrdiff_t>(N * D), ascent.x.end());
    return EmbeddingModel(snapshot.year, snapshot.channel, snapshot.vocab, cfg.dim, std::move(logits),
                          std::move(log_r), std::move(ascent.diag));
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(const std::filesystem::path& path, const EmbeddingModel& model) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    io::BinaryWriter w(path);
    w.bytes(std::string_view(kCheckpointMagic, sizeof kCheckpointMagic));
    w.pod(kCheckpointVersion);
    w.pod(static_cast<std::int32_t>(model.year()));
    w.pod(static_cast<std::uint8_t>(model.channel()));
    w.pod(static_cast<std::uint32_t>(model.dim()));
    w.pod(static_cast<std::uint64_t>(model.num_nodes()));
    w.pod(model.vocab().hash());
    for (const auto& id : model.vocab().ids()) w.str(id);
    const auto& d = model.diagnostics();
    w.pod(d.log_likelihood);
    w.pod(static_cast<std::int32_t>(d.epochs));
    w.pod(d.last_relative_change);
    w.pod(static_cast<std::uint8_t>(d.converged ? 1 : 0));
    w.vec(model.logits());
    w.vec(model.log_r());
    w.finish();
}

EmbeddingModel load_checkpoint(const std::filesystem::path& path) {
    io::BinaryReader r(path);
    if (r.bytes(sizeof kCheckpointMagic) != std::string_view(kCheckpointMagic, sizeof kCheckpointMagic))
        throw ValidationError(path.string() + ": not a model checkpoint");
    auto version = r.pod<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw StaleCacheError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
    int year = r.pod<std::int32_t>();
    auto channel = static_cast<Channel>(r.pod<std::uint8_t>());
    int dim = static_cast<int>(r.pod<std::uint32_t>());
    auto n = r.pod<std::uint64_t>();
    auto vocab_hash = r.pod<std::uint64_t>();
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) ids.push_back(r.str());
    auto vocab = std::make_shared<const NodeVocab>(std::move(ids));
    if (vocab->hash() != vocab_hash || static_cast<std::uint64_t>(vocab->size()) != n)
        throw ValidationError(path.string() + ": vocabulary hash mismatch");
    FitDiagnostics diag;
    diag.log_likelihood = r.pod<double>();
    diag.epochs = r.pod<std::int32_t>();
    diag.last_relative_change = r.pod<double>();
    diag.converged = r.pod<std::uint8_t>() != 0;
    auto logits = r.vec<double>();
    auto log_r = r.vec<double>();
    return EmbeddingModel(year, channel, std::move(vocab), dim, std::move(logits), std::move(log_r),
                          std::move(diag));
}

std::string export_text(const EmbeddingModel& model) {
    std::string out;
    for (int i = 0; i < model.num_nodes(); ++i) {
        out += model.vocab().id(i);
        out += '\t';
        out += io::format_double(model.r(i));
        for (double t : model.theta(i)) {
            out += '\t';
            out += io::format_double(t);
        }
        out += '\n';
    }
    return out;
}

}  // namespace novscope
