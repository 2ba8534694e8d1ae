#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "doctest.h"
#include "novscope/embedding.hpp"
#include "novscope/error.hpp"
#include "novscope/io.hpp"
#include "novscope/synth.hpp"
#include "oracles.hpp"

using namespace novscope;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<const NodeVocab> vocab_of(int n) {
    std::vector<std::string> ids;
    for (int i = 1; i < n; ++i) ids.push_back("n" + std::to_string(i));
    return std::make_shared<const NodeVocab>(ids);
}

EmbeddingModel model(int n, int dim, std::vector<double> logits, std::vector<double> log_r = {}) {
    if (log_r.empty()) log_r.assign(static_cast<std::size_t>(n), 0.0);
    return EmbeddingModel(2000, Channel::content, vocab_of(n), dim, std::move(logits), std::move(log_r));
}

EmbeddingModel random_model(std::mt19937_64& rng, int n, int dim) {
    std::normal_distribution<double> z(0.0, 2.0);
    std::vector<double> logits(static_cast<std::size_t>(n * dim)), log_r(static_cast<std::size_t>(n));
    for (auto& x : logits) x = z(rng);
    for (auto& x : log_r) x = 0.5 * z(rng);
    return model(n, dim, logits, log_r);
}

bool monotone(const FitDiagnostics& d) {
    for (std::size_t i = 1; i < d.trace.size(); ++i)
        if (d.trace[i] < d.trace[i - 1] - 1e-9) return false;
    return true;
}

}  // namespace

TEST_CASE("coherence and propensity closed forms") {
    auto uniform = model(3, 4, std::vector<double>(12, 0.0), {0.0, std::log(2.0), std::log(3.0)});
    std::vector<int> single{1}, pair{1, 2};
    CHECK(coherence(uniform, single) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(coherence(uniform, pair) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(propensity(uniform, pair) == doctest::Approx(1.5).epsilon(1e-14));

    auto one_hot = model(3, 2, {0, 0, 0, -1000, 0, -1000});
    CHECK(coherence(one_hot, pair) == 1.0);
    auto opposite = model(3, 2, {0, 0, 0, -1000, -1000, 0});
    CHECK(coherence(opposite, pair) < 1e-300);
    CHECK(std::isfinite(opposite.log_coherence(pair)));

    std::mt19937_64 rng(1);
    auto m = random_model(rng, 6, 3);
    CHECK(propensity(m, std::vector<int>{2, 3}) == doctest::Approx(coherence(m, std::vector<int>{2, 3}) * m.r(2) * m.r(3)));
    CHECK_THROWS_AS(m.log_coherence(std::vector<int>{1, 6}), ValidationError);
}

TEST_CASE("simplex and positivity invariants; coherence within [0,1]; order invariance") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        auto m = random_model(rng, 8, 1 + rep % 5);
        for (int i = 0; i < m.num_nodes(); ++i) {
            auto t = m.theta(i);
            double s = std::accumulate(t.begin(), t.end(), 0.0);
            CHECK(std::abs(s - 1.0) < 1e-9);
            for (double x : t) CHECK(x >= 0.0);
            CHECK(m.r(i) > 0.0);
        }
        std::vector<int> nodes{5, 1, 7, 3};
        double c = coherence(m, nodes);
        CHECK((c >= 0.0 && c <= 1.0 + 1e-12));
        std::vector<int> perm{3, 7, 1, 5};
        CHECK(m.log_coherence(nodes) == m.log_coherence(perm));
        CHECK(m.log_propensity(nodes) == m.log_propensity(perm));
    }
}

TEST_CASE("objective matches the direct summation oracle and its gradient matches finite differences") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        auto inst = oracle::tiny_instance(rng);
        PoissonObjective obj(inst.snapshot, inst.negatives, inst.dim);
        std::vector<double> g(inst.params.size());
        double v = obj.value_and_gradient(inst.params, g);
        double brute = oracle::log_likelihood(inst.params, obj.num_nodes(), inst.dim, inst.snapshot, inst.negatives);
        CHECK(std::abs(v - brute) <= 1e-10 * std::max(1.0, std::abs(brute)));
        CHECK(obj.value(inst.params) == v);
        auto fd = oracle::central_difference(obj, inst.params);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            num = std::max(num, std::abs(g[i] - fd[i]));
            den = std::max(den, std::abs(fd[i]));
        }
        CHECK(num / den < 1e-5);
    }
}

TEST_CASE("log_likelihood closed forms") {
    HypergraphSnapshot snap;
    snap.vocab = vocab_of(3);
    snap.edge_counts = {{{1, 2}, 3}};
    auto m = model(3, 1, {0, 0, 0}, {0.0, std::log(3.0) / 2, std::log(3.0) / 2});
    CHECK(log_likelihood(m, snap, {}) == doctest::Approx(3 * std::log(3.0) - 3).epsilon(1e-14));

    HypergraphSnapshot empty;
    empty.vocab = snap.vocab;
    NegativeSampleSet neg;
    neg.samples = {{1, 2}, {0, 1}};
    double expected = -(propensity(m, std::vector<int>{1, 2}) + propensity(m, std::vector<int>{0, 1}));
    CHECK(log_likelihood(m, empty, neg) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("full-batch optimizers ascend monotonically and agree with each other") {
    PlantedSnapshotConfig pc;
    pc.n_nodes = 40;
    pc.n_hyperedges = 600;
    pc.n_candidates = 1500;
    pc.dim = 3;
    auto planted = planted_snapshot(pc);
    std::vector<std::size_t> all(planted.candidates.size());
    std::iota(all.begin(), all.end(), 0);
    auto snap = snapshot_from_counts(planted, all);
    auto neg = draw_negatives(snap, 3, 1);

    FitConfig cfg;
    cfg.dim = 3;
    cfg.max_epochs = 3000;
    cfg.tolerance = 1e-10;
    auto grad = fit(snap, neg, cfg);
    CHECK(monotone(grad.diagnostics()));
    CHECK(grad.diagnostics().trace.size() == static_cast<std::size_t>(grad.diagnostics().epochs) + 1);
    CHECK(grad.diagnostics().log_likelihood == doctest::Approx(log_likelihood(grad, snap, neg)).epsilon(1e-12));

    cfg.optimizer = Optimizer::lbfgs;
    auto lbfgs = fit(snap, neg, cfg);
    CHECK(monotone(lbfgs.diagnostics()));
    CHECK(lbfgs.diagnostics().converged);
    CHECK(lbfgs.diagnostics().log_likelihood >= grad.diagnostics().log_likelihood - 1e-3 * std::abs(grad.diagnostics().log_likelihood));

    // Restarting at the optimum stays there.
    auto again = fit(snap, neg, cfg, &lbfgs);
    double ll = lbfgs.diagnostics().log_likelihood;
    CHECK(again.diagnostics().trace.front() == doctest::Approx(ll).epsilon(1e-14));
    CHECK(again.diagnostics().log_likelihood >= ll);
    CHECK(again.diagnostics().log_likelihood - ll < 1e-6 * std::abs(ll));
    CHECK(again.diagnostics().converged);

    cfg.optimizer = Optimizer::stochastic;
    cfg.max_epochs = 30;
    auto adam = fit(snap, neg, cfg);
    CHECK(adam.diagnostics().log_likelihood > adam.diagnostics().trace.front());
}

TEST_CASE("fit is deterministic, and threaded accumulation matches itself") {
    PlantedSnapshotConfig pc;
    pc.n_nodes = 60;
    pc.n_hyperedges = 3000;
    pc.n_candidates = 8000;
    auto planted = planted_snapshot(pc);
    std::vector<std::size_t> all(planted.candidates.size());
    std::iota(all.begin(), all.end(), 0);
    auto snap = snapshot_from_counts(planted, all);
    auto neg = draw_negatives(snap, 2, 1);
    FitConfig cfg;
    cfg.dim = 4;
    cfg.max_epochs = 40;
    auto a = fit(snap, neg, cfg);
    auto b = fit(snap, neg, cfg);
    CHECK(a.logits() == b.logits());
    CHECK(a.log_r() == b.log_r());
    cfg.threads = 3;
    auto c = fit(snap, neg, cfg);
    auto d = fit(snap, neg, cfg);
    CHECK(c.logits() == d.logits());
    CHECK(c.diagnostics().log_likelihood == doctest::Approx(a.diagnostics().log_likelihood).epsilon(1e-9));
}

TEST_CASE("fit recovers planted structure: fitted rates explain held-in counts") {
    PlantedSnapshotConfig pc;
    pc.n_nodes = 60;
    pc.n_hyperedges = 4000;
    pc.n_candidates = 6000;
    pc.seed = 5;
    auto planted = planted_snapshot(pc);
    std::vector<std::size_t> all(planted.candidates.size());
    std::iota(all.begin(), all.end(), 0);
    auto snap = snapshot_from_counts(planted, all);
    auto neg = draw_negatives(snap, 5, 2);
    FitConfig cfg;
    cfg.dim = 4;
    cfg.max_epochs = 1500;
    cfg.optimizer = Optimizer::lbfgs;
    auto m = fit(snap, neg, cfg);
    // Rank agreement of fitted and planted log-rates over observed combinations.
    std::vector<double> fitted, truth;
    for (std::size_t i = 0; i < planted.candidates.size(); ++i) {
        if (planted.counts[i] == 0) continue;
        fitted.push_back(m.log_propensity(planted.candidates[i]));
        truth.push_back(std::log(planted.expected[i]));
    }
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
        return r;
    };
    auto rf = ranks(fitted), rt = ranks(truth);
    double n = static_cast<double>(rf.size()), d2 = 0.0;
    for (std::size_t i = 0; i < rf.size(); ++i) d2 += (rf[i] - rt[i]) * (rf[i] - rt[i]);
    double spearman = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    CHECK(spearman > 0.7);
}

TEST_CASE("fit validates its inputs") {
    HypergraphSnapshot empty;
    empty.vocab = vocab_of(3);
    CHECK_THROWS_AS(fit(empty, {}, FitConfig{}), ValidationError);

    HypergraphSnapshot snap;
    snap.vocab = vocab_of(3);
    snap.edge_counts = {{{1, 2}, 1}};
    FitConfig cfg;
    cfg.dim = 2;
    auto other = model(4, 2, std::vector<double>(8, 0.0));
    CHECK_THROWS_AS(fit(snap, {}, cfg, &other), ValidationError);
    CHECK_THROWS_AS(model(3, 2, {0, 0}), ValidationError);
    CHECK_THROWS_AS(optimizer_from_string("newton"), ValidationError);
    CHECK(optimizer_from_string(to_string(Optimizer::lbfgs)) == Optimizer::lbfgs);
}

TEST_CASE("checkpoint round trip and text export") {
    std::mt19937_64 rng(6);
    auto m = random_model(rng, 5, 3);
    auto path = fs::temp_directory_path() / "novscope_test_embedding" / "m.ckpt";
    save_checkpoint(path, m);
    auto loaded = load_checkpoint(path);
    CHECK(loaded.logits() == m.logits());
    CHECK(loaded.log_r() == m.log_r());
    CHECK(loaded.vocab().ids() == m.vocab().ids());
    CHECK(loaded.year() == m.year());
    auto text = export_text(m);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    CHECK(text.rfind(std::string(kRareNodeId) + "\t", 0) == 0);

    io::write_text_file(path, "garbage");
    CHECK_THROWS_AS(load_checkpoint(path), ValidationError);
    fs::remove_all(path.parent_path());
}
