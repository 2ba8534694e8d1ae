#include <algorithm>
#include <cmath>
#include <filesystem>
#include <unistd.h>

#include "doctest.h"
#include "novscope/error.hpp"
#include "novscope/io.hpp"
#include "novscope/synth.hpp"

using namespace novscope;
namespace fs = std::filesystem;

namespace {

SynthConfig small(std::uint64_t seed = 3) {
    SynthConfig c;
    c.n_papers = 400;
    c.n_authors = 160;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("synth rng is portable and deterministic") {
    SynthRng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
    }
    SynthRng u(1);
    double mean = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double z = u.normal();
        mean += z;
        sq += z * z;
    }
    CHECK(std::abs(mean / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
    double pm = 0.0;
    for (int i = 0; i < n; ++i) pm += u.poisson(3.5);
    CHECK(std::abs(pm / n - 3.5) < 0.1);
    CHECK(u.weighted({0.0, 0.0, 1.0}) == 2);
}

TEST_CASE("generate is deterministic per seed") {
    auto a = generate(small());
    auto b = generate(small());
    auto c = generate(small(4));
    CHECK(a.truth_json == b.truth_json);
    REQUIRE(a.papers.size() == 400);
    CHECK(a.papers[17].concept_ids_l3 == b.papers[17].concept_ids_l3);
    CHECK(a.citations.size() == b.citations.size());
    CHECK(a.truth_json != c.truth_json);
}

TEST_CASE("synthetic files pass ingest without warnings") {
    auto s = generate(small());
    auto dir = fs::temp_directory_path() / ("novscope_synth_" + std::to_string(::getpid()));
    write_synth_corpus(s, dir);
    auto corpus = ingest_corpus({dir / "papers.jsonl", dir / "authors.jsonl", dir / "citations.jsonl", dir / "names.tsv"});
    CHECK(corpus.report().warnings.empty());
    CHECK(corpus.report().malformed == 0);
    CHECK(corpus.papers().size() == s.papers.size());
    CHECK(fs::exists(dir / "truth.json"));

    auto direct = to_corpus(s);
    CHECK(direct.papers().size() == corpus.papers().size());
    int female = 0, resolved = 0;
    for (const auto& a : corpus.authors()) {
        female += a.resolved_gender == Gender::female;
        resolved += a.resolved_gender != Gender::unknown;
    }
    CHECK(resolved > 0);
    CHECK(std::abs(static_cast<double>(female) / resolved - 0.3) < 0.1);
    for (const auto& p : corpus.papers()) {
        CHECK(p.concept_ids_l3.size() >= 2);
        CHECK((p.year >= 2015 && p.year <= 2020));
    }
    fs::remove_all(dir);
}

TEST_CASE("truth percentiles lie in the unit interval") {
    auto s = generate(small());
    REQUIRE(s.true_pct_context.size() == s.papers.size());
    for (double v : s.true_pct_context)
        if (!std::isnan(v)) CHECK((v >= 0.0 && v <= 1.0));
    for (double v : s.true_pct_content)
        if (!std::isnan(v)) CHECK((v >= 0.0 && v <= 1.0));
    for (std::size_t i = 0; i < s.content_truth.ids.size(); ++i) {
        double sum = 0.0;
        for (int d = 0; d < s.content_truth.dim; ++d)
            sum += s.content_truth.theta[i * static_cast<std::size_t>(s.content_truth.dim) + static_cast<std::size_t>(d)];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("infeasible configurations are rejected") {
    auto c = small();
    c.D_true = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = small();
    c.year_last = c.year_first - 1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = small();
    c.max_set_size = 1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = small();
    c.female_share = 1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = small();
    c.beta_female_ctx_surprise = 5.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    CHECK_NOTHROW(small().validate());
}

TEST_CASE("planted snapshot counts follow their Poisson means") {
    PlantedSnapshotConfig cfg;
    cfg.seed = 5;
    auto p = planted_snapshot(cfg);
    REQUIRE(p.counts.size() == p.expected.size());
    std::vector<std::size_t> order(p.counts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p.expected[a] < p.expected[b]; });
    const std::size_t bins = 5;
    for (std::size_t b = 0; b < bins; ++b) {
        double expected = 0.0, observed = 0.0;
        for (std::size_t k = b * order.size() / bins; k < (b + 1) * order.size() / bins; ++k) {
            expected += p.expected[order[k]];
            observed += p.counts[order[k]];
        }
        CHECK(std::abs(observed - expected) < 4.0 * std::sqrt(expected) + 1.0);
    }

    std::vector<std::size_t> all(p.candidates.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto snap = snapshot_from_counts(p, all);
    std::size_t positive = 0;
    for (int c : p.counts) positive += c > 0;
    CHECK(snap.edge_counts.size() == positive);
    CHECK(planted_log_coherence(p.truth, p.candidates[0]) <= 0.0);
}
