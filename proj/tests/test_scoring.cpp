#include <cmath>
#include <random>

#include "doctest.h"
#include "novscope/error.hpp"
#include "novscope/scoring.hpp"

using namespace novscope;

namespace {

std::shared_ptr<const NodeVocab> abc_vocab() { return std::make_shared<const NodeVocab>(std::vector<std::string>{"a", "b", "c"}); }

// Node a one-hot on dimension 0, b with weight q on dimension 0, c uniform:
// the pair {a,b} has coherence q, hence surprise -log q.
std::shared_ptr<const EmbeddingModel> pair_model(int year, double surprise_ab, Channel ch = Channel::content) {
    double q = std::exp(-surprise_ab);
    std::vector<double> logits{0, 0, 0, -1000, std::log(q), q >= 1.0 ? -1000.0 : std::log1p(-q), 0, 0};
    return std::make_shared<const EmbeddingModel>(year, ch, abc_vocab(), 2, logits, std::vector<double>(4, 0.0));
}

PaperRecord paper(std::string id, int year, std::vector<std::string> concepts, std::vector<std::string> fields) {
    PaperRecord p;
    p.paper_id = std::move(id);
    p.year = year;
    p.concept_ids_l3 = std::move(concepts);
    p.referenced_journal_ids = p.concept_ids_l3;
    p.field_ids_l1 = std::move(fields);
    return p;
}

}  // namespace

TEST_CASE("surprise closed forms") {
    auto m = pair_model(2000, 2.0);
    CHECK(*surprise(*m, std::vector<int>{1, 2}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(!surprise(*m, std::vector<int>{1}));
    auto same = pair_model(2000, 0.0);
    CHECK(*surprise(*same, std::vector<int>{1, 2}) == 0.0);
    CHECK(!surprise(*m, paper("p", 2000, {"a"}, {"F"})));
    CHECK(*surprise(*m, paper("p", 2000, {"b", "a", "a"}, {"F"})) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("prescience is the drop in surprise over the horizon") {
    auto p = paper("p", 2000, {"a", "b"}, {"F"});
    CHECK(*prescience(*pair_model(2000, 2.0), *pair_model(2002, 0.5), p) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(*prescience(*pair_model(2000, 0.5), *pair_model(2002, 2.0), p) == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(*prescience(*pair_model(2000, 0.7), *pair_model(2002, 0.7), p) == 0.0);
    CHECK_THROWS_AS(prescience(*pair_model(2000, 1.0), *pair_model(2001, 1.0), p), ValidationError);
}

TEST_CASE("percentile ranks use average ranks for ties") {
    CHECK(*percentile_rank(std::vector<double>{5, 10, 15}) == std::vector<double>{0, 0.5, 1});
    CHECK(*percentile_rank(std::vector<double>{5, 5, 10}) == std::vector<double>{0.25, 0.25, 1});
    CHECK(*percentile_rank(std::vector<double>{3, 3, 3, 3}) == std::vector<double>{0.5, 0.5, 0.5, 0.5});
    CHECK(!percentile_rank(std::vector<double>{1}));
}

TEST_CASE("percentile ranks are invariant under strictly increasing transforms") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> v(-50, 50);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(30), y(30);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = v(rng) / 10.0;
            y[i] = 2.0 * x[i] + 1.0;
        }
        auto px = *percentile_rank(x), py = *percentile_rank(y);
        CHECK(px == py);
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < x.size(); ++j)
                if (x[i] < x[j]) CHECK(px[i] < px[j]);
    }
}

TEST_CASE("field_max_rank takes the maximum over fields with enough values") {
    FieldDistributions d{{"A", {0.0, 1.0, 2.0, 3.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0}},
                         {"B", {0.0, 0.5, 0.6, 0.7, 0.8}},
                         {"C", {1.0}}};
    auto p = paper("p", 2000, {}, {"A", "B"});
    CHECK(*field_max_rank(p, 0.8, d) == 1.0);
    p.field_ids_l1 = {"A"};
    CHECK(*field_max_rank(p, 3.0, d) == doctest::Approx(0.3));
    p.field_ids_l1 = {"C", "A"};
    CHECK(*field_max_rank(p, 3.0, d) == doctest::Approx(0.3));
    p.field_ids_l1 = {"C"};
    CHECK(!field_max_rank(p, 1.0, d));
}

TEST_CASE("score_corpus: one row per paper and channel, missing prescience at the end of the panel") {
    ModelSet models;
    for (int y = 2000; y <= 2003; ++y) {
        models.add(pair_model(y, 0.2 * (y - 1999), Channel::content));
        models.add(pair_model(y, 0.1 * (y - 1999), Channel::context));
    }
    std::vector<PaperRecord> ps;
    for (int i = 0; i < 10; ++i)
        ps.push_back(paper("p" + std::to_string(i), 2000 + i % 4, i == 3 ? std::vector<std::string>{"a"}
                                                                        : std::vector<std::string>{"a", i % 2 ? "b" : "c"},
                           {i % 3 ? "F" : "G"}));
    Corpus corpus(ps, {}, {}, {});
    auto rows = score_corpus(corpus, models, {Channel::content, Channel::context});
    REQUIRE(rows.size() == 20);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto& p = ps[i / 2];
        CHECK(r.paper_id == p.paper_id);
        CHECK(r.channel == (i % 2 ? Channel::context : Channel::content));
        if (p.concept_ids_l3.size() < 2) {
            CHECK(!r.raw_surprise_t0);
            CHECK(!r.pct_surprise);
            continue;
        }
        REQUIRE(r.raw_surprise_t0);
        CHECK(*r.raw_surprise_t0 >= 0.0);
        CHECK((*r.pct_surprise >= 0.0 && *r.pct_surprise <= 1.0));
        if (p.year >= 2002) {
            CHECK(!r.raw_prescience);
        } else {
            REQUIRE(r.raw_prescience);
            CHECK(*r.raw_prescience == doctest::Approx(*r.raw_surprise_t0 - *r.raw_surprise_t2));
        }
    }
    CHECK(format_scores_csv(rows) == format_scores_csv(score_corpus(corpus, models, {Channel::content, Channel::context})));

    auto parsed = parse_scores_csv(format_scores_csv(rows));
    REQUIRE(parsed.size() == rows.size());
    CHECK(parsed[0].raw_surprise_t0 == rows[0].raw_surprise_t0);
    CHECK_THROWS_AS(parse_scores_csv("x,y\n"), ValidationError);
}

TEST_CASE("score_corpus reports missing model years") {
    ModelSet models;
    models.add(pair_model(2000, 1.0));
    Corpus corpus({paper("p", 2001, {"a", "b"}, {"F"})}, {}, {}, {});
    CHECK_THROWS_AS(score_corpus(corpus, models, {Channel::content}), ValidationError);
    CHECK_THROWS_AS(score_corpus(corpus, models, {Channel::context}), ValidationError);
}
