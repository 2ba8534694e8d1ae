#include "novscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>

#include "json.hpp"

#include "novscope/error.hpp"
#include "novscope/io.hpp"
#include "novscope/scoring.hpp"

namespace novscope {

namespace {

std::uint64_t splitmix(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::string padded(const char* prefix, int i, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
    return buf;
}

struct NameSpec {
    const char* display;
    const char* table;
};

constexpr NameSpec kFemale[] = {
    {"Anna", "anna"},     {"Maria", "maria"},   {"Elena", "elena"},   {"Sofia", "sofia"},
    {"Laura", "laura"},   {"Julia", "julia"},   {"Emma", "emma"},     {"Olga", "olga"},
    {"Ingrid", "ingrid"}, {"Chloe", "chloe"},   {"Hana", "hana"},     {"Mei", "mei"},
    {"Aisha", "aisha"},   {"Fatima", "fatima"}, {"Priya", "priya"},   {"Lucia", "lucia"},
    {"In\xC3\xA9s", "ines"}, {"Zo\xC3\xAB", "zoe"}, {"Ren\xC3\xA9" "e", "renee"}, {"Agnes", "agnes"},
    {"Marta", "marta"},   {"Petra", "petra"},   {"Yuki", "yuki"},     {"Nadia", "nadia"},
    {"Clara", "clara"},   {"Irene", "irene"},   {"H\xC3\xA9l\xC3\xA8ne", "helene"}, {"Beatriz", "beatriz"},
};

constexpr NameSpec kMale[] = {
    {"James", "james"},   {"John", "john"},     {"David", "david"},   {"Peter", "peter"},
    {"Thomas", "thomas"}, {"Paul", "paul"},     {"Mark", "mark"},     {"Lars", "lars"},
    {"Hans", "hans"},     {"Pierre", "pierre"}, {"Luis", "luis"},     {"Carlos", "carlos"},
    {"Jos\xC3\xA9", "jose"}, {"Andr\xC3\xA9", "andre"}, {"Rafael", "rafael"}, {"Ahmed", "ahmed"},
    {"Omar", "omar"},     {"Ravi", "ravi"},     {"Kenji", "kenji"},   {"Ivan", "ivan"},
    {"Sergei", "sergei"}, {"Marco", "marco"},   {"Luca", "luca"},     {"Felix", "felix"},
    {"Oscar", "oscar"},   {"Tom\xC3\xA1s", "tomas"}, {"Bj\xC3\xB6rn", "bjorn"}, {"Stefan", "stefan"},
};

constexpr NameSpec kAmbiguous[] = {
    {"Alex", "alex"}, {"Sam", "sam"}, {"Kim", "kim"}, {"Jordan", "jordan"},
    {"Robin", "robin"}, {"Sasha", "sasha"},
};

constexpr const char* kInitials[] = {"J.", "M", "K.", "A."};

template <std::size_t N>
const NameSpec& pick(const NameSpec (&names)[N], SynthRng& rng) {
    return names[rng.below(N)];
}

PlantedEmbedding make_embedding(SynthRng& rng, const std::vector<std::string>& ids, int dim,
                                double home_logit, double other_sd, double salience_sd,
                                std::size_t first_real = 0) {
    PlantedEmbedding e;
    e.ids = ids;
    e.dim = dim;
    const auto n = ids.size();
    e.theta.assign(n * static_cast<std::size_t>(dim), 1.0 / dim);
    e.r.assign(n, 1.0);
    for (std::size_t i = first_real; i < n; ++i) {
        auto home = static_cast<int>((i - first_real) % static_cast<std::size_t>(dim));
        std::vector<double> logit(static_cast<std::size_t>(dim));
        double mx = -1e300;
        for (int d = 0; d < dim; ++d) {
            logit[static_cast<std::size_t>(d)] = (d == home ? home_logit : 0.0) + other_sd * rng.normal();
            mx = std::max(mx, logit[static_cast<std::size_t>(d)]);
        }
        double z = 0.0;
        for (auto& l : logit) z += (l = std::exp(l - mx));
        for (int d = 0; d < dim; ++d)
            e.theta[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(d)] =
                logit[static_cast<std::size_t>(d)] / z;
        e.r[i] = std::exp(salience_sd * rng.normal());
    }
    return e;
}

// Draws k distinct nodes without replacement, proportional to the weights.
std::vector<int> draw_set(SynthRng& rng, const std::vector<double>& weights, int k) {
    std::vector<double> w = weights;
    std::vector<int> out;
    while (static_cast<int>(out.size()) < k) {
        auto i = rng.weighted(w);
        out.push_back(static_cast<int>(i));
        w[i] = 0.0;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> dim_weights(const PlantedEmbedding& e, int d, std::size_t first_real = 0) {
    std::vector<double> w(e.ids.size(), 0.0);
    for (std::size_t i = first_real; i < w.size(); ++i)
        w[i] = e.theta[i * static_cast<std::size_t>(e.dim) + static_cast<std::size_t>(d)] * e.r[i];
    return w;
}

// Node set from the coherent proposal (one dimension) or the cross-dimension
// proposal (each node from an independently chosen dimension).
std::vector<int> propose(SynthRng& rng, const std::vector<std::vector<double>>& by_dim, int home, int k,
                         bool cross) {
    if (!cross) return draw_set(rng, by_dim[static_cast<std::size_t>(home)], k);
    std::set<int> nodes;
    while (static_cast<int>(nodes.size()) < k) {
        const auto& w = by_dim[rng.below(by_dim.size())];
        nodes.insert(static_cast<int>(rng.weighted(w)));
    }
    return {nodes.begin(), nodes.end()};
}

// Inverse CDF of the density 1 + a (u - 1/2) on [0, 1].
double tilted_uniform(double v, double a) {
    if (std::abs(a) < 1e-12) return v;
    double b = 1.0 - a / 2.0;
    double u = (-b + std::sqrt(b * b + 2.0 * a * v)) / a;
    return std::clamp(u, 0.0, 1.0);
}

double lambda(const PlantedEmbedding& e, const std::vector<int>& nodes) {
    double log_r = 0.0;
    for (int i : nodes) log_r += std::log(e.r[static_cast<std::size_t>(i)]);
    return std::exp(planted_log_coherence(e, nodes) + log_r);
}

nlohmann::json embedding_json(const PlantedEmbedding& e) {
    nlohmann::json j;
    j["ids"] = e.ids;
    j["r"] = e.r;
    nlohmann::json theta = nlohmann::json::array();
    for (std::size_t i = 0; i < e.ids.size(); ++i)
        theta.push_back(std::vector<double>(e.theta.begin() + static_cast<std::ptrdiff_t>(i * e.dim),
                                            e.theta.begin() + static_cast<std::ptrdiff_t>((i + 1) * e.dim)));
    j["theta"] = std::move(theta);
    return j;
}

}  // namespace

SynthRng::SynthRng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix(x);
}

std::uint64_t SynthRng::next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double SynthRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SynthRng::normal() {
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int SynthRng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 50.0) return std::max(0, static_cast<int>(std::lround(mean + std::sqrt(mean) * normal())));
    double limit = std::exp(-mean), p = 1.0;
    int k = 0;
    while ((p *= uniform()) > limit) ++k;
    return k;
}

std::size_t SynthRng::below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

std::size_t SynthRng::weighted(const std::vector<double>& weights) {
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw ValidationError("weighted draw over zero total weight");
    double u = uniform() * total;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        last = i;
        if (u < weights[i]) return i;
        u -= weights[i];
    }
    return last;
}

void SynthConfig::validate() const {
    auto fail = [](const std::string& m) { throw ValidationError("infeasible synth config: " + m); };
    if (n_papers <= 0 || n_authors <= 0 || n_concepts <= 0 || n_journals <= 0 || n_institutions <= 0)
        fail("all counts must be positive");
    if (D_true < 1) fail("D_true must be positive");
    if (D_true > n_concepts) fail("D_true exceeds n_concepts");
    if (D_true > n_journals) fail("D_true exceeds n_journals");
    if (year_last < year_first) fail("empty year range");
    if (min_set_size < 2 || max_set_size < min_set_size) fail("set sizes must satisfy 2 <= min <= max");
    if (max_set_size > std::min(n_concepts, n_journals)) fail("max_set_size exceeds the vocabulary");
    for (double s : {female_share, unresolved_share, multi_author_share, cross_proposal_share})
        if (!(s >= 0.0 && s <= 1.0)) fail("shares must lie in [0, 1]");
    if (female_share <= 0.0 || female_share >= 1.0) fail("female_share must lie strictly inside (0, 1)");
    for (double b : {beta_female_ctx_surprise, beta_female_con_surprise}) {
        if (!std::isfinite(b)) fail("effects must be finite");
        double a = 12.0 * (1.0 - female_share) * b;
        double a_m = a * female_share / (1.0 - female_share);
        if (std::abs(a) > 2.0 || std::abs(a_m) > 2.0) fail("surprise effect too large for a percentile gap");
    }
    for (double v : {jif.alpha, jif.beta_female, jif.lambda, jif.tau, jif.noise_sd, citations.mean_references,
                     citations.lambda, citations.tau})
        if (!std::isfinite(v)) fail("effects must be finite");
    if (jif.noise_sd < 0.0 || citations.mean_references < 0.0) fail("negative scale parameter");
}

double planted_log_coherence(const PlantedEmbedding& e, const std::vector<int>& nodes) {
    double mx = -1e300;
    std::vector<double> a(static_cast<std::size_t>(e.dim), 0.0);
    for (int d = 0; d < e.dim; ++d) {
        for (int i : nodes)
            a[static_cast<std::size_t>(d)] +=
                std::log(e.theta[static_cast<std::size_t>(i) * static_cast<std::size_t>(e.dim) +
                                 static_cast<std::size_t>(d)]);
        mx = std::max(mx, a[static_cast<std::size_t>(d)]);
    }
    double s = 0.0;
    for (double v : a) s += std::exp(v - mx);
    return mx + std::log(s);
}

SynthCorpus generate(const SynthConfig& cfg) {
    cfg.validate();
    SynthRng rng(cfg.seed);
    SynthCorpus out;
    const int D = cfg.D_true;

    std::vector<std::string> concept_ids, journal_ids;
    for (int i = 0; i < cfg.n_concepts; ++i) concept_ids.push_back(padded("C", i, 5));
    for (int i = 0; i < cfg.n_journals; ++i) journal_ids.push_back(padded("J", i, 4));
    out.content_truth = make_embedding(rng, concept_ids, D, 2.5, 0.5, 0.5);
    out.context_truth = make_embedding(rng, journal_ids, D, 2.5, 0.5, 0.5);

    // Name table.
    for (const auto& n : kFemale)
        out.names.push_back({n.table, Gender::female, 0.92 + 0.07 * rng.uniform(), 150 + rng.poisson(2000)});
    for (const auto& n : kMale)
        out.names.push_back({n.table, Gender::male, 0.92 + 0.07 * rng.uniform(), 150 + rng.poisson(2000)});
    for (const auto& n : kAmbiguous)
        out.names.push_back({n.table, rng.uniform() < 0.5 ? Gender::female : Gender::male,
                             0.5 + 0.3 * rng.uniform(), 10 + rng.poisson(60)});
    std::sort(out.names.begin(), out.names.end(),
              [](const NameEvidence& a, const NameEvidence& b) { return a.name < b.name; });

    // Authors and their observable gender.
    std::vector<Gender> observed(static_cast<std::size_t>(cfg.n_authors));
    std::vector<std::string> author_institution;
    for (int i = 0; i < cfg.n_authors; ++i) {
        AuthorRecord a;
        a.author_id = padded("A", i, 6);
        auto& g = observed[static_cast<std::size_t>(i)];
        if (rng.uniform() < cfg.unresolved_share) {
            g = Gender::unknown;
            switch (rng.below(3)) {
                case 0: a.first_name = pick(kAmbiguous, rng).display; break;
                case 1: a.first_name = kInitials[rng.below(std::size(kInitials))]; break;
                default:
                    a.first_name = pick(kFemale, rng).display;
                    a.middle_name = pick(kMale, rng).display;
            }
        } else {
            g = rng.uniform() < cfg.female_share ? Gender::female : Gender::male;
            const auto& list = g == Gender::female ? kFemale : kMale;
            a.first_name = pick(list, rng).display;
            double m = rng.uniform();
            if (m < 0.1) {
                a.middle_name = pick(list, rng).display;
            } else if (m < 0.15) {
                a.middle_name = kInitials[rng.below(std::size(kInitials))];
            }
        }
        out.authors.push_back(std::move(a));
        author_institution.push_back(padded("I", static_cast<int>(rng.below(static_cast<std::size_t>(cfg.n_institutions))), 4));
    }

    // Paper skeletons sorted by year.
    const int n = cfg.n_papers;
    const int n_years = cfg.year_last - cfg.year_first + 1;
    std::vector<int> years(static_cast<std::size_t>(n));
    for (auto& y : years) y = cfg.year_first + static_cast<int>(rng.below(static_cast<std::size_t>(n_years)));
    std::sort(years.begin(), years.end());

    const double p = cfg.female_share;
    const double a_ctx = 12.0 * (1.0 - p) * cfg.beta_female_ctx_surprise;
    const double a_con = 12.0 * (1.0 - p) * cfg.beta_female_con_surprise;

    out.papers.resize(static_cast<std::size_t>(n));
    std::vector<int> field(static_cast<std::size_t>(n));
    std::vector<double> u_ctx(static_cast<std::size_t>(n)), u_con(static_cast<std::size_t>(n));
    std::vector<int> female(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        auto& paper = out.papers[static_cast<std::size_t>(i)];
        paper.paper_id = padded("W", i, 7);
        paper.year = years[static_cast<std::size_t>(i)];
        int d = static_cast<int>(rng.below(static_cast<std::size_t>(D)));
        field[static_cast<std::size_t>(i)] = d;
        paper.field_ids_l1 = {padded("F", d, 2)};
        paper.discipline_ids_l0 = {padded("D", d / 2, 2)};
        auto first = rng.below(static_cast<std::size_t>(cfg.n_authors));
        paper.author_ids.push_back(out.authors[first].author_id);
        if (rng.uniform() < cfg.multi_author_share) {
            int extra = 1 + static_cast<int>(rng.below(2));
            while (static_cast<int>(paper.author_ids.size()) < std::min(1 + extra, cfg.n_authors)) {
                const auto& id = out.authors[rng.below(static_cast<std::size_t>(cfg.n_authors))].author_id;
                if (std::find(paper.author_ids.begin(), paper.author_ids.end(), id) == paper.author_ids.end())
                    paper.author_ids.push_back(id);
            }
        }
        paper.institution_id = author_institution[first];
        paper.open_access = rng.uniform() < 0.4;
        paper.n_grants = rng.poisson(1.0);

        double v1 = rng.uniform(), v2 = rng.uniform();
        Gender g = observed[first];
        female[static_cast<std::size_t>(i)] = g == Gender::female ? 1 : 0;
        bool tilted = paper.author_ids.size() == 1 && g != Gender::unknown;
        double sign_ctx = 0.0, sign_con = 0.0;
        if (tilted && g == Gender::female) {
            sign_ctx = a_ctx;
            sign_con = a_con;
        } else if (tilted) {
            sign_ctx = -a_ctx * p / (1.0 - p);
            sign_con = -a_con * p / (1.0 - p);
        }
        u_ctx[static_cast<std::size_t>(i)] = tilted_uniform(v1, sign_ctx);
        u_con[static_cast<std::size_t>(i)] = tilted_uniform(v2, sign_con);
    }

    // Candidate pools per field, matched to papers by rank.
    auto assign = [&](const PlantedEmbedding& truth, const std::vector<double>& u, std::vector<double>& pct,
                      std::vector<std::vector<int>>& sets) {
        std::vector<std::vector<double>> by_dim;
        for (int d = 0; d < D; ++d) by_dim.push_back(dim_weights(truth, d));
        pct.assign(static_cast<std::size_t>(n), 0.0);
        sets.assign(static_cast<std::size_t>(n), {});
        for (int d = 0; d < D; ++d) {
            std::vector<int> members;
            for (int i = 0; i < n; ++i)
                if (field[static_cast<std::size_t>(i)] == d) members.push_back(i);
            if (members.empty()) continue;
            std::vector<std::pair<double, std::vector<int>>> pool;
            for (std::size_t m = 0; m < members.size(); ++m) {
                int k = std::min(cfg.max_set_size, cfg.min_set_size + rng.poisson(1.5));
                bool cross = rng.uniform() < cfg.cross_proposal_share;
                auto s = propose(rng, by_dim, d, k, cross);
                pool.emplace_back(-planted_log_coherence(truth, s), std::move(s));
            }
            std::stable_sort(pool.begin(), pool.end(),
                             [](const auto& x, const auto& y) { return x.first < y.first; });
            std::stable_sort(members.begin(), members.end(), [&](int x, int y) {
                return u[static_cast<std::size_t>(x)] < u[static_cast<std::size_t>(y)];
            });
            std::vector<double> sorted;
            for (const auto& [s, nodes] : pool) sorted.push_back(s);
            for (std::size_t m = 0; m < members.size(); ++m) {
                auto i = static_cast<std::size_t>(members[m]);
                sets[i] = pool[m].second;
                pct[i] = sorted.size() < 2 ? 0.5 : rank_in_sorted(pool[m].first, sorted);
            }
        }
    };
    std::vector<std::vector<int>> ctx_sets, con_sets;
    assign(out.context_truth, u_ctx, out.true_pct_context, ctx_sets);
    assign(out.content_truth, u_con, out.true_pct_content, con_sets);

    std::vector<std::vector<double>> venue_weights;
    for (int d = 0; d < D; ++d) venue_weights.push_back(dim_weights(out.context_truth, d));
    for (int i = 0; i < n; ++i) {
        auto ui = static_cast<std::size_t>(i);
        auto& paper = out.papers[ui];
        for (int c : con_sets[ui]) paper.concept_ids_l3.push_back(concept_ids[static_cast<std::size_t>(c)]);
        for (int j : ctx_sets[ui]) {
            int copies = 1 + static_cast<int>(rng.below(3));
            for (int c = 0; c < copies; ++c) paper.referenced_journal_ids.push_back(journal_ids[static_cast<std::size_t>(j)]);
        }
        paper.journal_id = journal_ids[rng.weighted(venue_weights[static_cast<std::size_t>(field[ui])])];
        double f = female[ui];
        double pc = out.true_pct_context[ui];
        double jif = cfg.jif.alpha + cfg.jif.beta_female * f + cfg.jif.lambda * pc + cfg.jif.tau * f * pc +
                     0.05 * (paper.year - cfg.year_first) + cfg.jif.noise_sd * rng.normal();
        jif = std::max(0.0, jif);
        paper.jif_2y = jif;
        paper.jif_5y = jif * 1.1;
    }

    // Citations to strictly earlier papers, with triadic closure through references.
    std::vector<double> attractiveness(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto ui = static_cast<std::size_t>(i);
        double pc = out.true_pct_context[ui];
        attractiveness[ui] = std::exp(cfg.citations.lambda * pc + cfg.citations.tau * female[ui] * pc);
    }
    std::vector<double> cumulative(static_cast<std::size_t>(n));
    std::partial_sum(attractiveness.begin(), attractiveness.end(), cumulative.begin());
    std::vector<std::vector<int>> refs(static_cast<std::size_t>(n));
    int prefix = 0;
    for (int i = 0; i < n; ++i) {
        auto ui = static_cast<std::size_t>(i);
        while (prefix < n && years[static_cast<std::size_t>(prefix)] < years[ui]) ++prefix;
        if (prefix == 0) continue;
        int want = std::min(prefix, rng.poisson(cfg.citations.mean_references));
        std::set<int> chosen;
        for (int attempt = 0; static_cast<int>(chosen.size()) < want && attempt < 20 * want + 20; ++attempt) {
            double u = rng.uniform() * cumulative[static_cast<std::size_t>(prefix - 1)];
            auto j = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.begin() + prefix, u) -
                                      cumulative.begin());
            j = std::min(j, prefix - 1);
            chosen.insert(j);
            const auto& second = refs[static_cast<std::size_t>(j)];
            if (!second.empty() && rng.uniform() < 0.3) chosen.insert(second[rng.below(second.size())]);
        }
        refs[ui].assign(chosen.begin(), chosen.end());
        for (int j : refs[ui])
            out.citations.push_back({out.papers[ui].paper_id, out.papers[static_cast<std::size_t>(j)].paper_id,
                                     years[ui]});
    }

    // Career start: before the first corpus paper, missing for a few authors.
    std::vector<int> first_year(static_cast<std::size_t>(cfg.n_authors), cfg.year_last + 1);
    std::unordered_map<std::string, std::size_t> author_index;
    for (std::size_t i = 0; i < out.authors.size(); ++i) author_index.emplace(out.authors[i].author_id, i);
    for (const auto& paper : out.papers)
        for (const auto& a : paper.author_ids) {
            auto& fy = first_year[author_index.at(a)];
            fy = std::min(fy, paper.year);
        }
    for (std::size_t i = 0; i < out.authors.size(); ++i) {
        if (rng.uniform() < 0.03) continue;
        out.authors[i].first_pub_year = first_year[i] - static_cast<int>(rng.below(25));
    }

    nlohmann::json truth;
    truth["seed"] = cfg.seed;
    truth["n_papers"] = cfg.n_papers;
    truth["n_authors"] = cfg.n_authors;
    truth["D_true"] = cfg.D_true;
    truth["years"] = {cfg.year_first, cfg.year_last};
    truth["female_share"] = cfg.female_share;
    truth["beta_female_ctx_surprise"] = cfg.beta_female_ctx_surprise;
    truth["beta_female_con_surprise"] = cfg.beta_female_con_surprise;
    truth["jif_2y"] = {{"alpha", cfg.jif.alpha},       {"beta_female", cfg.jif.beta_female},
                       {"lambda", cfg.jif.lambda},     {"tau", cfg.jif.tau},
                       {"noise_sd", cfg.jif.noise_sd}, {"year_slope", 0.05}};
    truth["citations"] = {{"mean_references", cfg.citations.mean_references},
                          {"lambda", cfg.citations.lambda},
                          {"tau", cfg.citations.tau}};
    truth["context"] = embedding_json(out.context_truth);
    truth["content"] = embedding_json(out.content_truth);
    out.truth_json = truth.dump(2) + "\n";
    return out;
}

void write_synth_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
    std::string papers, authors, citations, names = "name\tgender\tprobability\tcount\n";
    for (const auto& p : corpus.papers) papers += format_paper_line(p) + "\n";
    for (const auto& a : corpus.authors) authors += format_author_line(a) + "\n";
    for (const auto& c : corpus.citations) citations += format_citation_line(c) + "\n";
    for (const auto& n : corpus.names) names += format_name_line(n) + "\n";
    io::write_text_file(dir / "papers.jsonl", papers);
    io::write_text_file(dir / "authors.jsonl", authors);
    io::write_text_file(dir / "citations.jsonl", citations);
    io::write_text_file(dir / "names.tsv", names);
    io::write_text_file(dir / "truth.json", corpus.truth_json);
}

Corpus to_corpus(const SynthCorpus& synth, const IngestConfig& cfg) {
    return Corpus(synth.papers, synth.authors, synth.citations, NameTable(synth.names), cfg);
}

PlantedSnapshot planted_snapshot(const PlantedSnapshotConfig& cfg) {
    if (cfg.n_nodes < cfg.max_size || cfg.dim < 1 || cfg.min_size < 2 || cfg.max_size < cfg.min_size ||
        cfg.n_hyperedges <= 0 || cfg.n_candidates <= 0)
        throw ValidationError("infeasible planted snapshot config");
    SynthRng rng(cfg.seed);
    PlantedSnapshot out;
    std::vector<std::string> ids{std::string(kRareNodeId)};
    for (int i = 0; i < cfg.n_nodes; ++i) ids.push_back(padded("n", i, 5));
    out.year = cfg.year;
    out.vocab = std::make_shared<const NodeVocab>(ids);
    out.truth = make_embedding(rng, ids, cfg.dim, cfg.home_logit, 0.5, cfg.salience_sd, 1);

    std::vector<std::vector<double>> by_dim;
    for (int d = 0; d < cfg.dim; ++d) by_dim.push_back(dim_weights(out.truth, d, 1));
    std::vector<double> flat(ids.size(), 1.0);
    flat[0] = 0.0;

    std::set<NodeSet> seen;
    for (int attempt = 0; static_cast<int>(out.candidates.size()) < cfg.n_candidates &&
                          attempt < 20 * cfg.n_candidates;
         ++attempt) {
        int k = cfg.min_size + static_cast<int>(rng.below(static_cast<std::size_t>(cfg.max_size - cfg.min_size + 1)));
        auto s = rng.uniform() < 0.5 ? draw_set(rng, by_dim[rng.below(by_dim.size())], k) : draw_set(rng, flat, k);
        if (seen.insert(s).second) out.candidates.push_back(std::move(s));
    }
    double total = 0.0;
    for (const auto& c : out.candidates) {
        out.expected.push_back(lambda(out.truth, c));
        total += out.expected.back();
    }
    double scale = cfg.n_hyperedges / total;
    for (auto& e : out.expected) {
        e *= scale;
        out.counts.push_back(rng.poisson(e));
    }
    return out;
}

HypergraphSnapshot snapshot_from_counts(const PlantedSnapshot& planted, const std::vector<std::size_t>& which) {
    HypergraphSnapshot snap;
    snap.year = planted.year;
    snap.channel = Channel::context;
    snap.vocab = planted.vocab;
    for (auto i : which) {
        int c = planted.counts.at(i);
        if (c <= 0) continue;
        snap.edge_counts.push_back({planted.candidates[i], c});
        for (int k = 0; k < c; ++k)
            snap.hyperedges.push_back({"h" + std::to_string(i) + "_" + std::to_string(k), planted.year, planted.candidates[i]});
    }
    std::sort(snap.edge_counts.begin(), snap.edge_counts.end(),
              [](const Combination& a, const Combination& b) { return a.nodes < b.nodes; });
    return snap;
}

}  // namespace novscope
