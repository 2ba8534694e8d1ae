#include <filesystem>
#include <random>

#include "doctest.h"
#include "novscope/corpus.hpp"
#include "novscope/error.hpp"
#include "novscope/io.hpp"

using namespace novscope;
namespace fs = std::filesystem;

namespace {

NameEvidence ev(std::string name, Gender g, double p, std::int64_t count) { return {std::move(name), g, p, count}; }

PaperRecord paper(std::string id, int year, std::vector<std::string> authors, std::vector<std::string> fields,
                  std::optional<std::string> inst = std::nullopt) {
    PaperRecord p;
    p.paper_id = std::move(id);
    p.year = year;
    p.author_ids = std::move(authors);
    p.field_ids_l1 = std::move(fields);
    p.institution_id = std::move(inst);
    return p;
}

AuthorRecord author(std::string id, std::optional<std::string> first, std::optional<int> first_pub = 2000) {
    AuthorRecord a;
    a.author_id = std::move(id);
    a.first_name = std::move(first);
    a.first_pub_year = first_pub;
    return a;
}

NameTable names() {
    return NameTable({ev("Anna", Gender::female, 0.98, 5000), ev("Bob", Gender::male, 0.99, 4000),
                      ev("Kim", Gender::female, 0.55, 20)});
}

const char* kPaperLine =
    R"({"paper_id":"W1","year":2010,"journal_id":"J1","concept_ids_l3":["C1","C2","C1"],"field_ids_l1":["F1"],)"
    R"("discipline_ids_l0":["D1"],"referenced_journal_ids":["J2","J2","J3"],"author_ids":["A1"],)"
    R"("institution_id":"I1","open_access":true,"jif_2y":2.5,"jif_5y":null,"n_grants":0})";

}  // namespace

TEST_CASE("resolve_gender follows the confidence rules") {
    auto f95 = ev("Maria", Gender::female, 0.95, 40);
    CHECK(resolve_gender(&f95, nullptr) == Gender::female);

    auto m150 = ev("Alex", Gender::male, 0.6, 150);
    auto f500 = ev("Jo", Gender::female, 0.99, 500);
    CHECK(resolve_gender(&m150, &f500) == Gender::unknown);
    CHECK(resolve_gender(&f500, &m150) == Gender::unknown);

    auto initial = ev("J.", Gender::male, 0.99, 10000);
    CHECK(resolve_gender(&initial, nullptr) == Gender::unknown);

    auto weak = ev("Sam", Gender::female, 0.90, 100);
    CHECK(resolve_gender(&weak, nullptr) == Gender::unknown);  // both thresholds strict
    CHECK(resolve_gender(&weak, &m150) == Gender::male);
    CHECK(resolve_gender(&m150, &weak) == Gender::male);
    CHECK(resolve_gender(nullptr, nullptr) == Gender::unknown);

    IngestConfig loose;
    loose.min_name_probability = 0.5;
    CHECK(resolve_gender(&weak, nullptr, loose) == Gender::female);
}

TEST_CASE("names are matched case-insensitively with diacritics folded") {
    CHECK(normalize_name("  ÉLODIE ") == "elodie");
    CHECK(normalize_name("Jürgen") == "jurgen");
    CHECK(is_initial("J."));
    CHECK(is_initial("j"));
    CHECK(is_initial("J.R."));
    CHECK(!is_initial("Jo"));
    NameTable t({ev("Zoë", Gender::female, 0.99, 1000)});
    REQUIRE(t.find("ZOE") != nullptr);
    CHECK(t.find("zoe")->inferred_gender == Gender::female);
}

TEST_CASE("career age") {
    auto a = author("A", "Anna", 2000);
    a.n_papers = 3;
    CHECK(compute_career_age(a, 2010) == 10);
    a.first_pub_year = 1950;
    CHECK(!compute_career_age(a, 2015));
    a.first_pub_year = 2000;
    a.n_papers = 1;
    CHECK(!compute_career_age(a, 2010));

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> year(1900, 2030);
    for (int i = 0; i < 500; ++i) {
        AuthorRecord r = author("R", std::nullopt, year(rng));
        r.n_papers = 2;
        auto age = compute_career_age(r, year(rng));
        if (age) CHECK((*age >= 0 && *age <= 60));
    }
}

TEST_CASE("line parsers validate keys and types and round trip") {
    auto p = parse_paper_line(kPaperLine);
    CHECK(p.concept_ids_l3 == std::vector<std::string>{"C1", "C2"});
    CHECK(p.referenced_journal_ids == std::vector<std::string>{"J2", "J2", "J3"});
    CHECK(p.open_access);
    CHECK(*p.jif_2y == 2.5);
    CHECK(!p.jif_5y);
    CHECK(parse_paper_line(format_paper_line(p)).concept_ids_l3 == p.concept_ids_l3);

    CHECK_THROWS_AS(parse_paper_line(R"({"paper_id":"W1"})"), ValidationError);
    CHECK_THROWS_AS(parse_paper_line("not json"), ValidationError);
    std::string negative_jif = kPaperLine;
    negative_jif.replace(negative_jif.find("2.5"), 3, "-1");
    CHECK_THROWS_AS(parse_paper_line(negative_jif), ValidationError);

    auto a = parse_author_line(R"({"author_id":"A1","first_name":"Anna","middle_name":null,"first_pub_year":2001})");
    CHECK(*a.first_name == "Anna");
    CHECK(!a.middle_name);
    auto c = parse_citation_line(R"({"citing_id":"W2","cited_id":"W1","citing_year":2012})");
    CHECK(c.citing_year == 2012);
    auto n = parse_name_line("Anna\tfemale\t0.98\t5000");
    CHECK(n.inferred_gender == Gender::female);
    CHECK(n.count == 5000);
    CHECK_THROWS_AS(parse_name_line("Anna\tother\t0.9\t1"), ValidationError);
    CHECK_THROWS_AS(parse_name_line("Anna\tfemale\t1.5\t1"), ValidationError);
}

TEST_CASE("corpus resolves genders, drops duplicates and self citations") {
    std::vector<PaperRecord> ps{paper("P1", 2010, {"A1"}, {"F"}), paper("P1", 2011, {"A2"}, {"F"}),
                                paper("P2", 2011, {"A1", "A2", "A3"}, {"F"})};
    std::vector<AuthorRecord> as{author("A1", "anna"), author("A2", "BOB"), author("A3", "Kim")};
    std::vector<CitationEdge> cs{{"P2", "P1", 2011}, {"P2", "P1", 2011}, {"P2", "P2", 2011}};
    Corpus corpus(ps, as, cs, names());
    CHECK(corpus.papers().size() == 2);
    CHECK(corpus.report().duplicates == 1);
    CHECK(corpus.report().self_citations == 1);
    CHECK(corpus.citations().size() == 1);
    CHECK(corpus.find_author("A1")->resolved_gender == Gender::female);
    CHECK(corpus.find_author("A2")->resolved_gender == Gender::male);
    CHECK(corpus.find_author("A3")->resolved_gender == Gender::unknown);
    CHECK(corpus.find_author("A1")->n_papers == 2);

    auto share = corpus.female_share(*corpus.find_paper("P2"));
    CHECK(*share.share == 0.5);
    CHECK(share.n_unknown == 1);

    CHECK_THROWS_AS(Corpus({}, {}, {}, {}), ValidationError);
}

TEST_CASE("female share boundaries") {
    std::vector<AuthorRecord> as{author("A1", "Anna"), author("A2", "Anna"), author("A3", "Anna"),
                                 author("U", std::nullopt)};
    Corpus corpus({paper("P1", 2010, {"A1", "A2", "A3"}, {"F"}), paper("P2", 2010, {"U", "X"}, {"F"})}, as, {},
                  names());
    CHECK(*corpus.female_share(corpus.papers()[0]).share == 1.0);
    CHECK(!corpus.female_share(corpus.papers()[1]).share);
}

TEST_CASE("department size counts the institution's papers in the field, max over fields") {
    std::vector<PaperRecord> ps;
    for (int i = 0; i < 3; ++i) ps.push_back(paper("a" + std::to_string(i), 2010, {"X"}, {"F1"}, "I"));
    for (int i = 0; i < 6; ++i) ps.push_back(paper("b" + std::to_string(i), 2010, {"X"}, {"F2"}, "I"));
    ps.push_back(paper("focal", 2010, {"X"}, {"F1", "F2"}, "I"));
    ps.push_back(paper("lonely", 2010, {"X"}, {"F3"}, "J"));
    ps.push_back(paper("other_year", 2011, {"X"}, {"F1"}, "I"));
    Corpus corpus(ps, {}, {}, {});
    CHECK(*corpus.department_size(*corpus.find_paper("focal")) == 7);
    CHECK(*corpus.department_size(*corpus.find_paper("lonely")) == 1);
    CHECK(*corpus.department_size(*corpus.find_paper("a0")) == 4);

    auto outside = paper("new", 2010, {"X"}, {"F1"}, "I");
    CHECK(*corpus.department_size(outside) == 5);
    CHECK(!corpus.department_size(paper("noinst", 2010, {"X"}, {"F1"})));

    IngestConfig excl;
    excl.department_size_includes_focal = false;
    Corpus corpus_excl(ps, {}, {}, {}, excl);
    CHECK(*corpus_excl.department_size(*corpus_excl.find_paper("lonely")) == 0);
}

TEST_CASE("women field share is cumulative over solo papers with resolved gender") {
    std::vector<AuthorRecord> as{author("W", "Anna"), author("M", "Bob"), author("U", std::nullopt)};
    std::vector<PaperRecord> ps{paper("p1", 2010, {"W"}, {"F"}), paper("p2", 2011, {"W"}, {"F"}),
                                paper("p3", 2011, {"M"}, {"F"}), paper("p4", 2012, {"U"}, {"F"}),
                                paper("team", 2012, {"W", "M"}, {"F"}), paper("p5", 2013, {"M"}, {"G"})};
    Corpus corpus(ps, as, {}, names());
    CHECK(*corpus.women_field_share("F", 2010) == 1.0);
    CHECK(*corpus.women_field_share("F", 2011) == doctest::Approx(2.0 / 3.0));
    CHECK(*corpus.women_field_share("F", 2012) == doctest::Approx(2.0 / 3.0));
    CHECK(!corpus.women_field_share("F", 2009));
    CHECK(!corpus.women_field_share("H", 2012));
    CHECK(*corpus.women_field_share("G", 2013) == 0.0);

    IngestConfig excl;
    excl.women_share_inclusive_year = false;
    Corpus corpus_excl(ps, as, {}, names(), excl);
    CHECK(*corpus_excl.women_field_share("F", 2011) == 1.0);

    // Brute-force recount over random solo papers.
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> yr(2000, 2009), who(0, 2);
    std::vector<PaperRecord> rp;
    for (int i = 0; i < 200; ++i)
        rp.push_back(paper("r" + std::to_string(i), yr(rng), {std::vector<std::string>{"W", "M", "U"}[who(rng)]}, {"F"}));
    Corpus rc(rp, as, {}, names());
    for (int y = 2000; y < 2010; ++y) {
        int w = 0, t = 0;
        for (const auto& p : rp) {
            if (p.year > y || p.author_ids[0] == "U") continue;
            ++t;
            w += p.author_ids[0] == "W";
        }
        if (t == 0) {
            CHECK(!rc.women_field_share("F", y));
        } else {
            CHECK(*rc.women_field_share("F", y) == doctest::Approx(static_cast<double>(w) / t));
        }
    }
}

TEST_CASE("ingest counts malformed lines and rejects empty or mostly broken files") {
    auto dir = fs::temp_directory_path() / "novscope_test_corpus";
    fs::create_directories(dir);
    std::string good = kPaperLine;
    auto line = [&](const std::string& id) {
        std::string s = good;
        s.replace(s.find("\"W1\""), 4, "\"" + id + "\"");
        return s + "\n";
    };
    io::write_text_file(dir / "papers.jsonl", line("W1") + line("W2") + line("W3") + "{broken\n");
    io::write_text_file(dir / "names.tsv", "name\tgender\tprobability\tcount\nAnna\tfemale\t0.98\t5000\n");
    IngestConfig cfg;
    cfg.max_malformed_fraction = 0.5;
    auto corpus = ingest_corpus({dir / "papers.jsonl", {}, {}, dir / "names.tsv"}, cfg);
    CHECK(corpus.papers().size() == 3);
    CHECK(corpus.report().malformed == 1);
    CHECK(corpus.report().warnings.size() == 1);
    CHECK(corpus.names().size() == 1);

    CHECK_THROWS_AS(ingest_corpus({dir / "papers.jsonl", {}, {}, {}}, IngestConfig{.max_malformed_fraction = 0.1}),
                    ValidationError);

    io::write_text_file(dir / "empty.jsonl", "");
    try {
        ingest_corpus({dir / "empty.jsonl", {}, {}, {}});
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()) == "empty corpus");
    }

    io::write_text_file(dir / "dup.jsonl", line("W1") + line("W1"));
    auto dup = ingest_corpus({dir / "dup.jsonl", {}, {}, {}});
    CHECK(dup.papers().size() == 1);
    CHECK(dup.report().warnings.size() == 1);
    fs::remove_all(dir);
}
