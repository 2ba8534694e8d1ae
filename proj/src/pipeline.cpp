#include "novscope/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"

#include "novscope/error.hpp"
#include "novscope/io.hpp"

namespace novscope {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValidationError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    T out{};
    in >> out;
    if (in.fail() || !in.eof()) throw ValidationError("config key '" + key + "' expects a number, got '" + v + "'");
    return out;
}

std::optional<int> parse_optional_int(const std::string& key, const std::string& v) {
    if (v == "none" || v == "auto") return std::nullopt;
    return parse_number<int>(key, v);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(v);
    while (std::getline(in, cur, ',')) {
        auto b = cur.find_first_not_of(" \t");
        auto e = cur.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
    }
    return out;
}

std::vector<Channel> parse_channels(const std::string& v) {
    if (v == "both") return {Channel::content, Channel::context};
    std::vector<Channel> out;
    for (const auto& c : split_list(v)) {
        auto ch = channel_from_string(c);
        if (std::find(out.begin(), out.end(), ch) == out.end()) out.push_back(ch);
    }
    if (out.empty()) throw ValidationError("no channels selected");
    std::sort(out.begin(), out.end());
    return out;
}

std::string channel_list(const std::vector<Channel>& chs) {
    std::string out;
    for (auto c : chs) out += (out.empty() ? "" : ",") + std::string(to_string(c));
    return out;
}

std::string fmt(double v) { return io::format_double(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
template <typename T>
std::string fmt_opt(const std::optional<T>& v, const char* none) {
    if (!v) return none;
    if constexpr (std::is_same_v<T, fs::path>) {
        return v->generic_string();
    } else {
        return std::to_string(*v);
    }
}

std::string suffix(Channel c) { return c == Channel::content ? "con" : "ref"; }

std::uint64_t mix_seed(std::uint64_t seed, Channel channel, int year) {
    auto h = io::fnv1a64(to_string(channel), seed * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
    return io::fnv1a64(std::to_string(year), h);
}

fs::path snapshot_file(const fs::path& cache, Channel c, int year) {
    return cache / "snapshots" / (std::string(to_string(c)) + "_" + std::to_string(year) + ".snap");
}

fs::path model_file(const fs::path& cache, Channel c, int year) {
    return cache / "models" / (std::string(to_string(c)) + "_" + std::to_string(year) + ".ckpt");
}

json read_json(const fs::path& path) {
    try {
        return json::parse(io::read_text_file(path));
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::vector<Stage> predecessors(Stage s) {
    switch (s) {
        case Stage::synth:
        case Stage::ingest: return {};
        case Stage::build: return {Stage::ingest};
        case Stage::fit: return {Stage::build};
        case Stage::score: return {Stage::fit};
        case Stage::metrics: return {Stage::ingest};
        case Stage::regress:
        case Stage::report: return {Stage::score, Stage::metrics};
    }
    return {};
}

bool spec_columns_available(const ModelSpec& spec, const Table& table) {
    if (!table.has(spec.outcome)) return false;
    for (const auto& t : spec.terms)
        for (const auto& f : t.factors)
            if (!table.has(f.column)) return false;
    return true;
}

}  // namespace

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::synth: return "synth";
        case Stage::ingest: return "ingest";
        case Stage::build: return "build";
        case Stage::fit: return "fit";
        case Stage::score: return "score";
        case Stage::metrics: return "metrics";
        case Stage::regress: return "regress";
        case Stage::report: return "report";
    }
    return "?";
}

Stage stage_from_string(std::string_view s) {
    for (auto st : {Stage::synth, Stage::ingest, Stage::build, Stage::fit, Stage::score, Stage::metrics,
                    Stage::regress, Stage::report})
        if (to_string(st) == s) return st;
    throw ValidationError("unknown stage '" + std::string(s) + "'");
}

IngestPaths RunConfig::input_paths() const {
    return {papers.value_or(data_dir / "papers.jsonl"), authors.value_or(data_dir / "authors.jsonl"),
            citations.value_or(data_dir / "citations.jsonl"), names.value_or(data_dir / "names.tsv")};
}

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError(std::string("invalid config: ") + e.what());
    }
    RunConfig c;
    auto path = [&](const std::string& v) {
        fs::path p(v);
        return p.is_absolute() ? p : (base_dir / p).lexically_normal();
    };
    for (const auto& [section, body] : tree) {
        if (!body.data().empty()) throw ValidationError("config key '" + section + "' outside a section");
        for (const auto& [key, node] : body) {
            const std::string v = node.data();
            const std::string k = section + "." + key;
            bool ok = true;
            if (section == "paths") {
                if (key == "data_dir") c.data_dir = path(v);
                else if (key == "papers") c.papers = path(v);
                else if (key == "authors") c.authors = path(v);
                else if (key == "citations") c.citations = path(v);
                else if (key == "names") c.names = path(v);
                else if (key == "cache_dir") c.cache_dir = path(v);
                else if (key == "output_dir") c.output_dir = path(v);
                else ok = false;
            } else if (section == "run") {
                if (key == "seed") c.seed = parse_number<std::uint64_t>(k, v);
                else if (key == "channels") c.channels = parse_channels(v);
                else if (key == "threads") c.threads = parse_number<int>(k, v);
                else ok = false;
            } else if (section == "ingest") {
                auto& g = c.ingest;
                if (key == "min_name_count") g.min_name_count = parse_number<std::int64_t>(k, v);
                else if (key == "min_name_probability") g.min_name_probability = parse_number<double>(k, v);
                else if (key == "max_career_age") g.max_career_age = parse_number<int>(k, v);
                else if (key == "department_size_includes_focal") g.department_size_includes_focal = parse_bool(k, v);
                else if (key == "women_share_inclusive_year") g.women_share_inclusive_year = parse_bool(k, v);
                else if (key == "year_min") g.year_min = parse_optional_int(k, v);
                else if (key == "year_max") g.year_max = parse_optional_int(k, v);
                else if (key == "max_malformed_fraction") g.max_malformed_fraction = parse_number<double>(k, v);
                else ok = false;
            } else if (section == "build") {
                if (key == "min_node_freq") c.snapshot.min_node_freq = parse_number<int>(k, v);
                else if (key == "max_edge_size") c.snapshot.max_edge_size = parse_number<int>(k, v);
                else if (key == "history_window")
                    c.snapshot.history_window = v == "all" ? std::nullopt : std::optional<int>(parse_number<int>(k, v));
                else if (key == "negative_ratio") c.negative_ratio = parse_number<int>(k, v);
                else if (key == "first_year") c.first_year = parse_optional_int(k, v);
                else if (key == "last_year") c.last_year = parse_optional_int(k, v);
                else ok = false;
            } else if (section == "fit") {
                auto& f = c.fit;
                if (key == "dim") f.dim = parse_number<int>(k, v);
                else if (key == "max_epochs") f.max_epochs = parse_number<int>(k, v);
                else if (key == "tolerance") f.tolerance = parse_number<double>(k, v);
                else if (key == "optimizer") f.optimizer = optimizer_from_string(v);
                else if (key == "init_logit_sd") f.init_logit_sd = parse_number<double>(k, v);
                else if (key == "lbfgs_memory") f.lbfgs_memory = parse_number<int>(k, v);
                else if (key == "batch_size") f.batch_size = parse_number<int>(k, v);
                else if (key == "learning_rate") f.learning_rate = parse_number<double>(k, v);
                else if (key == "warm_start") c.warm_start = parse_bool(k, v);
                else ok = false;
            } else if (section == "score") {
                if (key == "horizon") c.score.horizon = parse_number<int>(k, v);
                else ok = false;
            } else if (section == "metrics") {
                auto& m = c.metrics;
                if (key == "disruption_long_window") m.disruption_long_window = parse_number<int>(k, v);
                else if (key == "disruption_short_window") m.disruption_short_window = parse_number<int>(k, v);
                else if (key == "min_two_step") m.min_two_step = parse_number<int>(k, v);
                else if (key == "citation_horizon") m.citation_horizon = parse_number<int>(k, v);
                else ok = false;
            } else if (section == "regress") {
                if (key == "models") {
                    c.model_files.clear();
                    for (const auto& f : split_list(v)) c.model_files.push_back(path(f));
                } else if (key == "default_models") {
                    c.default_models = parse_bool(k, v);
                } else {
                    ok = false;
                }
            } else if (section == "synth") {
                auto& s = c.synth;
                if (key == "n_papers") s.n_papers = parse_number<int>(k, v);
                else if (key == "n_authors") s.n_authors = parse_number<int>(k, v);
                else if (key == "n_concepts") s.n_concepts = parse_number<int>(k, v);
                else if (key == "n_journals") s.n_journals = parse_number<int>(k, v);
                else if (key == "n_institutions") s.n_institutions = parse_number<int>(k, v);
                else if (key == "year_first") s.year_first = parse_number<int>(k, v);
                else if (key == "year_last") s.year_last = parse_number<int>(k, v);
                else if (key == "D_true") s.D_true = parse_number<int>(k, v);
                else if (key == "female_share") s.female_share = parse_number<double>(k, v);
                else if (key == "unresolved_share") s.unresolved_share = parse_number<double>(k, v);
                else if (key == "multi_author_share") s.multi_author_share = parse_number<double>(k, v);
                else if (key == "cross_proposal_share") s.cross_proposal_share = parse_number<double>(k, v);
                else if (key == "min_set_size") s.min_set_size = parse_number<int>(k, v);
                else if (key == "max_set_size") s.max_set_size = parse_number<int>(k, v);
                else if (key == "beta_female_ctx_surprise") s.beta_female_ctx_surprise = parse_number<double>(k, v);
                else if (key == "beta_female_con_surprise") s.beta_female_con_surprise = parse_number<double>(k, v);
                else if (key == "jif_alpha") s.jif.alpha = parse_number<double>(k, v);
                else if (key == "jif_beta_female") s.jif.beta_female = parse_number<double>(k, v);
                else if (key == "jif_lambda") s.jif.lambda = parse_number<double>(k, v);
                else if (key == "jif_tau") s.jif.tau = parse_number<double>(k, v);
                else if (key == "jif_noise_sd") s.jif.noise_sd = parse_number<double>(k, v);
                else if (key == "mean_references") s.citations.mean_references = parse_number<double>(k, v);
                else if (key == "citation_lambda") s.citations.lambda = parse_number<double>(k, v);
                else if (key == "citation_tau") s.citations.tau = parse_number<double>(k, v);
                else ok = false;
            } else {
                throw ValidationError("unknown config section [" + section + "]");
            }
            if (!ok) throw ValidationError("unknown config key '" + k + "'");
        }
    }
    if (c.threads < 1) throw ValidationError("run.threads must be >= 1");
    if (c.negative_ratio < 1) throw ValidationError("build.negative_ratio must be >= 1");
    if (c.fit.dim < 1) throw ValidationError("fit.dim must be >= 1");
    if (c.score.horizon < 1) throw ValidationError("score.horizon must be >= 1");
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    return parse_run_config(io::read_text_file(path), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

std::string stage_settings(const RunConfig& c, Stage stage) {
    std::ostringstream os;
    switch (stage) {
        case Stage::synth: {
            const auto& s = c.synth;
            os << "seed=" << c.seed << "\nn_papers=" << s.n_papers << "\nn_authors=" << s.n_authors
               << "\nn_concepts=" << s.n_concepts << "\nn_journals=" << s.n_journals
               << "\nn_institutions=" << s.n_institutions << "\nyear_first=" << s.year_first
               << "\nyear_last=" << s.year_last << "\nD_true=" << s.D_true
               << "\nfemale_share=" << fmt(s.female_share) << "\nunresolved_share=" << fmt(s.unresolved_share)
               << "\nmulti_author_share=" << fmt(s.multi_author_share)
               << "\ncross_proposal_share=" << fmt(s.cross_proposal_share) << "\nmin_set_size=" << s.min_set_size
               << "\nmax_set_size=" << s.max_set_size
               << "\nbeta_female_ctx_surprise=" << fmt(s.beta_female_ctx_surprise)
               << "\nbeta_female_con_surprise=" << fmt(s.beta_female_con_surprise)
               << "\njif_alpha=" << fmt(s.jif.alpha) << "\njif_beta_female=" << fmt(s.jif.beta_female)
               << "\njif_lambda=" << fmt(s.jif.lambda) << "\njif_tau=" << fmt(s.jif.tau)
               << "\njif_noise_sd=" << fmt(s.jif.noise_sd)
               << "\nmean_references=" << fmt(s.citations.mean_references)
               << "\ncitation_lambda=" << fmt(s.citations.lambda) << "\ncitation_tau=" << fmt(s.citations.tau)
               << "\n";
            break;
        }
        case Stage::ingest: {
            const auto& g = c.ingest;
            os << "min_name_count=" << g.min_name_count << "\nmin_name_probability=" << fmt(g.min_name_probability)
               << "\nmax_career_age=" << g.max_career_age
               << "\ndepartment_size_includes_focal=" << fmt(g.department_size_includes_focal)
               << "\nwomen_share_inclusive_year=" << fmt(g.women_share_inclusive_year)
               << "\nyear_min=" << fmt_opt(g.year_min, "none") << "\nyear_max=" << fmt_opt(g.year_max, "none")
               << "\nmax_malformed_fraction=" << fmt(g.max_malformed_fraction) << "\n";
            break;
        }
        case Stage::build:
            os << "seed=" << c.seed << "\nchannels=" << channel_list(c.channels)
               << "\nmin_node_freq=" << c.snapshot.min_node_freq << "\nmax_edge_size=" << c.snapshot.max_edge_size
               << "\nhistory_window=" << fmt_opt(c.snapshot.history_window, "all")
               << "\nnegative_ratio=" << c.negative_ratio << "\nfirst_year=" << fmt_opt(c.first_year, "auto")
               << "\nlast_year=" << fmt_opt(c.last_year, "auto") << "\n";
            break;
        case Stage::fit:
            os << "seed=" << c.seed << "\nthreads=" << c.threads << "\ndim=" << c.fit.dim
               << "\nmax_epochs=" << c.fit.max_epochs << "\ntolerance=" << fmt(c.fit.tolerance)
               << "\noptimizer=" << to_string(c.fit.optimizer) << "\ninit_logit_sd=" << fmt(c.fit.init_logit_sd)
               << "\nlbfgs_memory=" << c.fit.lbfgs_memory << "\nbatch_size=" << c.fit.batch_size
               << "\nlearning_rate=" << fmt(c.fit.learning_rate) << "\nwarm_start=" << fmt(c.warm_start) << "\n";
            break;
        case Stage::score: os << "horizon=" << c.score.horizon << "\n"; break;
        case Stage::metrics:
            os << "disruption_long_window=" << c.metrics.disruption_long_window
               << "\ndisruption_short_window=" << c.metrics.disruption_short_window
               << "\nmin_two_step=" << c.metrics.min_two_step << "\ncitation_horizon=" << c.metrics.citation_horizon
               << "\n";
            break;
        case Stage::regress:
        case Stage::report:
            os << "channels=" << channel_list(c.channels) << "\ndefault_models=" << fmt(c.default_models) << "\n";
            for (const auto& f : c.model_files) os << "models:" << io::read_text_file(f) << "\n";
            break;
    }
    return os.str();
}

std::string format_run_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[paths]\ndata_dir = " << c.data_dir.generic_string() << "\n";
    auto p = c.input_paths();
    os << "papers = " << p.papers.generic_string() << "\nauthors = " << p.authors.generic_string()
       << "\ncitations = " << p.citations.generic_string() << "\nnames = " << p.names.generic_string()
       << "\ncache_dir = " << c.cache_dir.generic_string() << "\noutput_dir = " << c.output_dir.generic_string()
       << "\n\n[run]\nseed = " << c.seed << "\nchannels = " << channel_list(c.channels)
       << "\nthreads = " << c.threads << "\n";
    auto section = [&](const char* name, Stage s) {
        os << "\n[" << name << "]\n";
        std::istringstream in(stage_settings(c, s));
        for (std::string line; std::getline(in, line);) {
            auto eq = line.find('=');
            auto key = line.substr(0, eq);
            if (key == "seed" || key == "channels" || key == "threads") continue;
            os << key << " = " << line.substr(eq + 1) << "\n";
        }
    };
    section("ingest", Stage::ingest);
    section("build", Stage::build);
    section("fit", Stage::fit);
    section("score", Stage::score);
    section("metrics", Stage::metrics);
    os << "\n[regress]\nmodels = ";
    for (std::size_t i = 0; i < c.model_files.size(); ++i) os << (i ? ", " : "") << c.model_files[i].generic_string();
    os << "\ndefault_models = " << fmt(c.default_models) << "\n";
    section("synth", Stage::synth);
    return os.str();
}

void apply_environment(RunConfig& cfg) {
    if (const char* dir = std::getenv("NOVSCOPE_CACHE_DIR"); dir != nullptr && *dir != '\0') cfg.cache_dir = dir;
}

Table build_analysis_table(const Corpus& corpus, const CitationGraph& graph, const std::vector<ScoreRow>& scores,
                           const std::vector<MetricsRow>& metrics) {
    const auto& papers = corpus.papers();
    const auto n = papers.size();
    auto num = [&] { return std::vector<double>(n, kNaN); };
    auto opt = [](const auto& v) { return v ? static_cast<double>(*v) : kNaN; };

    std::vector<std::string> paper_id(n), author_id(n), field(n), discipline(n), journal(n), institution(n);
    auto year = num(), n_authors = num(), solo = num(), female = num(), female_share = num(), n_unknown = num(),
         homogeneous = num(), dept_size = num(), career_age = num(), women_field = num(), open_access = num(),
         jif_2y = num(), jif_5y = num(), log_jif_2y = num(), n_grants = num(), past_cites = num(),
         log_past_cites = num();

    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = papers[i];
        paper_id[i] = p.paper_id;
        year[i] = p.year;
        field[i] = p.field_ids_l1.empty() ? "" : p.field_ids_l1.front();
        discipline[i] = p.discipline_ids_l0.empty() ? "" : p.discipline_ids_l0.front();
        journal[i] = p.journal_id;
        institution[i] = p.institution_id.value_or("");
        n_authors[i] = static_cast<double>(p.author_ids.size());
        solo[i] = p.author_ids.size() == 1 ? 1.0 : 0.0;
        open_access[i] = p.open_access ? 1.0 : 0.0;
        jif_2y[i] = opt(p.jif_2y);
        jif_5y[i] = opt(p.jif_5y);
        if (p.jif_2y && *p.jif_2y > 0) log_jif_2y[i] = std::log(*p.jif_2y);
        n_grants[i] = opt(p.n_grants);
        dept_size[i] = opt(corpus.department_size(p));
        auto share = corpus.female_share(p);
        female_share[i] = opt(share.share);
        n_unknown[i] = share.n_unknown;
        if (p.author_ids.size() > 1 && share.share) homogeneous[i] = (*share.share == 0.0 || *share.share == 1.0);
        if (!field[i].empty()) women_field[i] = opt(corpus.women_field_share(field[i], p.year));
        if (p.author_ids.empty()) continue;
        author_id[i] = p.author_ids.front();
        if (const auto* a = corpus.find_author(author_id[i])) {
            if (a->resolved_gender != Gender::unknown) female[i] = a->resolved_gender == Gender::female;
            career_age[i] = opt(compute_career_age(*a, p.year, corpus.config()));
            past_cites[i] = static_cast<double>(past_citations(graph, corpus, *a, p.year));
            log_past_cites[i] = std::log1p(past_cites[i]);
        }
    }

    Table t;
    t.add_string("paper_id", std::move(paper_id));
    t.add_string("author_id", std::move(author_id));
    t.add_numeric("year", std::move(year));
    t.add_string("field", std::move(field));
    t.add_string("discipline", std::move(discipline));
    t.add_string("journal_id", std::move(journal));
    t.add_string("institution_id", std::move(institution));
    t.add_numeric("n_authors", std::move(n_authors));
    t.add_numeric("solo", std::move(solo));
    t.add_numeric("female", std::move(female));
    t.add_numeric("female_share", std::move(female_share));
    t.add_numeric("n_gender_unknown", std::move(n_unknown));
    t.add_numeric("homogeneous_team", std::move(homogeneous));
    t.add_numeric("dept_size", std::move(dept_size));
    t.add_numeric("career_age", std::move(career_age));
    t.add_numeric("women_field_share", std::move(women_field));
    t.add_numeric("open_access", std::move(open_access));
    t.add_numeric("jif_2y", std::move(jif_2y));
    t.add_numeric("jif_5y", std::move(jif_5y));
    t.add_numeric("log_jif_2y", std::move(log_jif_2y));
    t.add_numeric("n_grants", std::move(n_grants));
    t.add_numeric("past_citations", std::move(past_cites));
    t.add_numeric("log_past_citations", std::move(log_past_cites));

    std::set<Channel> channels;
    for (const auto& s : scores) channels.insert(s.channel);
    for (Channel ch : channels) {
        std::unordered_map<std::string, const ScoreRow*> by_id;
        for (const auto& s : scores)
            if (s.channel == ch) by_id.emplace(s.paper_id, &s);
        auto pct_s = num(), pct_p = num(), raw_s = num(), raw_p = num();
        for (std::size_t i = 0; i < n; ++i) {
            auto it = by_id.find(papers[i].paper_id);
            if (it == by_id.end()) continue;
            pct_s[i] = opt(it->second->pct_surprise);
            pct_p[i] = opt(it->second->pct_prescience);
            raw_s[i] = opt(it->second->raw_surprise_t0);
            raw_p[i] = opt(it->second->raw_prescience);
        }
        auto sx = suffix(ch);
        t.add_numeric("surprise_" + sx, std::move(pct_s));
        t.add_numeric("prescience_" + sx, std::move(pct_p));
        t.add_numeric("raw_surprise_" + sx, std::move(raw_s));
        t.add_numeric("raw_prescience_" + sx, std::move(raw_p));
    }

    if (!metrics.empty()) {
        std::unordered_map<std::string, const MetricsRow*> by_id;
        for (const auto& m : metrics) by_id.emplace(m.paper_id, &m);
        auto d5 = num(), d3 = num(), credit = num(), outside = num(), cites = num(), log_cites = num();
        for (std::size_t i = 0; i < n; ++i) {
            auto it = by_id.find(papers[i].paper_id);
            if (it == by_id.end()) continue;
            const auto& m = *it->second;
            d5[i] = opt(m.disruption_5y);
            d3[i] = opt(m.disruption_3y);
            credit[i] = opt(m.two_step_credit);
            outside[i] = opt(m.outside_subject_share);
            cites[i] = static_cast<double>(m.cites_2y);
            log_cites[i] = std::log1p(cites[i]);
        }
        t.add_numeric("disruption_5y", std::move(d5));
        t.add_numeric("disruption_3y", std::move(d3));
        t.add_numeric("two_step_credit", std::move(credit));
        t.add_numeric("outside_share", std::move(outside));
        t.add_numeric("cites_2y", std::move(cites));
        t.add_numeric("log_cites_2y", std::move(log_cites));
    }
    return t;
}

std::vector<ModelSpec> default_model_specs(const std::vector<Channel>& channels) {
    std::string ini;
    const std::string controls = "C(year, base=2020), dept_size, career_age, C(field)";
    for (Channel ch : channels) {
        auto s = suffix(ch);
        for (const char* measure : {"surprise", "prescience"}) {
            std::string m = std::string(measure) + "_" + s;
            ini += "[model:" + m + "]\noutcome = " + m + "\nterms = female, " + controls +
                   "\nfilter = n_authors == 1\ncluster = author_id\n\n";
        }
        for (const char* outcome : {"disruption_5y", "two_step_credit", "jif_2y"}) {
            std::string x = "surprise_" + s;
            ini += "[model:" + std::string(outcome) + "_" + s + "]\noutcome = " + outcome + "\nterms = female, " + x +
                   ", female\xC3\x97" + x + ", " + controls + "\nfilter = n_authors == 1\ncluster = author_id\n\n";
        }
        std::string m = "surprise_" + s;
        ini += "[model:team_" + m + "]\noutcome = " + m + "\nterms = female_share, C(year, base=2020), C(field)" +
               "\nfilter = n_authors > 1\nse = heteroskedastic\n\n";
    }
    return parse_model_specs(ini);
}

std::vector<std::shared_ptr<const EmbeddingModel>> fit_channel(const Corpus& corpus, Channel channel,
                                                               const RunConfig& cfg) {
    auto [lo, hi] = corpus.year_range();
    int first = cfg.first_year.value_or(lo);
    int last = cfg.last_year.value_or(hi);
    auto vocab = std::make_shared<const NodeVocab>(build_vocab(corpus, channel, cfg.snapshot));
    auto snaps = build_snapshots(corpus, channel, first, last, cfg.snapshot, vocab);
    std::vector<std::shared_ptr<const EmbeddingModel>> out;
    for (const auto& snap : snaps) {
        if (snap.empty()) continue;
        auto seed = mix_seed(cfg.seed, channel, snap.year);
        auto negatives = draw_negatives(snap, cfg.negative_ratio, seed);
        FitConfig fc = cfg.fit;
        fc.seed = seed;
        fc.threads = cfg.threads;
        const EmbeddingModel* warm = cfg.warm_start && !out.empty() ? out.back().get() : nullptr;
        out.push_back(std::make_shared<const EmbeddingModel>(fit(snap, negatives, fc, warm)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(RunConfig cfg, bool force) : cfg_(std::move(cfg)), force_(force) {
    cfg_.score.nodes = cfg_.snapshot;
    cfg_.fit.threads = cfg_.threads;
}

fs::path Pipeline::stamp_path(Stage stage) const {
    return cfg_.cache_dir / "stamps" / (std::string(to_string(stage)) + ".json");
}

std::string Pipeline::expected_hash(Stage stage) const {
    std::string material = std::string(to_string(stage)) + "\n" + stage_settings(cfg_, stage);
    if (stage == Stage::ingest) {
        auto path = stamp_path(Stage::ingest);
        if (!fs::exists(path)) throw ValidationError("missing outputs of stage 'ingest'; run `novscope ingest` first");
        material += read_json(path).at("inputs_hash").get<std::string>();
    }
    for (Stage p : predecessors(stage)) material += expected_hash(p);
    return io::sha256_hex(material);
}

void Pipeline::require(Stage stage) const {
    auto path = stamp_path(stage);
    if (!fs::exists(path)) {
        auto name = std::string(to_string(stage));
        throw ValidationError("missing outputs of stage '" + name + "'; run `novscope " + name + "` first");
    }
    auto recorded = read_json(path).at("hash").get<std::string>();
    if (!force_ && recorded != expected_hash(stage))
        throw StaleCacheError("cached outputs of stage '" + std::string(to_string(stage)) +
                              "' were produced under a different configuration; rerun it or pass --force");
}

Corpus Pipeline::load_corpus() const {
    auto dir = cfg_.cache_dir / "corpus";
    return ingest_corpus({dir / "papers.jsonl", dir / "authors.jsonl", dir / "citations.jsonl", dir / "names.tsv"},
                         cfg_.ingest);
}

void Pipeline::finish(StageResult& result, const std::vector<std::string>& inputs) {
    json stamp;
    stamp["stage"] = to_string(result.stage);
    stamp["hash"] = result.config_hash;
    json outputs = json::object();
    for (const auto& o : result.outputs) outputs[o.generic_string()] = io::sha256_file(o);
    stamp["outputs"] = outputs;
    if (result.stage == Stage::ingest) stamp["inputs_hash"] = inputs.front();
    if (result.stage != Stage::synth) io::write_text_file(stamp_path(result.stage), stamp.dump(2) + "\n");

    json line;
    line["stage"] = to_string(result.stage);
    line["config_hash"] = result.config_hash;
    line["inputs"] = inputs;
    line["outputs"] = outputs;
    line["wall_seconds"] = result.wall_seconds;
    line["version"] = "0.1.0";
    fs::create_directories(cfg_.output_dir);
    std::ofstream out(cfg_.output_dir / "manifest.jsonl", std::ios::app);
    out << line.dump() << "\n";
}

StageResult Pipeline::run(Stage stage) {
    auto start = std::chrono::steady_clock::now();
    StageResult r;
    switch (stage) {
        case Stage::synth: r = run_synth(); break;
        case Stage::ingest: r = run_ingest(); break;
        case Stage::build: r = run_build(); break;
        case Stage::fit: r = run_fit(); break;
        case Stage::score: r = run_score(); break;
        case Stage::metrics: r = run_metrics(); break;
        case Stage::regress: r = run_regress(false); break;
        case Stage::report: r = run_regress(true); break;
    }
    r.stage = stage;
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::vector<std::string> inputs;
    if (stage == Stage::ingest) {
        auto paths = cfg_.input_paths();
        std::string combined;
        for (const auto& p : {paths.papers, paths.authors, paths.citations, paths.names})
            combined += io::sha256_file(p);
        inputs.push_back(io::sha256_hex(combined));
    }
    for (Stage p : predecessors(stage)) {
        auto path = stamp_path(p);
        inputs.push_back(std::string(to_string(p)) + ":" + read_json(path).at("hash").get<std::string>());
    }
    if (stage == Stage::ingest) {
        r.config_hash = io::sha256_hex("ingest\n" + stage_settings(cfg_, Stage::ingest) + inputs.front());
    } else if (stage == Stage::synth) {
        r.config_hash = io::sha256_hex("synth\n" + stage_settings(cfg_, Stage::synth));
    } else {
        std::string material = std::string(to_string(stage)) + "\n" + stage_settings(cfg_, stage);
        for (Stage p : predecessors(stage)) material += read_json(stamp_path(p)).at("hash").get<std::string>();
        r.config_hash = io::sha256_hex(material);
    }
    finish(r, inputs);
    return r;
}

StageResult Pipeline::run_synth() {
    auto sc = cfg_.synth;
    sc.seed = cfg_.seed;
    auto corpus = generate(sc);
    write_synth_corpus(corpus, cfg_.data_dir);
    StageResult r;
    for (const char* f : {"papers.jsonl", "authors.jsonl", "citations.jsonl", "names.tsv", "truth.json"})
        r.outputs.push_back(cfg_.data_dir / f);
    return r;
}

StageResult Pipeline::run_ingest() {
    auto corpus = ingest_corpus(cfg_.input_paths(), cfg_.ingest);
    auto dir = cfg_.cache_dir / "corpus";
    std::string papers, authors, citations, names = "name\tgender\tprobability\tcount\n";
    for (const auto& p : corpus.papers()) papers += format_paper_line(p) + "\n";
    for (const auto& a : corpus.authors()) authors += format_author_line(a) + "\n";
    for (const auto& c : corpus.citations()) citations += format_citation_line(c) + "\n";
    for (const auto& n : corpus.names().rows()) names += format_name_line(n) + "\n";
    StageResult r;
    const std::pair<const char*, const std::string*> files[] = {
        {"papers.jsonl", &papers}, {"authors.jsonl", &authors}, {"citations.jsonl", &citations}, {"names.tsv", &names}};
    for (const auto& [name, text] : files) {
        io::write_text_file(dir / name, *text);
        r.outputs.push_back(dir / name);
    }
    const auto& rep = corpus.report();
    std::ostringstream os;
    os << "lines_read\t" << rep.lines_read << "\nmalformed\t" << rep.malformed << "\nduplicates\t" << rep.duplicates
       << "\nself_citations\t" << rep.self_citations << "\nout_of_range\t" << rep.out_of_range << "\n";
    for (const auto& w : rep.warnings) os << "warning\t" << w << "\n";
    io::write_text_file(dir / "ingest_report.tsv", os.str());
    r.outputs.push_back(dir / "ingest_report.tsv");
    r.warnings = rep.warnings;
    return r;
}

StageResult Pipeline::run_build() {
    require(Stage::ingest);
    auto corpus = load_corpus();
    auto corpus_hash = read_json(stamp_path(Stage::ingest)).at("hash").get<std::string>();
    std::string material = "build\n" + stage_settings(cfg_, Stage::build) + corpus_hash;
    auto config_hash = io::sha256_hex(material);
    auto [lo, hi] = corpus.year_range();
    int first = cfg_.first_year.value_or(lo);
    int last = cfg_.last_year.value_or(hi);
    StageResult r;
    for (Channel ch : cfg_.channels) {
        auto vocab = std::make_shared<const NodeVocab>(build_vocab(corpus, ch, cfg_.snapshot));
        for (const auto& snap : build_snapshots(corpus, ch, first, last, cfg_.snapshot, vocab)) {
            if (snap.empty()) {
                r.warnings.push_back(std::string(to_string(ch)) + " snapshot " + std::to_string(snap.year) +
                                     " is empty; no model will be fit");
                continue;
            }
            auto negatives = draw_negatives(snap, cfg_.negative_ratio, mix_seed(cfg_.seed, ch, snap.year));
            auto path = snapshot_file(cfg_.cache_dir, ch, snap.year);
            fs::create_directories(path.parent_path());
            save_snapshot(path, {corpus_hash, ch, snap.year, config_hash}, snap, negatives);
            r.outputs.push_back(path);
        }
    }
    return r;
}

StageResult Pipeline::run_fit() {
    require(Stage::build);
    auto stamp = read_json(stamp_path(Stage::build));
    StageResult r;
    for (Channel ch : cfg_.channels) {
        std::shared_ptr<const EmbeddingModel> prev;
        for (const auto& [file, sha] : stamp.at("outputs").items()) {
            fs::path path(file);
            if (path.filename().string().rfind(std::string(to_string(ch)) + "_", 0) != 0) continue;
            auto loaded = load_snapshot(path);
            FitConfig fc = cfg_.fit;
            fc.seed = mix_seed(cfg_.seed, ch, loaded.snapshot.year);
            const EmbeddingModel* warm = cfg_.warm_start && prev ? prev.get() : nullptr;
            auto model = std::make_shared<const EmbeddingModel>(fit(loaded.snapshot, loaded.negatives, fc, warm));
            if (!model->diagnostics().converged)
                r.warnings.push_back(std::string(to_string(ch)) + " " + std::to_string(model->year()) +
                                     ": stopped at max_epochs before reaching the tolerance");
            auto out = model_file(cfg_.cache_dir, ch, model->year());
            fs::create_directories(out.parent_path());
            save_checkpoint(out, *model);
            auto txt = out;
            txt.replace_extension(".txt");
            io::write_text_file(txt, export_text(*model));
            r.outputs.push_back(out);
            r.outputs.push_back(txt);
            prev = model;
        }
    }
    return r;
}

StageResult Pipeline::run_score() {
    require(Stage::fit);
    auto corpus = load_corpus();
    auto stamp = read_json(stamp_path(Stage::fit));
    ModelSet models;
    for (const auto& [file, sha] : stamp.at("outputs").items()) {
        fs::path path(file);
        if (path.extension() != ".ckpt") continue;
        models.add(std::make_shared<const EmbeddingModel>(load_checkpoint(path)));
    }
    auto rows = score_corpus(corpus, models, cfg_.channels, cfg_.score);
    StageResult r;
    auto out = cfg_.output_dir / "scores.csv";
    io::write_text_file(out, format_scores_csv(rows));
    r.outputs.push_back(out);
    return r;
}

StageResult Pipeline::run_metrics() {
    require(Stage::ingest);
    auto corpus = load_corpus();
    CitationGraph graph(corpus);
    auto rows = compute_metrics(corpus, graph, cfg_.metrics);
    StageResult r;
    auto out = cfg_.output_dir / "metrics.csv";
    io::write_text_file(out, format_metrics_csv(rows));
    r.outputs.push_back(out);
    return r;
}

StageResult Pipeline::run_regress(bool full_report) {
    require(Stage::score);
    require(Stage::metrics);
    auto corpus = load_corpus();
    CitationGraph graph(corpus);
    auto scores = parse_scores_csv(io::read_text_file(cfg_.output_dir / "scores.csv"));
    auto metrics = parse_metrics_csv(io::read_text_file(cfg_.output_dir / "metrics.csv"));
    auto table = build_analysis_table(corpus, graph, scores, metrics);

    StageResult r;
    auto analysis = cfg_.output_dir / "analysis.csv";
    io::write_text_file(analysis, table.to_csv());
    r.outputs.push_back(analysis);

    std::vector<std::pair<ModelSpec, bool>> specs;
    if (cfg_.default_models)
        for (auto& s : default_model_specs(cfg_.channels)) specs.emplace_back(std::move(s), true);
    for (const auto& f : cfg_.model_files)
        for (auto& s : load_model_specs(f)) specs.emplace_back(std::move(s), false);
    if (specs.empty()) throw ValidationError("no regression models configured");

    auto dir = cfg_.output_dir / "reports";
    std::string summary;
    for (const auto& [spec, builtin] : specs) {
        RegressionResult res;
        try {
            if (builtin && !spec_columns_available(spec, table)) continue;
            res = run_model(table, spec);
        } catch (const ValidationError& e) {
            if (!builtin) throw;
            r.warnings.push_back("model " + spec.name + " skipped: " + e.what());
            continue;
        }
        for (const auto& w : res.warnings) r.warnings.push_back("model " + spec.name + ": " + w);
        auto csv_path = dir / (spec.name + ".csv");
        io::write_text_file(csv_path, format_report_csv(res));
        r.outputs.push_back(csv_path);
        if (!full_report) continue;

        auto text = format_report_text(res);
        summary += "[" + spec.name + "]\n" + text + "\n";
        auto txt_path = dir / (spec.name + ".txt");
        io::write_text_file(txt_path, text);
        r.outputs.push_back(txt_path);

        const std::string times = "female\xC3\x97";
        for (const auto& name : res.names) {
            if (name.rfind(times, 0) != 0) continue;
            auto other = name.substr(times.size());
            if (!table.has(other) || table.column(other).is_string) continue;
            std::vector<std::string> warns;
            auto points = margins(res, table, {{"female", {0.0, 1.0}}, {other, {0.0, 0.25, 0.5, 0.75, 1.0}}}, &warns);
            for (const auto& w : warns) r.warnings.push_back("model " + spec.name + ": " + w);
            auto m_path = dir / (spec.name + "_margins.csv");
            io::write_text_file(m_path, format_margins_csv(points));
            r.outputs.push_back(m_path);
        }
    }
    if (full_report) {
        auto path = cfg_.output_dir / "report.txt";
        io::write_text_file(path, summary);
        r.outputs.push_back(path);
    }
    return r;
}

}  // namespace novscope
