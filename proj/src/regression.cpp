#include "novscope/regression.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "novscope/csv.hpp"
#include "novscope/error.hpp"
#include "novscope/io.hpp"

namespace novscope {

namespace {

constexpr std::string_view kTimes = "\xC3\x97";  // U+00D7

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Splits on `sep` outside parentheses.
std::vector<std::string> split_top_level(std::string_view s, std::string_view sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        if (s[i] == ')') --depth;
        if (depth == 0 && s.substr(i, sep.size()) == sep) {
            out.emplace_back(trim(s.substr(start, i - start)));
            start = i + sep.size();
            i += sep.size() - 1;
        }
    }
    out.emplace_back(trim(s.substr(start)));
    return out;
}

std::string level_string(const Table::Column& c, std::size_t row) {
    if (c.is_string) return c.str[row];
    double v = c.num[row];
    if (std::abs(v) < 1e15 && v == std::floor(v)) return std::to_string(static_cast<long long>(v));
    return io::format_double(v);
}

bool level_less(const std::string& a, const std::string& b, bool numeric) {
    if (numeric) return std::stod(a) < std::stod(b);
    return a < b;
}

std::string factor_name(const Factor& f) {
    switch (f.kind) {
        case Factor::Kind::squared: return f.column + "^2";
        default: return f.column;
    }
}

bool row_passes(const Table& table, const Condition& c, std::size_t row) {
    const auto& col = table.column(c.column);
    if (col.missing(row)) return false;
    int cmp = 0;
    if (col.is_string) {
        cmp = col.str[row].compare(c.value);
    } else {
        double rhs = std::stod(c.value);
        double lhs = col.num[row];
        cmp = lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
    }
    if (c.op == ">=") return cmp >= 0;
    if (c.op == "<=") return cmp <= 0;
    if (c.op == ">") return cmp > 0;
    if (c.op == "<") return cmp < 0;
    if (c.op == "==") return cmp == 0;
    return cmp != 0;
}

double normal_two_sided_p(double t) { return std::erfc(std::abs(t) / std::sqrt(2.0)); }

}  // namespace

// ---------------------------------------------------------------------------
// Table

bool Table::has(std::string_view name) const { return index_.find(name) != index_.end(); }

const Table::Column& Table::column(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown column '" + std::string(name) + "'");
    return columns_[it->second];
}

void Table::check_rows(std::size_t n, const std::string& name) {
    if (has(name)) throw ValidationError("duplicate column '" + name + "'");
    if (sized_ && n != rows_) throw ValidationError("column '" + name + "' has the wrong length");
    rows_ = n;
    sized_ = true;
}

void Table::add_numeric(std::string name, std::vector<double> values) {
    check_rows(values.size(), name);
    index_.emplace(name, columns_.size());
    columns_.push_back({std::move(name), false, std::move(values), {}});
}

void Table::add_string(std::string name, std::vector<std::string> values) {
    check_rows(values.size(), name);
    index_.emplace(name, columns_.size());
    columns_.push_back({std::move(name), true, {}, std::move(values)});
}

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (c) out += ',';
        out += csv::escape(columns_[c].name);
    }
    out += '\n';
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            if (c) out += ',';
            const auto& col = columns_[c];
            if (col.is_string) {
                out += csv::escape(col.str[r]);
            } else if (!std::isnan(col.num[r])) {
                out += io::format_double(col.num[r]);
            }
        }
        out += '\n';
    }
    return out;
}

Table Table::from_csv(const std::string& text) {
    auto rows = csv::parse(text);
    if (rows.empty()) throw ValidationError("empty table");
    const auto& header = rows.front();
    Table t;
    for (std::size_t c = 0; c < header.size(); ++c) {
        bool numeric = true;
        std::vector<double> num;
        std::vector<std::string> str;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r].size() != header.size())
                throw ValidationError("table row " + std::to_string(r) + " has wrong width");
            const auto& cell = rows[r][c];
            str.push_back(cell);
            if (!numeric) continue;
            try {
                auto v = csv::to_optional_double(cell);
                num.push_back(v.value_or(std::numeric_limits<double>::quiet_NaN()));
            } catch (const ValidationError&) {
                numeric = false;
            }
        }
        if (numeric) {
            t.add_numeric(header[c], std::move(num));
        } else {
            t.add_string(header[c], std::move(str));
        }
    }
    if (header.empty()) t.rows_ = 0;
    return t;
}

// ---------------------------------------------------------------------------
// Spec parsing

Term parse_term(std::string_view text) {
    auto s = std::string(trim(text));
    for (auto sep : {std::string(kTimes), std::string(":")}) {
        for (std::size_t p; (p = s.find(sep)) != std::string::npos;) s.replace(p, sep.size(), "*");
    }
    Term term;
    for (const auto& part : split_top_level(s, "*")) {
        Factor f;
        std::string_view p = part;
        if (p.empty()) throw ValidationError("empty factor in term '" + std::string(text) + "'");
        if (p.substr(0, 2) == "C(" && p.back() == ')') {
            f.kind = Factor::Kind::categorical;
            auto inner = p.substr(2, p.size() - 3);
            auto args = split_top_level(inner, ",");
            f.column = args.at(0);
            for (std::size_t i = 1; i < args.size(); ++i) {
                std::string_view a = args[i];
                if (a.substr(0, 5) != "base=")
                    throw ValidationError("unsupported categorical option '" + args[i] + "'");
                f.baseline = std::string(trim(a.substr(5)));
            }
        } else if (p.size() > 2 && p.substr(p.size() - 2) == "^2") {
            f.kind = Factor::Kind::squared;
            f.column = std::string(trim(p.substr(0, p.size() - 2)));
        } else {
            f.column = std::string(p);
        }
        if (f.column.empty()) throw ValidationError("empty column in term '" + std::string(text) + "'");
        term.factors.push_back(std::move(f));
    }
    if (term.factors.size() > 3) throw ValidationError("interactions support at most three factors");
    return term;
}

std::vector<Condition> parse_filter(std::string_view text) {
    std::vector<Condition> out;
    std::string s(trim(text));
    if (s.empty()) return out;
    for (std::size_t p; (p = s.find(" and ")) != std::string::npos;) s.replace(p, 5, "&&");
    for (const auto& clause : split_top_level(s, "&&")) {
        Condition c;
        bool found = false;
        for (std::string op : {">=", "<=", "==", "!=", ">", "<"}) {
            auto p = clause.find(op);
            if (p == std::string::npos) continue;
            c.column = std::string(trim(std::string_view(clause).substr(0, p)));
            c.op = op;
            c.value = std::string(trim(std::string_view(clause).substr(p + op.size())));
            found = true;
            break;
        }
        if (!found || c.column.empty() || c.value.empty())
            throw ValidationError("cannot parse filter clause '" + clause + "'");
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<ModelSpec> parse_model_specs(const std::string& ini_text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(ini_text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError(std::string("invalid model spec file: ") + e.what());
    }
    std::vector<ModelSpec> out;
    for (const auto& [section, body] : tree) {
        if (section.rfind("model:", 0) != 0) continue;
        ModelSpec spec;
        spec.name = section.substr(6);
        spec.outcome = body.get<std::string>(pt::ptree::path_type("outcome", '\0'), "");
        if (spec.outcome.empty()) throw ValidationError("model " + spec.name + " has no outcome");
        auto get = [&](const char* key) { return body.get<std::string>(pt::ptree::path_type(key, '\0'), ""); };
        for (const auto& t : split_top_level(get("terms"), ","))
            if (!t.empty()) spec.terms.push_back(parse_term(t));
        spec.filter = parse_filter(get("filter"));
        auto cluster = get("cluster");
        if (!cluster.empty()) spec.cluster_col = cluster;
        auto se = get("se");
        if (se.empty() || se == "clustered") {
            spec.se_type = SeType::clustered;
        } else if (se == "heteroskedastic" || se == "hc1" || se == "white") {
            spec.se_type = SeType::heteroskedastic;
        } else {
            throw ValidationError("model " + spec.name + ": unknown se type '" + se + "'");
        }
        if (spec.se_type == SeType::clustered && !spec.cluster_col)
            throw ValidationError("model " + spec.name + ": clustered errors need a cluster column");
        auto ss = get("small_sample");
        spec.small_sample_correction = !(ss == "false" || ss == "0" || ss == "no");
        out.push_back(std::move(spec));
    }
    return out;
}

std::vector<ModelSpec> load_model_specs(const std::filesystem::path& path) {
    return parse_model_specs(io::read_text_file(path));
}

// ---------------------------------------------------------------------------
// Design

Eigen::MatrixXd apply_plan(const ExpansionPlan& plan, const Table& table,
                           const std::vector<std::size_t>& rows,
                           const std::map<std::string, double>& overrides) {
    std::size_t k = 1;
    for (const auto& term : plan.terms) {
        std::size_t width = 1;
        for (const auto& pf : term)
            width *= pf.factor.kind == Factor::Kind::categorical ? pf.levels.size() : 1;
        k += width;
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k));
    std::vector<double> acc, next;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto row = rows[r];
        Eigen::Index col = 0;
        X(static_cast<Eigen::Index>(r), col++) = 1.0;
        for (const auto& term : plan.terms) {
            acc.assign(1, 1.0);
            for (const auto& pf : term) {
                const auto& f = pf.factor;
                const auto& c = table.column(f.column);
                auto ov = overrides.find(f.column);
                next.clear();
                if (f.kind == Factor::Kind::categorical) {
                    std::string level;
                    if (ov != overrides.end()) {
                        Table::Column tmp{f.column, false, {ov->second}, {}};
                        level = level_string(tmp, 0);
                    } else {
                        level = level_string(c, row);
                    }
                    for (double a : acc)
                        for (const auto& l : pf.levels) next.push_back(l == level ? a : 0.0);
                } else {
                    double v = ov != overrides.end() ? ov->second : c.num[row];
                    if (f.kind == Factor::Kind::squared) v *= v;
                    for (double a : acc) next.push_back(a * v);
                }
                acc.swap(next);
            }
            for (double a : acc) X(static_cast<Eigen::Index>(r), col++) = a;
        }
    }
    return X;
}

Design build_design(const Table& table, const ModelSpec& spec) {
    std::vector<std::string> required{spec.outcome};
    for (const auto& t : spec.terms)
        for (const auto& f : t.factors) {
            required.push_back(f.column);
            if (f.kind != Factor::Kind::categorical && table.has(f.column) && table.column(f.column).is_string)
                throw ValidationError("column '" + f.column + "' is not numeric; use C(" + f.column + ")");
        }
    if (spec.cluster_col) required.push_back(*spec.cluster_col);
    for (const auto& name : required) (void)table.column(name);
    for (const auto& c : spec.filter) (void)table.column(c.column);
    if (table.column(spec.outcome).is_string)
        throw ValidationError("outcome '" + spec.outcome + "' is not numeric");

    Design d;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        bool keep = std::all_of(spec.filter.begin(), spec.filter.end(),
                                [&](const Condition& c) { return row_passes(table, c, r); });
        keep = keep && std::none_of(required.begin(), required.end(),
                                    [&](const std::string& n) { return table.column(n).missing(r); });
        if (keep) d.rows.push_back(r);
    }
    if (d.rows.empty()) throw ValidationError("model " + spec.name + ": empty sample after filtering");

    d.names.push_back("intercept");
    for (const auto& term : spec.terms) {
        std::vector<ExpansionPlan::PlannedFactor> planned;
        std::vector<std::string> names{""};
        for (const auto& f : term.factors) {
            ExpansionPlan::PlannedFactor pf{f, {}};
            std::vector<std::string> next;
            if (f.kind == Factor::Kind::categorical) {
                const auto& c = table.column(f.column);
                std::set<std::string> seen;
                for (auto r : d.rows) seen.insert(level_string(c, r));
                std::vector<std::string> levels(seen.begin(), seen.end());
                bool numeric = !c.is_string;
                std::sort(levels.begin(), levels.end(),
                          [&](const auto& a, const auto& b) { return level_less(a, b, numeric); });
                std::string base = levels.front();
                if (f.baseline) {
                    if (seen.contains(*f.baseline)) {
                        base = *f.baseline;
                    } else {
                        d.warnings.push_back("baseline '" + *f.baseline + "' not observed for " + f.column +
                                             "; using '" + base + "'");
                    }
                }
                for (const auto& l : levels)
                    if (l != base) pf.levels.push_back(l);
                for (const auto& n : names)
                    for (const auto& l : pf.levels)
                        next.push_back(n + (n.empty() ? "" : std::string(kTimes)) + f.column + "_" + l);
            } else {
                for (const auto& n : names) next.push_back(n + (n.empty() ? "" : std::string(kTimes)) + factor_name(f));
            }
            names.swap(next);
            planned.push_back(std::move(pf));
        }
        d.plan.terms.push_back(std::move(planned));
        d.names.insert(d.names.end(), names.begin(), names.end());
    }
    {
        std::set<std::string> uniq(d.names.begin(), d.names.end());
        if (uniq.size() != d.names.size()) throw ValidationError("model " + spec.name + ": duplicate design columns");
    }

    d.X = apply_plan(d.plan, table, d.rows);
    d.y.resize(static_cast<Eigen::Index>(d.rows.size()));
    const auto& yc = table.column(spec.outcome);
    for (std::size_t i = 0; i < d.rows.size(); ++i) d.y(static_cast<Eigen::Index>(i)) = yc.num[d.rows[i]];
    if (spec.cluster_col) {
        const auto& cc = table.column(*spec.cluster_col);
        for (auto r : d.rows) d.clusters.push_back(level_string(cc, r));
    }

    const auto k = d.X.cols();
    if (d.X.rows() <= k)
        throw ValidationError("model " + spec.name + ": " + std::to_string(d.X.rows()) +
                              " observations for " + std::to_string(k) + " columns");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        std::string cols;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < k; ++j)
            cols += (cols.empty() ? "" : ", ") + d.names[static_cast<std::size_t>(perm(j))];
        throw ValidationError("model " + spec.name + ": rank-deficient design; collinear columns: " + cols);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Estimation

OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw ValidationError("design and outcome sizes differ");
    if (X.rows() < X.cols()) throw ValidationError("fewer observations than columns");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) throw ValidationError("rank-deficient design");
    OlsFit out;
    out.coef = qr.solve(y);
    out.residuals = y - X * out.coef;
    return out;
}

Eigen::MatrixXd bread(const Eigen::MatrixXd& X) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const auto k = X.cols();
    Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    return Rinv * Rinv.transpose();
}

Eigen::MatrixXd robust_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                           const std::vector<std::string>* clusters, bool small_sample_correction) {
    const auto n = static_cast<double>(X.rows());
    const auto k = static_cast<double>(X.cols());
    Eigen::MatrixXd B = bread(X);
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(X.cols(), X.cols());
    double factor = 1.0;
    if (clusters != nullptr) {
        if (clusters->size() != static_cast<std::size_t>(X.rows()))
            throw ValidationError("cluster ids do not match the design rows");
        std::unordered_map<std::string, Eigen::Index> ids;
        std::vector<std::string> order;
        for (const auto& c : *clusters)
            if (ids.emplace(c, static_cast<Eigen::Index>(ids.size())).second) order.push_back(c);
        const auto G = static_cast<Eigen::Index>(ids.size());
        if (G < 2) throw ValidationError("clustered covariance needs at least two clusters");
        Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(G, X.cols());
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            scores.row(ids.at((*clusters)[static_cast<std::size_t>(i)])) += residuals(i) * X.row(i);
        meat = scores.transpose() * scores;
        if (small_sample_correction) {
            auto g = static_cast<double>(G);
            factor = g / (g - 1.0) * (n - 1.0) / (n - k);
        }
    } else {
        Eigen::MatrixXd weighted = X.array().colwise() * residuals.array();
        meat = weighted.transpose() * weighted;
        if (small_sample_correction) factor = n / (n - k);
    }
    Eigen::MatrixXd V = factor * B * meat * B;
    return 0.5 * (V + V.transpose());
}

Eigen::MatrixXd classical_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals) {
    double sigma2 = residuals.squaredNorm() / static_cast<double>(X.rows() - X.cols());
    return sigma2 * bread(X);
}

std::optional<std::size_t> RegressionResult::index_of(std::string_view term) const {
    auto it = std::find(names.begin(), names.end(), term);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

RegressionResult run_model(const Table& table, const ModelSpec& spec) {
    auto d = build_design(table, spec);
    auto ols = fit_ols(d.X, d.y);
    RegressionResult r;
    r.model = spec.name;
    r.outcome = spec.outcome;
    r.names = d.names;
    r.coef = ols.coef;
    r.se_type = spec.se_type;
    bool clustered = spec.se_type == SeType::clustered && !d.clusters.empty();
    r.cov = robust_cov(d.X, ols.residuals, clustered ? &d.clusters : nullptr, spec.small_sample_correction);
    r.se = r.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    r.t_stats = r.coef.cwiseQuotient(r.se);
    r.p_values = r.t_stats.unaryExpr([](double t) { return normal_two_sided_p(t); });
    r.n_obs = d.rows.size();
    r.n_clusters = clustered ? std::set<std::string>(d.clusters.begin(), d.clusters.end()).size() : 0;
    double mean = d.y.mean();
    double tss = (d.y.array() - mean).square().sum();
    r.r_squared = tss > 0 ? 1.0 - ols.residuals.squaredNorm() / tss : 0.0;
    r.plan = std::move(d.plan);
    r.rows = std::move(d.rows);
    r.warnings = std::move(d.warnings);
    return r;
}

std::vector<MarginPoint> margins(const RegressionResult& result, const Table& table,
                                 const std::map<std::string, std::vector<double>>& grid,
                                 std::vector<std::string>* warnings) {
    std::set<std::string> used;
    for (const auto& term : result.plan.terms)
        for (const auto& pf : term) used.insert(pf.factor.column);
    for (const auto& [col, values] : grid) {
        if (!used.contains(col)) throw ValidationError("margins variable '" + col + "' is not in the model");
        if (warnings == nullptr) continue;
        const auto& c = table.column(col);
        if (c.is_string) continue;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (auto r : result.rows) {
            lo = std::min(lo, c.num[r]);
            hi = std::max(hi, c.num[r]);
        }
        for (double v : values)
            if (v < lo || v > hi)
                warnings->push_back("margins value " + io::format_double(v) + " for " + col +
                                    " is outside the observed range");
    }

    std::vector<std::map<std::string, double>> points{{}};
    for (const auto& [col, values] : grid) {
        std::vector<std::map<std::string, double>> next;
        for (const auto& p : points)
            for (double v : values) {
                auto q = p;
                q[col] = v;
                next.push_back(std::move(q));
            }
        points.swap(next);
    }

    std::vector<MarginPoint> out;
    for (const auto& p : points) {
        Eigen::MatrixXd X = apply_plan(result.plan, table, result.rows, p);
        Eigen::VectorXd xbar = X.colwise().mean().transpose();
        MarginPoint m;
        m.at = p;
        m.mean = xbar.dot(result.coef);
        m.se = std::sqrt(std::max(0.0, xbar.dot(result.cov * xbar)));
        out.push_back(std::move(m));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string format_report_csv(const RegressionResult& r) {
    std::string out = "term,estimate,se,t,p\n";
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        auto k = static_cast<Eigen::Index>(i);
        out += csv::escape(r.names[i]) + ',' + io::format_double(r.coef(k)) + ',' + io::format_double(r.se(k)) +
               ',' + io::format_double(r.t_stats(k)) + ',' + io::format_double(r.p_values(k)) + '\n';
    }
    out += "n_obs," + std::to_string(r.n_obs) + ",n_clusters," + std::to_string(r.n_clusters) + ",\n";
    return out;
}

std::string format_report_text(const RegressionResult& r) {
    std::size_t width = 24;
    for (const auto& n : r.names) width = std::max(width, n.size() + 2);
    auto pad = [&](const std::string& s) { return s + std::string(width > s.size() ? width - s.size() : 1, ' '); };
    std::ostringstream os;
    std::string rule(width + 16, '-');
    os << rule << '\n' << pad("") << r.outcome << '\n' << rule << '\n';
    char buf[64];
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        auto k = static_cast<Eigen::Index>(i);
        double p = r.p_values(k);
        const char* stars = p < 0.001 ? "***" : p < 0.01 ? "**" : p < 0.05 ? "*" : "";
        std::snprintf(buf, sizeof buf, "%10.4f%s", r.coef(k), stars);
        os << pad(r.names[i]) << buf << '\n';
        std::snprintf(buf, sizeof buf, "(%.2f)", r.t_stats(k));
        os << pad("") << std::string(buf).insert(0, std::max<int>(0, 10 - static_cast<int>(std::strlen(buf)) + 1), ' ')
           << '\n';
    }
    os << rule << '\n';
    os << pad("Observations") << r.n_obs << '\n';
    if (r.se_type == SeType::clustered) os << pad("Clusters") << r.n_clusters << '\n';
    std::snprintf(buf, sizeof buf, "%.4f", r.r_squared);
    os << pad("R-squared") << buf << '\n' << rule << '\n';
    os << "t statistics in parentheses; "
       << (r.se_type == SeType::clustered ? "clustered" : "heteroskedasticity-robust (HC1)")
       << " standard errors\n* p<0.05, ** p<0.01, *** p<0.001\n";
    return os.str();
}

std::string format_margins_csv(const std::vector<MarginPoint>& points) {
    std::string out;
    if (points.empty()) return "mean,se\n";
    for (const auto& [k, v] : points.front().at) out += csv::escape(k) + ',';
    out += "mean,se\n";
    for (const auto& p : points) {
        for (const auto& [k, v] : p.at) out += io::format_double(v) + ',';
        out += io::format_double(p.mean) + ',' + io::format_double(p.se) + '\n';
    }
    return out;
}

}  // namespace novscope
