#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace novscope {

// Column-oriented analysis table. Numeric columns use NaN for missing values;
// string columns use the empty string.
class Table {
public:
    struct Column {
        std::string name;
        bool is_string = false;
        std::vector<double> num;
        std::vector<std::string> str;

        bool missing(std::size_t row) const {
            return is_string ? str[row].empty() : std::isnan(num[row]);
        }
    };

    std::size_t rows() const { return rows_; }
    bool has(std::string_view name) const;
    const Column& column(std::string_view name) const;
    const std::vector<Column>& columns() const { return columns_; }

    void add_numeric(std::string name, std::vector<double> values);
    void add_string(std::string name, std::vector<std::string> values);

    std::string to_csv() const;
    // Columns whose non-empty cells all parse as numbers become numeric.
    static Table from_csv(const std::string& text);

private:
    void check_rows(std::size_t n, const std::string& name);
    std::size_t rows_ = 0;
    bool sized_ = false;
    std::vector<Column> columns_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

enum class SeType : std::uint8_t { clustered, heteroskedastic };

struct Factor {
    enum class Kind : std::uint8_t { numeric, squared, categorical };
    Kind kind = Kind::numeric;
    std::string column;
    std::optional<std::string> baseline;  // categorical only
};

// A main effect, squared term, categorical expansion, or an interaction of 2-3 factors.
struct Term {
    std::vector<Factor> factors;
};

struct Condition {
    std::string column;
    std::string op;  // one of >=, <=, >, <, ==, !=
    std::string value;
};

struct ModelSpec {
    std::string name;
    std::string outcome;
    std::vector<Term> terms;
    std::vector<Condition> filter;  // conjunction
    std::optional<std::string> cluster_col;
    SeType se_type = SeType::clustered;
    bool small_sample_correction = true;
};

// Term grammar: `col`, `col^2`, `C(col)`, `C(col, base=LEVEL)`, and products of
// those joined by `*`, `:` or `×`.
Term parse_term(std::string_view text);
std::vector<Condition> parse_filter(std::string_view text);

// Reads `[model:NAME]` sections (keys: outcome, terms, filter, cluster, se,
// small_sample) from an INI file.
std::vector<ModelSpec> load_model_specs(const std::filesystem::path& path);
std::vector<ModelSpec> parse_model_specs(const std::string& ini_text);

// Levels fixed at estimation time so that the same columns can be rebuilt for margins.
struct ExpansionPlan {
    struct PlannedFactor {
        Factor factor;
        std::vector<std::string> levels;  // non-baseline levels, categorical only
    };
    std::vector<std::vector<PlannedFactor>> terms;
};

struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> clusters;  // empty without a cluster column
    std::vector<std::string> names;     // "intercept" first
    std::vector<std::size_t> rows;      // table rows retained
    ExpansionPlan plan;
    std::vector<std::string> warnings;
};

// Applies the filter, drops rows with any missing required value, expands terms,
// and rejects empty samples and rank-deficient designs (ValidationError).
Design build_design(const Table& table, const ModelSpec& spec);

// Rebuilds design rows for `rows` with optional per-column value overrides.
Eigen::MatrixXd apply_plan(const ExpansionPlan& plan, const Table& table,
                           const std::vector<std::size_t>& rows,
                           const std::map<std::string, double>& overrides = {});

struct OlsFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd residuals;
};

OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// (X'X)^-1 from the R factor of a QR decomposition.
Eigen::MatrixXd bread(const Eigen::MatrixXd& X);

// Clustered sandwich with factor G/(G-1)*(n-1)/(n-k) when clusters are given,
// HC1 (n/(n-k)) otherwise. Throws ValidationError for fewer than two clusters.
Eigen::MatrixXd robust_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                           const std::vector<std::string>* clusters, bool small_sample_correction = true);

Eigen::MatrixXd classical_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals);

struct RegressionResult {
    std::string model;
    std::string outcome;
    std::vector<std::string> names;
    Eigen::VectorXd coef;
    Eigen::MatrixXd cov;
    Eigen::VectorXd se;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd p_values;
    std::size_t n_obs = 0;
    std::size_t n_clusters = 0;
    double r_squared = 0.0;
    SeType se_type = SeType::clustered;
    ExpansionPlan plan;
    std::vector<std::size_t> rows;
    std::vector<std::string> warnings;

    std::optional<std::size_t> index_of(std::string_view term) const;
};

RegressionResult run_model(const Table& table, const ModelSpec& spec);

struct MarginPoint {
    std::map<std::string, double> at;
    double mean = 0.0;
    double se = 0.0;
};

// For every point of the Cartesian grid, sets the grid columns on all estimation
// rows, averages the predictions, and reports delta-method standard errors from
// the model's robust covariance. Grid values outside the observed range add a
// warning to `warnings` but are still evaluated.
std::vector<MarginPoint> margins(const RegressionResult& result, const Table& table,
                                 const std::map<std::string, std::vector<double>>& grid,
                                 std::vector<std::string>* warnings = nullptr);

std::string format_report_csv(const RegressionResult& result);
// Coefficients with significance stars and t statistics in parentheses.
std::string format_report_text(const RegressionResult& result);
std::string format_margins_csv(const std::vector<MarginPoint>& points);

}  // namespace novscope
