#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vocscreen/linalg.hpp"

namespace vocscreen {

enum class ColumnType { Continuous, Categorical };

struct NumericColumn {
    std::vector<double> values;
};

// Categorical values are stored as integer codes assigned by first appearance,
// with the code book kept alongside (code -> level name).
struct CategoricalColumn {
    std::vector<int> codes;
    std::vector<std::string> levels;
};

using Column = std::variant<NumericColumn, CategoricalColumn>;

// Per-column scaling applied by standardize(); raw = standardized * sd + mean.
struct ColumnScaling {
    double mean = 0.0;
    double sd = 1.0;
};

// Column type declarations for CSV loading. Columns not listed default to
// continuous; the id column is kept as text row identifiers.
struct Schema {
    std::string id_column = "id";
    std::map<std::string, ColumnType> types;
};

// Immutable after construction; all operations return new datasets.
class Dataset {
public:
    Dataset() = default;
    static Dataset from_columns(std::string id_name, std::vector<std::string> row_ids,
                                std::vector<std::string> column_names, std::vector<Column> columns);

    std::size_t n_rows() const { return row_ids_.size(); }
    std::size_t n_cols() const { return columns_.size(); }

    const std::string& id_name() const { return id_name_; }
    const std::vector<std::string>& row_ids() const { return row_ids_; }
    const std::vector<std::string>& column_names() const { return column_names_; }

    bool has_column(const std::string& name) const;
    std::size_t column_index(const std::string& name) const;  // throws ConfigError
    const Column& column(const std::string& name) const;
    const Column& column(std::size_t idx) const { return columns_[idx]; }

    bool is_numeric(const std::string& name) const;
    const std::vector<double>& numeric(const std::string& name) const;
    const CategoricalColumn& categorical(const std::string& name) const;

    const std::map<std::string, ColumnScaling>& scalings() const { return scalings_; }

    // Row subset in the given order (used by outlier filtering).
    Dataset select_rows(const std::vector<std::size_t>& rows) const;

    // Returns a copy with one numeric column replaced.
    Dataset with_numeric(const std::string& name, std::vector<double> values) const;
    // Appends a numeric column.
    Dataset with_new_numeric(const std::string& name, std::vector<double> values) const;

private:
    friend Dataset standardize(const Dataset&, const std::vector<std::string>&);

    std::string id_name_ = "id";
    std::vector<std::string> row_ids_;
    std::vector<std::string> column_names_;
    std::vector<Column> columns_;
    std::map<std::string, ColumnScaling> scalings_;
};

Dataset load_dataset(const std::string& path, const Schema& schema);
Dataset parse_dataset_csv(const std::string& text, const Schema& schema, const std::string& origin);
std::string to_csv(const Dataset& ds);
void save_dataset(const Dataset& ds, const std::string& path);

// (x - mean) / sd per named column, population sd convention (divide by n).
// Scaling parameters are recorded on the returned dataset.
Dataset standardize(const Dataset& ds, const std::vector<std::string>& cols);

struct OutlierFilterResult {
    Dataset dataset;
    std::vector<std::string> removed_ids;  // input row order
};

// Tukey fence on the named columns: rows with any value outside
// [Q1 - fence*IQR, Q3 + fence*IQR] are dropped. Quantiles use linear
// interpolation between order statistics.
OutlierFilterResult filter_outliers(const Dataset& ds, const std::vector<std::string>& cols,
                                    double fence = 1.5);

// Interpolated quantile of a sample, p in [0,1].
double quantile(std::vector<double> sorted_or_not, double p);

// Column-role binding for causal and ML steps.
struct RoleConfig {
    std::vector<std::string> treatments;
    std::string outcome;
    std::vector<std::string> confounders;
    std::optional<std::string> label;
    std::string id = "id";

    void validate(const Dataset& ds) const;
};

RoleConfig parse_roles_json(const std::string& text);
std::string roles_to_json(const RoleConfig& roles);
RoleConfig load_roles(const std::string& path);

// Numeric design view over a dataset: treatments + confounders as the design
// matrix (categoricals one-hot encoded, first level dropped), outcome vector,
// optional binary labels. Optionally standardized; the scaling used is stored
// so raw values can always be reconstructed.
struct AnalysisView {
    std::vector<std::string> ids;
    std::vector<std::string> feature_names;
    Matrix x;                                // n x f, treatments first
    std::vector<std::size_t> treatment_cols;
    std::vector<std::size_t> confounder_cols;
    std::vector<std::string> treatment_names;
    std::string outcome_name;
    std::vector<double> y;
    std::optional<std::vector<int>> labels;
    std::vector<ColumnScaling> scaling;      // per x column
    double y_mean = 0.0;
    double y_sd = 1.0;
    bool standardized = false;

    Matrix treatment_matrix() const;
    std::vector<double> feature(std::size_t col) const { return x.col(col); }
    std::size_t n() const { return x.rows(); }
};

AnalysisView make_view(const Dataset& ds, const RoleConfig& roles, bool standardized);

}  // namespace vocscreen
