#include "vocscreen/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "vocscreen/common.hpp"

namespace vocscreen {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

Dataset Dataset::from_columns(std::string id_name, std::vector<std::string> row_ids,
                              std::vector<std::string> column_names, std::vector<Column> columns) {
    if (column_names.size() != columns.size())
        throw ConfigError("dataset: column name/data count mismatch");

    const std::size_t n = row_ids.size();
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const std::size_t len = std::holds_alternative<NumericColumn>(columns[j])
                                    ? std::get<NumericColumn>(columns[j]).values.size()
                                    : std::get<CategoricalColumn>(columns[j]).codes.size();
        if (len != n)
            throw ConfigError("dataset: column '" + column_names[j] + "' has " +
                              std::to_string(len) + " rows, expected " + std::to_string(n));
    }

    std::unordered_set<std::string> seen;
    for (const auto& name : column_names)
        if (!seen.insert(name).second) throw ConfigError("dataset: duplicate column '" + name + "'");
    seen.clear();
    for (const auto& id : row_ids)
        if (!seen.insert(id).second) throw ConfigError("dataset: duplicate id '" + id + "'");

    Dataset ds;
    ds.id_name_ = std::move(id_name);
    ds.row_ids_ = std::move(row_ids);
    ds.column_names_ = std::move(column_names);
    ds.columns_ = std::move(columns);
    return ds;
}

bool Dataset::has_column(const std::string& name) const {
    return std::find(column_names_.begin(), column_names_.end(), name) != column_names_.end();
}

std::size_t Dataset::column_index(const std::string& name) const {
    auto it = std::find(column_names_.begin(), column_names_.end(), name);
    if (it == column_names_.end()) throw ConfigError("unknown column '" + name + "'");
    return static_cast<std::size_t>(it - column_names_.begin());
}

const Column& Dataset::column(const std::string& name) const { return columns_[column_index(name)]; }

bool Dataset::is_numeric(const std::string& name) const {
    return std::holds_alternative<NumericColumn>(column(name));
}

const std::vector<double>& Dataset::numeric(const std::string& name) const {
    const Column& c = column(name);
    if (!std::holds_alternative<NumericColumn>(c))
        throw ConfigError("column '" + name + "' is not continuous");
    return std::get<NumericColumn>(c).values;
}

const CategoricalColumn& Dataset::categorical(const std::string& name) const {
    const Column& c = column(name);
    if (!std::holds_alternative<CategoricalColumn>(c))
        throw ConfigError("column '" + name + "' is not categorical");
    return std::get<CategoricalColumn>(c);
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.id_name_ = id_name_;
    out.column_names_ = column_names_;
    out.scalings_ = scalings_;
    out.row_ids_.reserve(rows.size());
    for (std::size_t r : rows) out.row_ids_.push_back(row_ids_[r]);
    out.columns_.reserve(columns_.size());
    for (const Column& c : columns_) {
        if (std::holds_alternative<NumericColumn>(c)) {
            const auto& src = std::get<NumericColumn>(c).values;
            NumericColumn nc;
            nc.values.reserve(rows.size());
            for (std::size_t r : rows) nc.values.push_back(src[r]);
            out.columns_.emplace_back(std::move(nc));
        } else {
            const auto& src = std::get<CategoricalColumn>(c);
            CategoricalColumn cc;
            cc.levels = src.levels;
            cc.codes.reserve(rows.size());
            for (std::size_t r : rows) cc.codes.push_back(src.codes[r]);
            out.columns_.emplace_back(std::move(cc));
        }
    }
    return out;
}

Dataset Dataset::with_numeric(const std::string& name, std::vector<double> values) const {
    if (values.size() != n_rows()) throw ConfigError("with_numeric: row count mismatch");
    Dataset out = *this;
    out.columns_[column_index(name)] = NumericColumn{std::move(values)};
    return out;
}

Dataset Dataset::with_new_numeric(const std::string& name, std::vector<double> values) const {
    if (has_column(name)) throw ConfigError("column '" + name + "' already exists");
    if (values.size() != n_rows()) throw ConfigError("with_new_numeric: row count mismatch");
    Dataset out = *this;
    out.column_names_.push_back(name);
    out.columns_.emplace_back(NumericColumn{std::move(values)});
    return out;
}

Dataset parse_dataset_csv(const std::string& text, const Schema& schema, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(origin + ": empty file");
    const std::vector<std::string> header = split_csv_line(line);

    std::unordered_set<std::string> header_set(header.begin(), header.end());
    if (header_set.size() != header.size()) throw ConfigError(origin + ": duplicate header name");
    if (!header_set.count(schema.id_column))
        throw ConfigError(origin + ": id column '" + schema.id_column + "' not in header");
    for (const auto& [name, _] : schema.types)
        if (!header_set.count(name))
            throw ConfigError(origin + ": schema declares '" + name + "' missing from header");

    std::size_t id_pos = 0;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == schema.id_column) id_pos = j;

    std::vector<std::string> col_names;
    std::vector<ColumnType> col_types;
    std::vector<std::size_t> col_pos;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j == id_pos) continue;
        col_names.push_back(header[j]);
        auto it = schema.types.find(header[j]);
        col_types.push_back(it == schema.types.end() ? ColumnType::Continuous : it->second);
        col_pos.push_back(j);
    }

    std::vector<std::string> ids;
    std::vector<Column> cols;
    for (std::size_t j = 0; j < col_names.size(); ++j) {
        if (col_types[j] == ColumnType::Continuous)
            cols.emplace_back(NumericColumn{});
        else
            cols.emplace_back(CategoricalColumn{});
    }

    std::vector<std::unordered_map<std::string, int>> level_maps(col_names.size());

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ConfigError(origin + ": row " + std::to_string(row) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(header.size()));
        ids.push_back(fields[id_pos]);
        for (std::size_t j = 0; j < col_names.size(); ++j) {
            const std::string& tok = fields[col_pos[j]];
            if (tok.empty())
                throw ConfigError(origin + ": missing value at row " + std::to_string(row) +
                                  ", column '" + col_names[j] + "'");
            if (col_types[j] == ColumnType::Continuous) {
                double v;
                if (!parse_double(tok, v) || !std::isfinite(v))
                    throw ConfigError(origin + ": non-numeric value '" + tok + "' at row " +
                                      std::to_string(row) + ", column '" + col_names[j] + "'");
                std::get<NumericColumn>(cols[j]).values.push_back(v);
            } else {
                auto& cc = std::get<CategoricalColumn>(cols[j]);
                auto [it, inserted] = level_maps[j].emplace(tok, static_cast<int>(cc.levels.size()));
                if (inserted) cc.levels.push_back(tok);
                cc.codes.push_back(it->second);
            }
        }
    }
    if (ids.empty()) throw ConfigError(origin + ": no data rows");

    return Dataset::from_columns(schema.id_column, std::move(ids), std::move(col_names), std::move(cols));
}

Dataset load_dataset(const std::string& path, const Schema& schema) {
    return parse_dataset_csv(read_file(path), schema, path);
}

std::string to_csv(const Dataset& ds) {
    std::string out = ds.id_name();
    for (const auto& name : ds.column_names()) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        out += ds.row_ids()[i];
        for (std::size_t j = 0; j < ds.n_cols(); ++j) {
            out += ',';
            const Column& c = ds.column(j);
            if (std::holds_alternative<NumericColumn>(c))
                out += render_double(std::get<NumericColumn>(c).values[i]);
            else {
                const auto& cc = std::get<CategoricalColumn>(c);
                out += cc.levels[static_cast<std::size_t>(cc.codes[i])];
            }
        }
        out += '\n';
    }
    return out;
}

void save_dataset(const Dataset& ds, const std::string& path) { write_file(path, to_csv(ds)); }

Dataset standardize(const Dataset& ds, const std::vector<std::string>& cols) {
    Dataset out = ds;
    for (const auto& name : cols) {
        const std::vector<double>& v = ds.numeric(name);
        const double m = mean(v);
        const double sd = std::sqrt(variance(v));
        if (sd <= 0.0) throw ConfigError("zero variance in column '" + name + "'");
        std::vector<double> z(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - m) / sd;
        out.columns_[out.column_index(name)] = NumericColumn{std::move(z)};
        // compose with any scaling already recorded for this column
        auto it = out.scalings_.find(name);
        if (it == out.scalings_.end()) {
            out.scalings_[name] = ColumnScaling{m, sd};
        } else {
            it->second = ColumnScaling{it->second.mean + it->second.sd * m, it->second.sd * sd};
        }
    }
    return out;
}

double quantile(std::vector<double> v, double p) {
    if (v.empty()) throw ConfigError("quantile of empty sample");
    std::sort(v.begin(), v.end());
    if (p <= 0.0) return v.front();
    if (p >= 1.0) return v.back();
    const double h = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= v.size()) return v[lo];
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

OutlierFilterResult filter_outliers(const Dataset& ds, const std::vector<std::string>& cols,
                                    double fence) {
    if (fence < 0.0) throw ConfigError("fence must be >= 0");

    struct Bounds {
        double lo, hi;
    };
    std::vector<std::pair<const std::vector<double>*, Bounds>> checks;
    checks.reserve(cols.size());
    for (const auto& name : cols) {
        const auto& v = ds.numeric(name);
        const double q1 = quantile(v, 0.25);
        const double q3 = quantile(v, 0.75);
        const double iqr = q3 - q1;
        checks.push_back({&v, Bounds{q1 - fence * iqr, q3 + fence * iqr}});
    }

    std::vector<std::size_t> keep;
    std::vector<std::string> removed;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        bool out_of_fence = false;
        for (const auto& [v, b] : checks) {
            const double x = (*v)[i];
            if (x < b.lo || x > b.hi) {
                out_of_fence = true;
                break;
            }
        }
        if (out_of_fence)
            removed.push_back(ds.row_ids()[i]);
        else
            keep.push_back(i);
    }
    if (keep.empty()) throw ConfigError("outlier filter removed every row");
    return {ds.select_rows(keep), std::move(removed)};
}

void RoleConfig::validate(const Dataset& ds) const {
    std::set<std::string> seen;
    auto check_disjoint = [&](const std::string& name, const char* role) {
        if (!seen.insert(name).second)
            throw ConfigError("column '" + name + "' appears in more than one role (" + role + ")");
    };
    for (const auto& t : treatments) check_disjoint(t, "treatment");
    check_disjoint(outcome, "outcome");
    for (const auto& c : confounders) check_disjoint(c, "confounder");

    auto must_exist = [&](const std::string& name) {
        if (name != ds.id_name() && !ds.has_column(name))
            throw ConfigError("role references missing column '" + name + "'");
    };
    for (const auto& t : treatments) must_exist(t);
    must_exist(outcome);
    for (const auto& c : confounders) must_exist(c);
    if (id != ds.id_name() && !ds.has_column(id))
        throw ConfigError("id column '" + id + "' not found");

    if (label) {
        must_exist(*label);
        const auto& v = ds.numeric(*label);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] != 0.0 && v[i] != 1.0)
                throw ConfigError("label column '" + *label + "' has non-binary value at row " +
                                  std::to_string(i + 1));
    }
}

RoleConfig parse_roles_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("roles JSON: ") + e.what());
    }
    RoleConfig r;
    try {
        r.treatments = j.at("treatments").get<std::vector<std::string>>();
        r.outcome = j.at("outcome").get<std::string>();
        r.confounders = j.at("confounders").get<std::vector<std::string>>();
        if (j.contains("label") && !j["label"].is_null()) r.label = j["label"].get<std::string>();
        if (j.contains("id")) r.id = j["id"].get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("roles JSON: ") + e.what());
    }
    return r;
}

std::string roles_to_json(const RoleConfig& roles) {
    json j;
    j["treatments"] = roles.treatments;
    j["outcome"] = roles.outcome;
    j["confounders"] = roles.confounders;
    if (roles.label) j["label"] = *roles.label;
    j["id"] = roles.id;
    return j.dump(2) + "\n";
}

RoleConfig load_roles(const std::string& path) { return parse_roles_json(read_file(path)); }

Matrix AnalysisView::treatment_matrix() const {
    Matrix t(x.rows(), treatment_cols.size());
    for (std::size_t j = 0; j < treatment_cols.size(); ++j)
        for (std::size_t i = 0; i < x.rows(); ++i) t(i, j) = x(i, treatment_cols[j]);
    return t;
}

AnalysisView make_view(const Dataset& ds, const RoleConfig& roles, bool standardized) {
    roles.validate(ds);

    AnalysisView view;
    view.ids = ds.row_ids();
    view.outcome_name = roles.outcome;
    view.standardized = standardized;

    const std::size_t n = ds.n_rows();
    std::vector<std::vector<double>> features;

    // expand a role column into one or more numeric features
    auto append = [&](const std::string& name, bool is_treatment) {
        const Column& c = ds.column(name);
        std::vector<std::pair<std::string, std::vector<double>>> feats;
        if (std::holds_alternative<NumericColumn>(c)) {
            feats.emplace_back(name, std::get<NumericColumn>(c).values);
        } else {
            const auto& cc = std::get<CategoricalColumn>(c);
            // one-hot, first level dropped
            for (std::size_t lvl = 1; lvl < cc.levels.size(); ++lvl) {
                std::vector<double> ind(n, 0.0);
                for (std::size_t i = 0; i < n; ++i)
                    if (cc.codes[i] == static_cast<int>(lvl)) ind[i] = 1.0;
                feats.emplace_back(name + "=" + cc.levels[lvl], std::move(ind));
            }
        }
        for (auto& [fname, values] : feats) {
            for (double v : values)
                if (!std::isfinite(v)) throw ConfigError("non-finite value in column '" + name + "'");
            ColumnScaling sc;
            if (standardized) {
                sc.mean = mean(values);
                sc.sd = std::sqrt(variance(values));
                if (sc.sd <= 0.0) throw ConfigError("zero variance in column '" + fname + "'");
                for (double& v : values) v = (v - sc.mean) / sc.sd;
            }
            const std::size_t idx = view.feature_names.size();
            view.feature_names.push_back(fname);
            view.scaling.push_back(sc);
            if (is_treatment)
                view.treatment_cols.push_back(idx);
            else
                view.confounder_cols.push_back(idx);
            features.push_back(std::move(values));
        }
    };

    for (const auto& t : roles.treatments) {
        append(t, true);
        view.treatment_names.push_back(t);
    }
    for (const auto& c : roles.confounders) append(c, false);

    view.x = Matrix(n, features.size());
    for (std::size_t j = 0; j < features.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) view.x(i, j) = features[j][i];

    view.y = ds.numeric(roles.outcome);
    for (double v : view.y)
        if (!std::isfinite(v)) throw ConfigError("non-finite value in outcome column");
    view.y_mean = 0.0;
    view.y_sd = 1.0;

    if (roles.label) {
        const auto& lv = ds.numeric(*roles.label);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (lv[i] != 0.0 && lv[i] != 1.0) throw ConfigError("non-binary label value");
            labels[i] = static_cast<int>(lv[i]);
        }
        view.labels = std::move(labels);
    }
    return view;
}

}  // namespace vocscreen
