#include "vocscreen/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "json.hpp"
#include "vocscreen/common.hpp"
#include "vocscreen/rng.hpp"

namespace vocscreen {

using nlohmann::json;

void ModelSpec::validate() const {
    if (lambda < 0.0) throw ConfigError("model: lambda must be >= 0");
    if (n_trees < 1) throw ConfigError("model: tree count must be >= 1");
    if (max_depth < 1) throw ConfigError("model: max depth must be >= 1");
    if (min_leaf < 1) throw ConfigError("model: min leaf size must be >= 1");
}

namespace {

const char* kBloodMarkers[] = {"glucose", "ketone"};

void check_leakage(const AnalysisView& view) {
    for (const auto& name : view.feature_names) {
        if (name == view.outcome_name)
            throw ConfigError("outcome leakage: feature '" + name + "' is the outcome column");
        for (const char* marker : kBloodMarkers)
            if (name == marker)
                throw ConfigError("outcome leakage: blood marker '" + name +
                                  "' must not be a feature");
    }
}

std::span<const int> require_labels(const AnalysisView& view) {
    if (!view.labels) throw ConfigError("classifier needs a label column");
    return *view.labels;
}

struct TreeBuilder {
    const Matrix& x;
    std::span<const int> y;
    const ModelSpec& spec;
    std::size_t n_split_features;
    Rng rng;
    std::vector<TrainedModel::Node> nodes;

    int build(std::vector<std::size_t>& rows, int depth) {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();

        double pos = 0.0;
        for (std::size_t r : rows) pos += y[r];
        const double prob = pos / static_cast<double>(rows.size());
        nodes[id].prob = prob;

        const bool pure = prob == 0.0 || prob == 1.0;
        if (pure || depth >= spec.max_depth ||
            rows.size() < static_cast<std::size_t>(2 * spec.min_leaf))
            return id;

        // feature subset for this node, sampled then kept in index order so
        // the chosen split does not depend on sampling order
        std::vector<std::size_t> feats(x.cols());
        std::iota(feats.begin(), feats.end(), 0);
        if (n_split_features < feats.size()) {
            rng.shuffle(feats);
            feats.resize(n_split_features);
            std::sort(feats.begin(), feats.end());
        }

        const double parent_gini = 2.0 * prob * (1.0 - prob);
        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::pair<double, int>> vals(rows.size());
        for (std::size_t f : feats) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                vals[i] = {x(rows[i], f), y[rows[i]]};
            std::sort(vals.begin(), vals.end());

            double left_pos = 0.0;
            const double total_pos = pos;
            const double n = static_cast<double>(rows.size());
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                left_pos += vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = n - nl;
                if (nl < spec.min_leaf || nr < spec.min_leaf) continue;
                const double pl = left_pos / nl;
                const double pr = (total_pos - left_pos) / nr;
                const double child =
                    (nl / n) * 2.0 * pl * (1.0 - pl) + (nr / n) * 2.0 * pr * (1.0 - pr);
                const double gain = parent_gini - child;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (std::size_t r : rows)
            (x(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right)
                .push_back(r);
        if (left.empty() || right.empty()) return id;

        nodes[id].feature = best_feature;
        nodes[id].threshold = best_threshold;
        nodes[id].left = build(left, depth + 1);
        nodes[id].right = build(right, depth + 1);
        return id;
    }
};

TrainedModel::Tree grow_tree(const Matrix& x, std::span<const int> y, const ModelSpec& spec,
                             std::uint64_t tree_index) {
    Rng rng = Rng::stream(spec.seed, tree_index);
    const std::size_t n = x.rows();
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::size_t>(rng.below(n));
    std::sort(rows.begin(), rows.end());

    std::size_t n_split = x.cols();
    if (spec.split_features == ModelSpec::SplitFeatures::Sqrt)
        n_split = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(x.cols())))));

    TreeBuilder builder{x, y, spec, n_split, rng, {}};
    builder.build(rows, 0);
    TrainedModel::Tree tree;
    tree.nodes = std::move(builder.nodes);
    return tree;
}

double tree_predict(const TrainedModel::Tree& tree, std::span<const double> row) {
    int id = 0;
    while (tree.nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const auto& nd = tree.nodes[static_cast<std::size_t>(id)];
        id = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    return tree.nodes[static_cast<std::size_t>(id)].prob;
}

}  // namespace

double TrainedModel::predict_proba(std::span<const double> row) const {
    if (row.size() != feature_names.size())
        throw ConfigError("predict: expected " + std::to_string(feature_names.size()) +
                          " features, got " + std::to_string(row.size()));
    if (logistic) return logistic->predict_proba(row);
    double s = 0.0;
    for (const auto& tree : trees) s += tree_predict(tree, row);
    return s / static_cast<double>(trees.size());
}

TrainedModel train(const AnalysisView& view, const ModelSpec& spec, exec::Mode mode) {
    spec.validate();
    check_leakage(view);
    const std::span<const int> y = require_labels(view);

    bool has0 = false, has1 = false;
    for (int v : y) (v ? has1 : has0) = true;
    if (!has0 || !has1) throw ConfigError("classifier needs both classes in the label");

    TrainedModel model;
    model.spec = spec;
    model.feature_names = view.feature_names;

    if (spec.kind == ModelSpec::Kind::Logistic) {
        model.logistic = logistic_fit(view.x, y, spec.lambda);
        return model;
    }

    model.trees.resize(static_cast<std::size_t>(spec.n_trees));
    exec::for_each_index(static_cast<std::size_t>(spec.n_trees), mode, [&](std::size_t t) {
        model.trees[t] = grow_tree(view.x, y, spec, t);
    });
    return model;
}

double auc_rank(std::span<const double> scores, std::span<const int> labels) {
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += static_cast<std::size_t>(l);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw ConfigError("auc needs both classes");

    const std::vector<double> ranks = midranks(scores);
    double rank_pos = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (labels[i]) rank_pos += ranks[i];
    const double u = rank_pos - static_cast<double>(n_pos * (n_pos + 1)) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

FoldMetrics classification_metrics(std::span<const double> scores, std::span<const int> labels,
                                   double threshold) {
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (pred && labels[i]) ++tp;
        else if (pred) ++fp;
        else if (labels[i]) ++fn;
        else ++tn;
    }
    FoldMetrics m;
    m.accuracy = (tp + tn) / static_cast<double>(scores.size());
    m.precision = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? tp / (tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
    m.auc = auc_rank(scores, labels);
    return m;
}

CvMetrics cross_validate(const AnalysisView& view, const ModelSpec& spec, int folds,
                         std::uint64_t seed, exec::Mode mode) {
    spec.validate();
    check_leakage(view);
    const std::span<const int> y = require_labels(view);
    const std::size_t n = view.n();
    if (folds < 2) throw ConfigError("cross_validate: folds must be >= 2");

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (y[i] ? pos : neg).push_back(i);
    const std::size_t minority = std::min(pos.size(), neg.size());
    if (static_cast<std::size_t>(folds) > minority)
        throw ConfigError("cross_validate: " + std::to_string(folds) + " folds exceed minority class count " +
                          std::to_string(minority));

    // stratified assignment: shuffle each class, deal round-robin
    CvMetrics cv;
    cv.folds = folds;
    cv.seed = seed;
    cv.fold_assignment.assign(n, 0);
    {
        Rng r0 = Rng::stream(seed, 0), r1 = Rng::stream(seed, 1);
        r0.shuffle(pos);
        r1.shuffle(neg);
        for (std::size_t i = 0; i < pos.size(); ++i)
            cv.fold_assignment[pos[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
        for (std::size_t i = 0; i < neg.size(); ++i)
            cv.fold_assignment[neg[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }

    cv.oof_probability.assign(n, 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < n; ++i)
            (cv.fold_assignment[i] == f ? test_rows : train_rows).push_back(i);

        AnalysisView sub;
        sub.feature_names = view.feature_names;
        sub.outcome_name = view.outcome_name;
        sub.x = Matrix(train_rows.size(), view.x.cols());
        std::vector<int> sub_labels(train_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            for (std::size_t j = 0; j < view.x.cols(); ++j) sub.x(i, j) = view.x(train_rows[i], j);
            sub_labels[i] = y[train_rows[i]];
        }
        sub.labels = std::move(sub_labels);
        sub.y.assign(train_rows.size(), 0.0);

        ModelSpec fold_spec = spec;
        fold_spec.seed = Rng::stream(seed, 100 + static_cast<std::uint64_t>(f)).next_u64();
        const TrainedModel model = train(sub, fold_spec, mode);
        for (std::size_t i : test_rows) cv.oof_probability[i] = model.predict_proba(view.x.row(i));
    }

    cv.pooled = classification_metrics(cv.oof_probability, y);
    cv.per_fold.resize(static_cast<std::size_t>(folds));
    FoldMetrics sum;
    for (int f = 0; f < folds; ++f) {
        std::vector<double> s;
        std::vector<int> l;
        for (std::size_t i = 0; i < n; ++i) {
            if (cv.fold_assignment[i] != f) continue;
            s.push_back(cv.oof_probability[i]);
            l.push_back(y[i]);
        }
        cv.per_fold[static_cast<std::size_t>(f)] = classification_metrics(s, l);
        const auto& m = cv.per_fold[static_cast<std::size_t>(f)];
        sum.auc += m.auc;
        sum.precision += m.precision;
        sum.recall += m.recall;
        sum.f1 += m.f1;
        sum.accuracy += m.accuracy;
    }
    const double nf = static_cast<double>(folds);
    cv.fold_mean = {sum.auc / nf, sum.precision / nf, sum.recall / nf, sum.f1 / nf,
                    sum.accuracy / nf};
    return cv;
}

namespace {
RiskRanking make_ranking(const AnalysisView& view, std::span<const double> probs, bool oof) {
    const std::span<const int> y = require_labels(view);
    RiskRanking rk;
    rk.out_of_fold = oof;
    rk.entries.resize(view.n());
    for (std::size_t i = 0; i < view.n(); ++i)
        rk.entries[i] = {view.ids[i], probs[i], y[i]};
    std::sort(rk.entries.begin(), rk.entries.end(), [](const auto& a, const auto& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.id < b.id;
    });
    return rk;
}
}  // namespace

RiskRanking risk_rank(const TrainedModel& model, const AnalysisView& view) {
    if (model.feature_names != view.feature_names)
        throw ConfigError("risk_rank: model/view feature mismatch");
    std::vector<double> probs(view.n());
    for (std::size_t i = 0; i < view.n(); ++i) probs[i] = model.predict_proba(view.x.row(i));
    return make_ranking(view, probs, /*oof=*/false);
}

RiskRanking risk_rank_oof(const CvMetrics& cv, const AnalysisView& view) {
    if (cv.oof_probability.size() != view.n())
        throw ConfigError("risk_rank_oof: cv/view size mismatch");
    return make_ranking(view, cv.oof_probability, /*oof=*/true);
}

GrayZone gray_zone(const RiskRanking& ranking, double tau, std::optional<int> fallback_top_k) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("gray_zone: threshold must be in (0,1)");
    GrayZone gz;
    gz.threshold = tau;
    for (const auto& e : ranking.entries)
        if (e.label == 0 && e.probability >= tau) gz.ids.push_back(e.id);
    if (gz.ids.empty() && fallback_top_k && *fallback_top_k > 0) {
        gz.fallback_used = true;
        for (const auto& e : ranking.entries) {
            if (e.label != 0) continue;
            gz.ids.push_back(e.id);
            if (gz.ids.size() == static_cast<std::size_t>(*fallback_top_k)) break;
        }
    }
    return gz;
}

std::string ranking_to_csv(const RiskRanking& ranking, const GrayZone& gray) {
    std::string out = "id,probability,label,gray_zone\n";
    for (const auto& e : ranking.entries) {
        const bool flagged = std::find(gray.ids.begin(), gray.ids.end(), e.id) != gray.ids.end();
        out += e.id + "," + render_double(e.probability) + "," + std::to_string(e.label) + "," +
               (flagged ? "1" : "0") + "\n";
    }
    return out;
}

std::string risk_plot_csv(const RiskRanking& ranking, const Dataset& ds,
                          const std::string& glucose_column) {
    const bool with_glucose = ds.has_column(glucose_column) && ds.is_numeric(glucose_column);
    std::unordered_map<std::string, double> glucose;
    if (with_glucose) {
        const auto& col = ds.numeric(glucose_column);
        for (std::size_t i = 0; i < ds.n_rows(); ++i) glucose[ds.row_ids()[i]] = col[i];
    }
    std::string out = with_glucose ? "rank,probability,glucose\n" : "rank,probability\n";
    std::size_t rank = 1;
    for (const auto& e : ranking.entries) {
        out += std::to_string(rank++) + "," + render_double(e.probability);
        if (with_glucose) out += "," + render_double(glucose.at(e.id));
        out += "\n";
    }
    return out;
}

namespace {
json metrics_json(const FoldMetrics& m) {
    return {{"auc", m.auc},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"accuracy", m.accuracy}};
}
}  // namespace

std::string cv_metrics_to_json(const CvMetrics& cv, const ModelSpec& spec,
                               const std::vector<std::string>& features, bool standardized) {
    json j;
    j["model"] = spec.kind == ModelSpec::Kind::Logistic ? "logistic" : "forest";
    j["folds"] = cv.folds;
    j["seed"] = cv.seed;
    j["pooled"] = metrics_json(cv.pooled);
    j["fold_mean"] = metrics_json(cv.fold_mean);
    j["per_fold"] = json::array();
    for (const auto& m : cv.per_fold) j["per_fold"].push_back(metrics_json(m));
    j["features"] = features;
    j["standardized"] = standardized;
    return j.dump(2) + "\n";
}

}  // namespace vocscreen
