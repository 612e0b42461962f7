#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vocscreen/dataset.hpp"
#include "vocscreen/exec.hpp"
#include "vocscreen/stats.hpp"

namespace vocscreen {

struct ModelSpec {
    enum class Kind { Logistic, Forest };
    enum class SplitFeatures { Sqrt, All };

    Kind kind = Kind::Logistic;
    double lambda = 1.0;        // logistic ridge strength
    int n_trees = 100;
    int max_depth = 6;
    int min_leaf = 2;
    SplitFeatures split_features = SplitFeatures::Sqrt;
    std::uint64_t seed = 0;

    void validate() const;
};

// Fitted classifier; forests are bagged CART trees with Gini splits and a
// mean-probability vote.
class TrainedModel {
public:
    struct Node {
        int feature = -1;       // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        double prob = 0.0;
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    ModelSpec spec;
    std::vector<std::string> feature_names;
    std::optional<LogisticFit> logistic;
    std::vector<Tree> trees;

    double predict_proba(std::span<const double> row) const;
};

// Trains on view.x against view.labels. Refuses outcome-role leakage: any
// feature matching the outcome column (or a blood marker like glucose/ketone)
// is a hard error.
TrainedModel train(const AnalysisView& view, const ModelSpec& spec,
                   exec::Mode mode = exec::default_mode());

struct FoldMetrics {
    double auc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
};

struct CvMetrics {
    FoldMetrics pooled;                 // on pooled out-of-fold predictions
    std::vector<FoldMetrics> per_fold;
    FoldMetrics fold_mean;
    std::vector<int> fold_assignment;   // per subject
    std::vector<double> oof_probability;
    int folds = 0;
    std::uint64_t seed = 0;
};

// Stratified k-fold cross-validation; threshold 0.5 for the confusion
// metrics, AUC threshold-free via the rank formula.
CvMetrics cross_validate(const AnalysisView& view, const ModelSpec& spec, int folds,
                         std::uint64_t seed, exec::Mode mode = exec::default_mode());

// AUC = U / (n_pos * n_neg) from midranks; ties contribute half.
double auc_rank(std::span<const double> scores, std::span<const int> labels);

FoldMetrics classification_metrics(std::span<const double> scores, std::span<const int> labels,
                                   double threshold = 0.5);

struct RiskRanking {
    struct Entry {
        std::string id;
        double probability = 0.0;
        int label = 0;
    };
    std::vector<Entry> entries;  // descending probability, ties by id
    bool out_of_fold = false;    // false = in-sample scores, treat with care
};

// In-sample ranking (flagged as such).
RiskRanking risk_rank(const TrainedModel& model, const AnalysisView& view);
// Ranking from cross-validated out-of-fold probabilities (preferred).
RiskRanking risk_rank_oof(const CvMetrics& cv, const AnalysisView& view);

struct GrayZone {
    std::vector<std::string> ids;  // flagged non-diabetics, ranking order
    double threshold = 0.5;
    bool fallback_used = false;
};

// Non-diabetics with probability >= tau; when none qualify and
// fallback_top_k is given, the k highest-probability non-diabetics.
GrayZone gray_zone(const RiskRanking& ranking, double tau,
                   std::optional<int> fallback_top_k = std::nullopt);

std::string ranking_to_csv(const RiskRanking& ranking, const GrayZone& gray);
// Plot data in ranking order: rank, probability, and actual glucose when a
// glucose column accompanies the ids.
std::string risk_plot_csv(const RiskRanking& ranking, const Dataset& ds,
                          const std::string& glucose_column);

std::string cv_metrics_to_json(const CvMetrics& cv, const ModelSpec& spec,
                               const std::vector<std::string>& features, bool standardized);

}  // namespace vocscreen
