#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vocscreen/exec.hpp"
#include "vocscreen/linalg.hpp"

namespace vocscreen {

// Full-covariance Gaussian mixture fitted by EM. Covariances carry a diagonal
// regularization floor so every eigenvalue stays >= kCovarianceFloor.
inline constexpr double kCovarianceFloor = 1e-6;

struct GmmFit {
    std::size_t k = 0;
    std::vector<double> weights;
    Matrix means;                     // k x d
    std::vector<Matrix> covariances;  // k matrices, d x d
    double log_likelihood = 0.0;
    Matrix responsibilities;          // n x k
    int iterations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    std::vector<double> loglik_path;  // per accepted EM iteration

    // mixture density evaluated at a point
    double log_density(std::span<const double> x) const;
    // hard assignment by largest responsibility
    std::vector<int> assignments() const;
};

// EM with k-means++ seeded initialization per restart; the best restart by
// final log-likelihood wins. A collapsing component is re-seeded once, a
// second collapse is an error. The log-likelihood is asserted non-decreasing
// across iterations on every run.
GmmFit fit_gmm(const Matrix& x, std::size_t k, std::uint64_t seed, int restarts = 4,
               double tol = 1e-6, int max_iter = 500, exec::Mode mode = exec::default_mode());

struct SelectionTable {
    struct Row {
        std::size_t k = 0;
        double bic = 0.0;
        double aic = 0.0;
        double log_likelihood = 0.0;
        std::size_t parameter_count = 0;
    };
    std::vector<Row> rows;
    std::size_t chosen_k = 0;
    std::string criterion;  // "bic" | "aic"
};

// p = (k-1) + k*d + k*d(d+1)/2 free parameters per mixture size.
std::size_t gmm_parameter_count(std::size_t k, std::size_t d);

SelectionTable select_k(const Matrix& x, const std::vector<std::size_t>& k_range,
                        const std::string& criterion, std::uint64_t seed, int restarts = 4,
                        exec::Mode mode = exec::default_mode());

std::string selection_to_csv(const SelectionTable& table);

struct PcaResult {
    Matrix projection;                     // n x dims
    std::vector<double> explained_ratio;   // per kept component
    Matrix loadings;                       // d x dims, orthonormal columns
    std::vector<double> column_means;      // centering applied
};

// SVD-based PCA of the centered columns. Sign convention: the largest-
// magnitude loading of each component is positive.
PcaResult pca_project(const Matrix& x, std::size_t dims);

// Mean silhouette width, Euclidean metric; singleton clusters contribute 0.
double silhouette(const Matrix& x, std::span<const int> labels,
                  exec::Mode mode = exec::default_mode());

// Pair-counting adjusted Rand index.
double adjusted_rand_index(std::span<const int> labels_a, std::span<const int> labels_b);

// Mutual information normalized by the arithmetic mean of the entropies
// (natural logs, 0*log 0 = 0); two single-cluster partitions score 1.
double normalized_mutual_information(std::span<const int> labels_a, std::span<const int> labels_b);

struct AlignedScore {
    double f1 = 0.0;
    std::vector<int> cluster_to_class;  // per cluster id
};

// Maps clusters onto binary truth (label permutation for 2 clusters,
// majority rule otherwise) and scores the induced prediction by F1.
AlignedScore align_and_score(std::span<const int> clusters, std::span<const int> truth);

}  // namespace vocscreen
