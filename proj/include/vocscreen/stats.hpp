#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vocscreen/exec.hpp"
#include "vocscreen/linalg.hpp"

namespace vocscreen {

struct OlsFit {
    std::vector<double> coefficients;  // intercept first when fitted with one
    std::vector<double> residuals;
    double residual_variance = 0.0;    // RSS / (n - p)
    std::vector<double> standard_errors;
    bool intercept = true;

    double predict(std::span<const double> features) const;
};

// Least squares via Householder QR. Throws EstimationError on rank
// deficiency (message names the offending design column) or too few rows.
OlsFit ols_fit(const Matrix& x, std::span<const double> y, bool intercept = true);

struct LogisticFit {
    std::vector<double> coefficients;  // intercept first
    double lambda = 0.0;               // ridge penalty on non-intercept terms
    bool converged = false;
    int iterations = 0;
    std::vector<double> loglik_path;   // penalized log-likelihood per iteration

    double score(std::span<const double> features) const;        // linear predictor
    double predict_proba(std::span<const double> features) const;
};

// Penalized maximum likelihood by Newton/IRLS with step halving.
// Divergent fits (separable data, lambda = 0) return converged = false.
LogisticFit logistic_fit(const Matrix& x, std::span<const int> y, double lambda,
                         int max_iter = 100, double tol = 1e-8);

double sigmoid(double z);

enum class Alternative { TwoSided, Greater, Less };

struct UTestResult {
    double u_statistic = 0.0;  // U of the first sample; midranks give half-counts
    double u_other = 0.0;      // U of the second sample; u + u_other = n_a * n_b
    double p_value = 1.0;
    Alternative alternative = Alternative::TwoSided;
    std::string method;        // "exact" or "normal-approximation"
};

inline constexpr std::size_t kExactUTestCap = 8;

// Mann-Whitney U. Exact enumeration when both samples have at most
// kExactUTestCap observations and there are no ties; otherwise normal
// approximation with tie and continuity corrections.
UTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                           Alternative alternative = Alternative::TwoSided);

// Midranks of the pooled sample (average rank over ties, 1-based).
std::vector<double> midranks(std::span<const double> pooled);

// Standard normal CDF.
double normal_cdf(double z);

struct PermutationResult {
    double observed = 0.0;
    std::vector<double> permuted;
    double p_value = 1.0;   // (1 + #{|perm| >= |obs|}) / (K + 1)
    std::uint64_t seed = 0;
    std::size_t failed = 0; // permutations whose statistic could not be computed
};

// Statistic evaluated on a row permutation of the data; the identity
// permutation gives the observed value. Returning nullopt marks the
// permutation as failed.
using PermutationStatistic =
    std::function<std::optional<double>(std::span<const std::size_t> perm)>;

// Seeded permutation test. Permutation k is drawn by Fisher-Yates from its
// own counter-derived stream, so serial and parallel execution agree exactly.
PermutationResult permutation_test(const PermutationStatistic& statistic, std::size_t n_rows,
                                   int k, std::uint64_t seed,
                                   exec::Mode mode = exec::default_mode());

}  // namespace vocscreen
