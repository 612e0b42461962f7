#include "vocscreen/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vocscreen/common.hpp"

namespace vocscreen {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> Matrix::col(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

void Matrix::set_col(std::size_t j, std::span<const double> v) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::mul(const Matrix& other) const {
    Matrix out(rows_, other.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double a = (*this)(i, k);
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < other.cols_; ++j) out(i, j) += a * other(k, j);
        }
    }
    return out;
}

std::vector<double> Matrix::mul(std::span<const double> v) const {
    std::vector<double> out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = dot(row(i), v);
    return out;
}

std::vector<double> Matrix::mul_transposed(std::span<const double> v) const {
    std::vector<double> out(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double vi = v[i];
        auto r = row(i);
        for (std::size_t j = 0; j < cols_; ++j) out[j] += r[j] * vi;
    }
    return out;
}

HouseholderQr::HouseholderQr(const Matrix& x) : n_(x.rows()), p_(x.cols()), qr_(x), tau_(x.cols(), 0.0) {
    if (n_ < p_) throw EstimationError("QR: fewer rows than columns");

    // column norms of the input, used for the rank tolerance
    std::vector<double> colnorm(p_, 0.0);
    for (std::size_t j = 0; j < p_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) s += x(i, j) * x(i, j);
        colnorm[j] = std::sqrt(s);
    }
    const double maxnorm = *std::max_element(colnorm.begin(), colnorm.end());

    for (std::size_t k = 0; k < p_; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n_; ++i) norm += qr_(i, k) * qr_(i, k);
        norm = std::sqrt(norm);

        const double tol = 1e-12 * (maxnorm > 0.0 ? maxnorm : 1.0) * std::sqrt(static_cast<double>(n_));
        if (norm <= tol) {
            if (deficient_col_ < 0) deficient_col_ = static_cast<int>(k);
            tau_[k] = 0.0;
            continue;
        }

        const double alpha = qr_(k, k) >= 0.0 ? -norm : norm;
        const double v0 = qr_(k, k) - alpha;
        qr_(k, k) = alpha;
        // store v normalized so v[k] = 1
        for (std::size_t i = k + 1; i < n_; ++i) qr_(i, k) /= v0;
        tau_[k] = -v0 / alpha;

        // apply reflector to remaining columns
        for (std::size_t j = k + 1; j < p_; ++j) {
            double s = qr_(k, j);
            for (std::size_t i = k + 1; i < n_; ++i) s += qr_(i, k) * qr_(i, j);
            s *= tau_[k];
            qr_(k, j) -= s;
            for (std::size_t i = k + 1; i < n_; ++i) qr_(i, j) -= qr_(i, k) * s;
        }
    }

    r_ = Matrix(p_, p_);
    for (std::size_t i = 0; i < p_; ++i)
        for (std::size_t j = i; j < p_; ++j) r_(i, j) = qr_(i, j);

    // near-singular R diagonal also counts as rank deficiency
    if (deficient_col_ < 0) {
        double maxdiag = 0.0;
        for (std::size_t i = 0; i < p_; ++i) maxdiag = std::max(maxdiag, std::abs(r_(i, i)));
        for (std::size_t i = 0; i < p_; ++i) {
            if (std::abs(r_(i, i)) <= 1e-10 * (maxdiag > 0.0 ? maxdiag : 1.0)) {
                deficient_col_ = static_cast<int>(i);
                break;
            }
        }
    }
}

std::vector<double> HouseholderQr::qty(std::span<const double> y) const {
    std::vector<double> w(y.begin(), y.end());
    for (std::size_t k = 0; k < p_; ++k) {
        if (tau_[k] == 0.0) continue;
        double s = w[k];
        for (std::size_t i = k + 1; i < n_; ++i) s += qr_(i, k) * w[i];
        s *= tau_[k];
        w[k] -= s;
        for (std::size_t i = k + 1; i < n_; ++i) w[i] -= qr_(i, k) * s;
    }
    return w;
}

std::vector<double> HouseholderQr::solve(std::span<const double> y) const {
    if (!full_rank()) throw EstimationError("QR solve on rank-deficient matrix");
    std::vector<double> w = qty(y);
    std::vector<double> beta(p_, 0.0);
    for (std::size_t i = p_; i-- > 0;) {
        double s = w[i];
        for (std::size_t j = i + 1; j < p_; ++j) s -= r_(i, j) * beta[j];
        beta[i] = s / r_(i, i);
    }
    return beta;
}

std::vector<double> HouseholderQr::rinv_gram_diagonal() const {
    if (!full_rank()) throw EstimationError("rank-deficient R");
    // column j of R^-T is the solution of R^T z = e_j; diag entry is ||z||^2
    std::vector<double> out(p_, 0.0);
    for (std::size_t j = 0; j < p_; ++j) {
        std::vector<double> z(p_, 0.0);
        for (std::size_t i = j; i < p_; ++i) {
            double s = (i == j) ? 1.0 : 0.0;
            for (std::size_t k = j; k < i; ++k) s -= r_(k, i) * z[k];
            z[i] = s / r_(i, i);
        }
        out[j] = dot(z, z);
    }
    return out;
}

bool cholesky_factor(Matrix& a) {
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (d <= 0.0 || !std::isfinite(d)) return false;
        const double l = std::sqrt(d);
        a(j, j) = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / l;
        }
        for (std::size_t k = j + 1; k < n; ++k) a(j, k) = 0.0;
    }
    return true;
}

double cholesky_logdet(const Matrix& l) {
    double s = 0.0;
    for (std::size_t i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
    return 2.0 * s;
}

std::vector<double> forward_substitute(const Matrix& l, std::span<const double> b) {
    const std::size_t n = l.rows();
    std::vector<double> z(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * z[k];
        z[i] = s / l(i, i);
    }
    return z;
}

bool cholesky_solve(Matrix a, std::span<const double> b, std::vector<double>& x) {
    if (!cholesky_factor(a)) return false;
    const std::size_t n = a.rows();
    std::vector<double> z = forward_substitute(a, b);
    x.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = z[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a(k, i) * x[k];
        x[i] = s / a(i, i);
    }
    return true;
}

SvdResult jacobi_svd(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    Matrix a = x;                       // columns get orthogonalized in place
    Matrix v = Matrix::identity(d);

    const double eps = 1e-14;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    app += a(i, p) * a(i, p);
                    aqq += a(i, q) * a(i, q);
                    apq += a(i, p) * a(i, q);
                }
                if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double ap = a(i, p), aq = a(i, q);
                    a(i, p) = c * ap - s * aq;
                    a(i, q) = s * ap + c * aq;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a(i, j) * a(i, j);
        sigma[j] = std::sqrt(s);
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

    SvdResult out;
    const std::size_t k = std::min(n, d);
    out.u = Matrix(n, k);
    out.v = Matrix(d, k);
    out.sigma.resize(k);
    for (std::size_t jj = 0; jj < k; ++jj) {
        const std::size_t src = order[jj];
        out.sigma[jj] = sigma[src];
        const double inv = sigma[src] > 0.0 ? 1.0 / sigma[src] : 0.0;
        for (std::size_t i = 0; i < n; ++i) out.u(i, jj) = a(i, src) * inv;
        for (std::size_t i = 0; i < d; ++i) out.v(i, jj) = v(i, src);
    }
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

}  // namespace vocscreen
