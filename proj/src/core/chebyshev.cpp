#include "chebyshev.hpp"

namespace wwc {

ChebyshevGrid::ChebyshevGrid(int m, double length) : m_(m), length_(length) {
    if (m < 2) throw Error(ErrorCode::invalid_argument, "Chebyshev grid needs M >= 2");
    if (!(length > 0.0)) throw Error(ErrorCode::invalid_argument, "grid length must be positive");
    const int n = m + 1;
    xi_.resize(n);
    s_.resize(n);
    for (int j = 0; j < n; ++j) {
        // sin form keeps the nodes exactly antisymmetric about the midpoint
        xi_[j] = std::sin(kPi * (2.0 * j - m) / (2.0 * m));
        s_[j] = 0.5 * length * (1.0 + xi_[j]);
    }
    bary_.resize(n);
    for (int j = 0; j < n; ++j) bary_[j] = (j % 2 == 0) ? 1.0 : -1.0;
    bary_[0] *= 0.5;
    bary_[m] *= 0.5;

    MatrixXd dx = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            dx(i, j) = (bary_[j] / bary_[i]) / (xi_[i] - xi_[j]);
            diag -= dx(i, j);
        }
        dx(i, i) = diag;
    }
    d_ = dx * (2.0 / length);
    d2_ = d_ * d_;

    // Coefficient transform: f_j = sum_k c_k T_k(xi_j), T_k(xi_j) = cos(k theta_j), theta_j = pi (m - j) / m.
    inv_.resize(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) inv_(j, k) = std::cos(kPi * k * (m - j) / static_cast<double>(m));
    fwd_.resize(n, n);
    for (int k = 0; k < n; ++k) {
        const double ck = (k == 0 || k == m) ? 2.0 : 1.0;
        for (int j = 0; j < n; ++j) {
            const double cj = (j == 0 || j == m) ? 2.0 : 1.0;
            fwd_(k, j) = 2.0 / (m * ck * cj) * inv_(j, k);
        }
    }

    // Clenshaw–Curtis: integrate the interpolant term by term.
    VectorXd moments = VectorXd::Zero(n);
    for (int k = 0; k < n; k += 2) moments[k] = 2.0 / (1.0 - static_cast<double>(k) * k);
    q_ = fwd_.transpose() * moments * (0.5 * length);
}

VectorXd ChebyshevGrid::interpolation_row(double s) const {
    const int n = size();
    VectorXd r = VectorXd::Zero(n);
    const double x = 2.0 * s / length_ - 1.0;
    double denom = 0.0;
    for (int j = 0; j < n; ++j) {
        const double diff = x - xi_[j];
        if (diff == 0.0) {
            r.setZero();
            r[j] = 1.0;
            return r;
        }
        r[j] = bary_[j] / diff;
        denom += r[j];
    }
    return r / denom;
}

double ChebyshevGrid::interpolate(const VectorXd& f, double s) const { return interpolation_row(s).dot(f); }

VectorXd ChebyshevGrid::filter(const VectorXd& f, double alpha, int p) const {
    VectorXd c = to_coefficients(f);
    for (int k = 0; k <= m_; ++k) c[k] *= std::exp(-alpha * std::pow(static_cast<double>(k) / m_, 2 * p));
    return from_coefficients(c);
}

}  // namespace wwc
