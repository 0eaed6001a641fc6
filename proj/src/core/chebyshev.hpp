#pragma once

#include "common.hpp"

namespace wwc {

/// Chebyshev–Lobatto grid on [0, length]. Node 0 is the left end.
class ChebyshevGrid {
public:
    ChebyshevGrid() = default;
    ChebyshevGrid(int m, double length);

    int order() const { return m_; }
    int size() const { return m_ + 1; }
    double length() const { return length_; }

    const VectorXd& nodes() const { return s_; }
    double node(int j) const { return s_[j]; }
    /// First-derivative matrix in the arclength parameter.
    const MatrixXd& diff() const { return d_; }
    const MatrixXd& diff2() const { return d2_; }
    /// Clenshaw–Curtis weights, summing to the interval length.
    const VectorXd& quad() const { return q_; }

    VectorXd derivative(const VectorXd& f) const { return d_ * f; }
    double integrate(const VectorXd& f) const { return q_.dot(f); }

    /// Barycentric interpolation of nodal values at an arbitrary parameter.
    double interpolate(const VectorXd& f, double s) const;
    /// Row vector of interpolation weights at s.
    VectorXd interpolation_row(double s) const;

    VectorXd to_coefficients(const VectorXd& f) const { return fwd_ * f; }
    VectorXd from_coefficients(const VectorXd& c) const { return inv_ * c; }

    /// Exponential filter exp(-alpha (k/M)^(2p)) applied to Chebyshev coefficients.
    VectorXd filter(const VectorXd& f, double alpha, int p) const;

private:
    int m_ = 0;
    double length_ = 0.0;
    VectorXd s_;
    VectorXd xi_;
    VectorXd bary_;
    MatrixXd d_;
    MatrixXd d2_;
    VectorXd q_;
    MatrixXd fwd_;
    MatrixXd inv_;
};

}  // namespace wwc
