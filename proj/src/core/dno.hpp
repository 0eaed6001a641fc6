#pragma once

#include "elliptic.hpp"

#include <vector>

namespace wwc {

/// Dense discrete Dirichlet–Neumann operator on the collocation nodes of one moved surface.
struct DnoOperator {
    MatrixXd matrix;
    VectorXd weights;   ///< surface inner-product weights in which the matrix is self-adjoint
    CurveFrame frame;

    int size() const { return static_cast<int>(matrix.rows()); }
    VectorXd apply(const VectorXd& f) const { return matrix * f; }
    double inner(const VectorXd& f, const VectorXd& g) const { return f.dot(weights.cwiseProduct(g)); }
};

/// Column j is the flux of the harmonic extension of the j-th nodal hat; the result is
/// replaced by its weighted symmetric part.
DnoOperator assemble_dno(const HarmonicMap& map);

struct DnoInverse {
    VectorXd f;
    double mean_defect = 0.0;  ///< relative weighted mean of the input
};

/// Mean-free f with N f = g. A non-mean-free g is an error unless project_mean is set,
/// in which case its mean is removed and reported.
DnoInverse dno_inverse(const DnoOperator& op, const VectorXd& g, bool project_mean = false);

/// Surface Laplace–Beltrami operator as a matrix on the collocation nodes.
MatrixXd surface_laplacian_matrix(const CurveFrame& frame);

/// A f = -N (Laplace–Beltrami f).
VectorXd apply_A(const DnoOperator& op, const VectorXd& f);

/// (a^3 + A) f = rhs on interior nodes with f fixed at both contact points.
VectorXd solve_Aa(const DnoOperator& op, double a, const VectorXd& rhs, double f_left, double f_right);

/// N(kappa) + a^3 d through one harmonic extension of the curvature.
VectorXd compute_Na(const HarmonicMap& map, double a);

/// Jacobian of d -> N_a: full discrete linearization (curvature and domain variation).
MatrixXd na_jacobian(const HarmonicMap& map, double a);

struct NewtonSettings {
    double tol = 1e-11;             ///< on max residual / a^3 or on the accepted step, both in length units
    int max_iter = 20;
    int max_halvings = 5;
    NewtonJacobian jacobian = NewtonJacobian::full;
};

struct NewtonIterate {
    int iteration = 0;
    double residual = 0.0;   ///< max norm of the N_a mismatch divided by a^3
    double damping = 1.0;
};

struct KInversion {
    VectorXd d;
    std::vector<NewtonIterate> trace;
    bool converged = false;
};

/// Recovers d from (N_a, d_l, d_r) by damped Newton; throws SolverError on non-convergence.
KInversion invert_K(const ReferenceDomain& domain, double a, const VectorXd& target, double d_left, double d_right,
                    const VectorXd& guess, const NewtonSettings& settings = {});

}  // namespace wwc
