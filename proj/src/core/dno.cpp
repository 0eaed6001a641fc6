#include "dno.hpp"

#include <fmt/format.h>

#include <Eigen/LU>
#include <Eigen/SVD>

#include <limits>

namespace wwc {

DnoOperator assemble_dno(const HarmonicMap& map) {
    const int n = map.domain().ref().size();
    DnoOperator op;
    op.frame = map.frame();
    op.weights = map.surface_weights();
    MatrixXd raw(n, n);
    for (int j = 0; j < n; ++j) raw.col(j) = harmonic_extension(map, VectorXd::Unit(n, j)).flux;
    // weighted symmetric part: (W N + N^T W) / 2W
    const MatrixXd wn = op.weights.asDiagonal() * raw;
    op.matrix = op.weights.cwiseInverse().asDiagonal() * (0.5 * (wn + wn.transpose()));
    return op;
}

DnoInverse dno_inverse(const DnoOperator& op, const VectorXd& g, bool project_mean) {
    const int n = op.size();
    DnoInverse out;
    const double total = op.weights.sum();
    const double mean = op.weights.dot(g) / total;
    const double scale = std::max(g.norm(), 1e-300);
    out.mean_defect = std::abs(mean) * std::sqrt(static_cast<double>(n)) / scale;
    if (g.norm() == 0.0) out.mean_defect = 0.0;
    VectorXd rhs_g = g;
    if (out.mean_defect > 1e-10) {
        if (!project_mean)
            throw Error(ErrorCode::invalid_argument,
                        fmt::format("inverse D-N data is not mean-free (relative defect {:.3e})", out.mean_defect));
        rhs_g.array() -= mean;
    }
    // bordered system: N f + lambda 1 = g, W.f = 0
    MatrixXd a = MatrixXd::Zero(n + 1, n + 1);
    a.topLeftCorner(n, n) = op.matrix;
    a.col(n).head(n).setOnes();
    a.row(n).head(n) = op.weights.transpose();
    VectorXd rhs(n + 1);
    rhs << rhs_g, 0.0;
    out.f = a.fullPivLu().solve(rhs).head(n);
    return out;
}

MatrixXd surface_laplacian_matrix(const CurveFrame& frame) {
    const MatrixXd g = frame.metric.cwiseInverse().asDiagonal() * frame.ref->grid.diff();
    return g * g;
}

VectorXd apply_A(const DnoOperator& op, const VectorXd& f) { return -op.apply(surface_laplacian(op.frame, f)); }

VectorXd solve_Aa(const DnoOperator& op, double a, const VectorXd& rhs, double f_left, double f_right) {
    using MatrixXl = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using VectorXl = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const int n = op.size(), m = n - 1;
    // the shifted third-order operator is badly conditioned at clustered nodes; work in extended precision
    const MatrixXl lap = surface_laplacian_matrix(op.frame).cast<long double>();
    MatrixXl b = -op.matrix.cast<long double>() * lap;
    b.diagonal().array() += static_cast<long double>(a) * a * a;
    const MatrixXl bii = b.block(1, 1, m - 1, m - 1);
    const VectorXl rl = rhs.cast<long double>();
    const VectorXl r = rl.segment(1, m - 1) - b.block(1, 0, m - 1, 1) * static_cast<long double>(f_left) -
                       b.block(1, m, m - 1, 1) * static_cast<long double>(f_right);
    const Eigen::FullPivLU<MatrixXl> lu(bii);
    if (!lu.isInvertible()) {
        const Eigen::JacobiSVD<MatrixXd> svd(bii.cast<double>());
        throw SolverError(fmt::format("a^3 + A is singular (smallest singular value {:.3e}); a = {} is too small",
                                      svd.singularValues().minCoeff(), a));
    }
    VectorXl x = lu.solve(r);
    x += lu.solve(r - bii * x);
    const long double res = (bii * x - r).norm();
    const long double scale = rl.norm();
    if (scale > 0 && res > 1e-9L * scale)
        throw SolverError(fmt::format("a^3 + A solve residual {:.3e} above tolerance", static_cast<double>(res / scale)));
    VectorXd f(n);
    f[0] = f_left;
    f[m] = f_right;
    f.segment(1, m - 1) = x.cast<double>();
    return f;
}

VectorXd compute_Na(const HarmonicMap& map, double a) {
    const CurveFrame& frame = map.frame();
    return harmonic_extension(map, frame.kappa).flux + a * a * a * frame.d;
}

MatrixXd na_jacobian(const HarmonicMap& map, double a) {
    const ReferenceDomain& domain = map.domain();
    const int n = domain.ref().size();
    const MatrixXd jk = curvature_jacobian(map.frame());
    const VectorXd u = harmonic_extension(map, map.frame().kappa).values;
    MatrixXd jac(n, n);
    for (int j = 0; j < n; ++j) {
        const auto velocity = domain.vertex_displacement(VectorXd::Unit(n, j));
        jac.col(j) = harmonic_extension(map, jk.col(j)).flux + map.flux_shape_derivative(u, velocity);
    }
    jac.diagonal().array() += a * a * a;
    return jac;
}

KInversion invert_K(const ReferenceDomain& domain, double a, const VectorXd& target, double d_left, double d_right,
                    const VectorXd& guess, const NewtonSettings& settings) {
    const ReferenceSurface& ref = domain.ref();
    const int n = ref.size(), m = n - 1;
    const double a3 = a * a * a;
    KInversion out;
    // lift the endpoint corrections linearly so the start has no spikes at the contact points
    out.d = guess;
    const double cl = d_left - guess[0], cr = d_right - guess[m];
    for (int j = 0; j < n; ++j) {
        const double s = ref.grid.node(j) / ref.length();
        out.d[j] += cl * (1.0 - s) + cr * s;
    }
    out.d[0] = d_left;
    out.d[m] = d_right;

    auto residual = [&](const VectorXd& d, std::unique_ptr<HarmonicMap>& map) {
        map = std::make_unique<HarmonicMap>(domain, evaluate_frame(ref, d));
        VectorXd r = compute_Na(*map, a) - target;
        r[0] = 0.0;
        r[m] = 0.0;
        return r;
    };

    std::unique_ptr<HarmonicMap> map;
    VectorXd r = residual(out.d, map);
    double norm = r.cwiseAbs().maxCoeff() / a3;
    double moved = std::numeric_limits<double>::infinity();
    out.trace.push_back({0, norm, 0.0});
    for (int it = 1; it <= settings.max_iter && norm > settings.tol && moved > settings.tol; ++it) {
        MatrixXd jac;
        if (settings.jacobian == NewtonJacobian::full) {
            jac = na_jacobian(*map, a);
        } else {
            const DnoOperator op = assemble_dno(*map);
            if (settings.jacobian == NewtonJacobian::curvature) {
                jac = op.matrix * curvature_jacobian(map->frame());
            } else {
                VectorXd mun(n);
                for (int j = 0; j < n; ++j) mun[j] = dot_row(ref.mu, map->frame().normal, j);
                jac = -op.matrix * mun.asDiagonal() * surface_laplacian_matrix(map->frame());
            }
            jac.diagonal().array() += a3;
        }
        // endpoint values are already imposed; only interior corrections are sought
        const MatrixXd jii = jac.block(1, 1, m - 1, m - 1);
        VectorXd step = VectorXd::Zero(n);
        step.segment(1, m - 1) = -jii.fullPivLu().solve(r.segment(1, m - 1));

        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k <= settings.max_halvings; ++k, lambda *= 0.5) {
            try {
                std::unique_ptr<HarmonicMap> trial_map;
                const VectorXd trial = out.d + lambda * step;
                const VectorXd rt = residual(trial, trial_map);
                const double nt = rt.cwiseAbs().maxCoeff() / a3;
                if (nt < norm || k == settings.max_halvings) {
                    moved = lambda * step.cwiseAbs().maxCoeff();
                    out.d = trial;
                    r = rt;
                    norm = nt;
                    map = std::move(trial_map);
                    accepted = true;
                    break;
                }
            } catch (const InadmissibleState&) {
                if (k == settings.max_halvings) throw;
            }
        }
        if (!accepted) break;
        out.trace.push_back({it, norm, lambda});
    }
    out.converged = norm <= settings.tol || moved <= settings.tol;
    if (!out.converged) {
        std::string history;
        for (const auto& t : out.trace) history += fmt::format(" {:.3e}", t.residual);
        throw SolverError(fmt::format("Newton for K did not converge in {} iterations; residuals:{}", settings.max_iter, history));
    }
    return out;
}

}  // namespace wwc
