#include "studies.hpp"

#include "monitor.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <functional>
#include <limits>
#include <random>

namespace wwc {

namespace {

using Scalar2 = std::function<double(const Vec2&)>;
using Vector2Fn = std::function<Vec2(const Vec2&)>;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

VectorXd surface_trace(const CurveFrame& frame, const Scalar2& u) {
    VectorXd f(frame.points.rows());
    for (Eigen::Index j = 0; j < f.size(); ++j) f[j] = u(row(frame.points, j));
    return f;
}

BottomData bottom_flux(const HarmonicMap& map, const Vector2Fn& grad) {
    BottomData g;
    for (const auto& e : map.mesh().bottom_edges) {
        const Vec2 a = map.xy()[e.a], b = map.xy()[e.b];
        const Vec2 n = -perp((b - a).normalized());
        g.push_back({grad(a).dot(n), grad(b).dot(n)});
    }
    return g;
}

/// L2 and H1-seminorm errors with the three-point edge-midpoint rule.
std::pair<double, double> errors(const HarmonicMap& map, const VectorXd& uh, const Scalar2& u, const Vector2Fn& grad) {
    const auto gh = map.gradient(uh);
    double l2 = 0.0, h1 = 0.0;
    for (int t = 0; t < map.mesh().n_triangles(); ++t) {
        const auto& v = map.mesh().tri[t];
        for (int q = 0; q < 3; ++q) {
            const int i = v[q], j = v[(q + 1) % 3];
            const Vec2 x = 0.5 * (map.xy()[i] + map.xy()[j]);
            const double e = 0.5 * (uh[i] + uh[j]) - u(x);
            l2 += map.area()[t] / 3.0 * e * e;
            h1 += map.area()[t] / 3.0 * (gh[t] - grad(x)).squaredNorm();
        }
    }
    return {std::sqrt(l2), std::sqrt(h1)};
}

StepperConfig unfiltered(const RunConfig& cfg) {
    StepperConfig s = stepper_config(cfg);
    s.filter = false;
    return s;
}

SurfaceState integrate(const ReferenceDomain& domain, SurfaceState s, double dt, int steps, const StepperConfig& cfg) {
    for (int k = 0; k < steps; ++k) s = rk4_step(domain, s, dt, cfg);
    return s;
}

}  // namespace

int surface_nodes_for(double h) { return 2 * static_cast<int>(std::lround(0.8 / h)); }

std::vector<StudyRow> elliptic_convergence(const GeometryConfig& geometry, const std::vector<double>& hs) {
    if (hs.size() < 2) throw Error(ErrorCode::invalid_argument, "need >= 2 levels");
    const Scalar2 harmonic = [](const Vec2& x) { return x.x() * x.x() - x.y() * x.y(); };
    const Vector2Fn harmonic_grad = [](const Vec2& x) { return Vec2(2 * x.x(), -2 * x.y()); };
    const Scalar2 poisson = [](const Vec2& x) { return 0.5 * x.squaredNorm() + 0.3 * x.x(); };
    const Vector2Fn poisson_grad = [](const Vec2& x) { return Vec2(x.x() + 0.3, x.y()); };

    std::vector<StudyRow> rows;
    std::vector<double> prev(4, kNaN);
    for (std::size_t level = 0; level < hs.size(); ++level) {
        const double h = hs[level];
        const int m = surface_nodes_for(h);
        const auto disc = make_discretization(geometry, m, h, 1.0);
        VectorXd d(m + 1);
        for (int j = 0; j <= m; ++j) d[j] = 0.004 * std::sin(kPi * disc->ref.grid.node(j) / disc->ref.length()) + 0.002;
        const HarmonicMap map(*disc->domain, evaluate_frame(disc->ref, d));

        const auto uh = solve_mixed(map, {}, surface_trace(map.frame(), harmonic), bottom_flux(map, harmonic_grad));
        const auto [hl2, hh1] = errors(map, uh.values, harmonic, harmonic_grad);
        Source two;
        two.nodal = VectorXd::Constant(disc->mesh.n_vertices(), 2.0);
        const auto ph = solve_mixed(map, two, surface_trace(map.frame(), poisson), bottom_flux(map, poisson_grad));
        const auto [pl2, ph1] = errors(map, ph.values, poisson, poisson_grad);

        const double err[4] = {hl2, hh1, pl2, ph1};
        const char* names[4] = {"harmonic L2", "harmonic H1", "poisson L2", "poisson H1"};
        const double minimum[4] = {1.8, 0.9, 1.8, 0.9};
        for (int c = 0; c < 4; ++c) {
            StudyRow r;
            r.study = "elliptic";
            r.quantity = names[c];
            r.resolution = h;
            r.value = err[c];
            r.rate = level == 0 ? kNaN : std::log2(prev[c] / err[c]) / std::log2(hs[level - 1] / h);
            r.threshold = minimum[c];
            r.pass = level == 0 || r.rate >= minimum[c];
            rows.push_back(r);
            prev[c] = err[c];
        }
    }
    return rows;
}

std::vector<StudyRow> dno_spectrum(double length, double depth, int m, double h, int modes, double tolerance) {
    GeometryConfig g;
    g.tank = TankShape::rectangle;
    g.length = length;
    g.depth = depth;
    g.override_angle_gate = true;
    const auto disc = make_discretization(g, m, h, 1.0);
    const HarmonicMap map(*disc->domain, evaluate_frame(disc->ref, VectorXd::Zero(m + 1)));
    const DnoOperator op = assemble_dno(map);
    // W N is symmetric; eigenpairs of the pencil (W N, W)
    const MatrixXd wn = op.weights.asDiagonal() * op.matrix;
    const MatrixXd sym = 0.5 * (wn + wn.transpose());
    const Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> eig(sym, MatrixXd(op.weights.asDiagonal()), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw SolverError("D-N eigenvalue solve failed");
    std::vector<StudyRow> rows;
    for (int k = 1; k <= modes; ++k) {
        const double kk = k * kPi / length;
        const double exact = kk * std::tanh(kk * depth);
        StudyRow r;
        r.study = "dno_spectrum";
        r.quantity = fmt::format("lambda_{}", k);
        r.resolution = h;
        r.value = eig.eigenvalues()[k];
        r.rate = std::abs(r.value - exact) / exact;
        r.threshold = tolerance;
        r.pass = r.rate <= tolerance;
        rows.push_back(r);
    }
    return rows;
}

std::vector<RoundtripSample> k_roundtrip(const RunConfig& cfg, int samples) {
    const auto disc = make_discretization(cfg.geometry, cfg.numerics.m, cfg.numerics.h, cfg.numerics.grading);
    const ReferenceSurface& ref = disc->ref;
    NewtonSettings settings;
    settings.tol = cfg.numerics.newton_tol;
    settings.max_iter = cfg.numerics.newton_max_iter;
    settings.jacobian = cfg.numerics.newton_jacobian;
    std::mt19937_64 rng(cfg.run.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<RoundtripSample> out;
    for (int k = 0; k < samples; ++k) {
        double c[4];
        for (double& x : c) x = uni(rng);
        VectorXd d(ref.size());
        for (int j = 0; j < ref.size(); ++j) {
            const double s = ref.grid.node(j) / ref.length();
            d[j] = c[0] + c[1] * std::cos(kPi * s) + c[2] * std::cos(2 * kPi * s) + 0.5 * c[3] * std::sin(3 * kPi * s);
        }
        d *= 0.5 * ref.delta / d.cwiseAbs().maxCoeff();
        const HarmonicMap map(*disc->domain, evaluate_frame(ref, d));
        const VectorXd target = compute_Na(map, cfg.physics.a);
        const int m = ref.size() - 1;
        const KInversion inv = invert_K(*disc->domain, cfg.physics.a, target, d[0], d[m], VectorXd::Zero(m + 1), settings);
        out.push_back({(inv.d - d).cwiseAbs().maxCoeff() / d.cwiseAbs().maxCoeff(), static_cast<int>(inv.trace.size()) - 1});
    }
    return out;
}

RichardsonResult richardson_order(const RunConfig& cfg, int steps) {
    const auto disc = make_discretization(cfg.geometry, cfg.numerics.m, cfg.numerics.h, cfg.numerics.grading);
    const StepperConfig sc = unfiltered(cfg);
    const SurfaceState s0 = initial_state(disc->ref, cfg);
    RichardsonResult r;
    r.steps = steps;
    r.dt = cfl_dt(evaluate_frame(disc->ref, s0.d), cfg.numerics.cfl, cfg.physics.sigma);
    const SurfaceState a = integrate(*disc->domain, s0, r.dt, steps, sc);
    const SurfaceState b = integrate(*disc->domain, s0, 0.5 * r.dt, 2 * steps, sc);
    const SurfaceState c = integrate(*disc->domain, s0, 0.25 * r.dt, 4 * steps, sc);
    r.diff_coarse = (a.d - b.d).cwiseAbs().maxCoeff();
    r.diff_fine = (b.d - c.d).cwiseAbs().maxCoeff();
    r.order = std::log2(r.diff_coarse / r.diff_fine);
    return r;
}

std::vector<IdentityLevel> identity_time_study(const RunConfig& cfg, int warmup) {
    const auto disc = make_discretization(cfg.geometry, cfg.numerics.m, cfg.numerics.h, cfg.numerics.grading);
    const StepperConfig sc = unfiltered(cfg);
    SurfaceState s = initial_state(disc->ref, cfg);
    const double dt = cfl_dt(evaluate_frame(disc->ref, s.d), cfg.numerics.cfl, cfg.physics.sigma);
    s = integrate(*disc->domain, s, dt, warmup, sc);
    const RhsBundle before = build_rhs_bundle(*disc->domain, s, cfg.physics);
    std::vector<IdentityLevel> out;
    for (double step : {dt, 0.5 * dt, 0.25 * dt}) {
        const SurfaceState next = rk4_step(*disc->domain, s, step, sc);
        const RhsBundle after = build_rhs_bundle(*disc->domain, next, cfg.physics);
        out.push_back({step, dtk_identity_residual(before, after, step), euler_recovery_defect(before, after, step, cfg.physics)});
    }
    return out;
}

std::vector<IdentityLevel> euler_joint_refinement(const RunConfig& cfg, int levels, int coarse_steps) {
    if (levels < 2) throw Error(ErrorCode::invalid_argument, "need >= 2 levels");
    std::vector<IdentityLevel> out;
    double t_end = 0.0;
    for (int level = 0; level < levels; ++level) {
        RunConfig c = cfg;
        c.numerics.m = cfg.numerics.m + level * cfg.numerics.m / 2;
        c.numerics.m += c.numerics.m % 2;
        const auto disc = make_discretization(c.geometry, c.numerics.m, c.numerics.h, c.numerics.grading);
        const StepperConfig sc = unfiltered(c);
        SurfaceState s = initial_state(disc->ref, c);
        const double dt0 = cfl_dt(evaluate_frame(disc->ref, s.d), c.numerics.cfl, c.physics.sigma);
        if (level == 0) t_end = coarse_steps * dt0;
        const int steps = std::max(1, static_cast<int>(std::ceil(t_end / dt0 - 1e-9)));
        const double dt = t_end / steps;
        s = integrate(*disc->domain, s, dt, steps - 1, sc);
        const RhsBundle before = build_rhs_bundle(*disc->domain, s, c.physics);
        const SurfaceState next = rk4_step(*disc->domain, s, dt, sc);
        const RhsBundle after = build_rhs_bundle(*disc->domain, next, c.physics);
        out.push_back({dt, dtk_identity_residual(before, after, dt), euler_recovery_defect(before, after, dt, c.physics)});
    }
    return out;
}

}  // namespace wwc
