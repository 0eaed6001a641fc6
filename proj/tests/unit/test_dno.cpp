#include <doctest.h>

#include "dno.hpp"

#include <cmath>
#include <random>

using namespace wwc;

namespace {

GeometryConfig rectangle(double depth = 0.5) {
    GeometryConfig g;
    g.tank = TankShape::rectangle;
    g.depth = depth;
    g.override_angle_gate = true;
    return g;
}

GeometryConfig baseline_wedge() {
    GeometryConfig g;
    g.tank = TankShape::wedge;
    g.wall_angle_left = g.wall_angle_right = kPi / 18;
    g.override_angle_gate = true;
    return g;
}

VectorXd nodal(const ReferenceSurface& ref, double (*fn)(double, double), double k) {
    VectorXd f(ref.size());
    for (int j = 0; j < ref.size(); ++j) f[j] = fn(ref.grid.node(j), k);
    return f;
}

double cosine(double s, double k) { return std::cos(k * s); }

/// Smooth random displacement with sup norm equal to amplitude.
VectorXd random_smooth(const ReferenceSurface& ref, std::mt19937& rng, double amplitude) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double c[4];
    for (double& x : c) x = uni(rng);
    VectorXd d(ref.size());
    for (int j = 0; j < ref.size(); ++j) {
        const double s = ref.grid.node(j) / ref.length();
        d[j] = c[0] + c[1] * std::cos(kPi * s) + c[2] * std::cos(2 * kPi * s) + 0.5 * c[3] * std::sin(3 * kPi * s);
    }
    return d * (amplitude / d.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("D-N operator structure on a moved wedge surface") {
    const auto disc = make_discretization(baseline_wedge(), 32, 1.0 / 32, 0.25);
    std::mt19937 rng(11);
    const VectorXd d = random_smooth(disc->ref, rng, 0.01);
    const HarmonicMap map(*disc->domain, evaluate_frame(disc->ref, d));
    const DnoOperator op = assemble_dno(map);
    const int n = op.size();
    CHECK(op.apply(VectorXd::Ones(n)).cwiseAbs().maxCoeff() <= 1e-10 * op.matrix.cwiseAbs().maxCoeff());
    std::normal_distribution<double> gauss;
    double sym = 0.0, mean = 0.0, pos = 1.0;
    for (int trial = 0; trial < 20; ++trial) {
        VectorXd f(n), g(n);
        for (int j = 0; j < n; ++j) {
            f[j] = gauss(rng);
            g[j] = gauss(rng);
        }
        const double lhs = op.inner(op.apply(f), g), rhs = op.inner(f, op.apply(g));
        sym = std::max(sym, std::abs(lhs - rhs) / (std::sqrt(op.inner(f, f) * op.inner(g, g)) * op.matrix.norm()));
        mean = std::max(mean, std::abs(op.weights.dot(op.apply(f))) / f.norm());
        pos = std::min(pos, op.inner(op.apply(f), f) / f.squaredNorm());
    }
    CHECK(sym <= 1e-8);
    CHECK(mean <= 1e-10);
    CHECK(pos >= -1e-12);
    // Dirichlet energy vanishes only on constants
    CHECK(op.inner(op.apply(VectorXd::Ones(n)), VectorXd::Ones(n)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    const VectorXd x = disc->ref.grid.nodes();
    CHECK(op.inner(op.apply(x), x) > 1e-3);
}

TEST_CASE("inverse D-N operator round trip and rectangle eigenvectors") {
    const auto disc = make_discretization(rectangle(), 64, 1.0 / 64, 1.0);
    const HarmonicMap map(*disc->domain, evaluate_frame(disc->ref, VectorXd::Zero(65)));
    const DnoOperator op = assemble_dno(map);
    CHECK(dno_inverse(op, VectorXd::Zero(65)).f.cwiseAbs().maxCoeff() == 0.0);

    std::mt19937 rng(3);
    std::normal_distribution<double> gauss;
    VectorXd f0(65);
    for (int j = 0; j <= 64; ++j) f0[j] = gauss(rng);
    f0.array() -= op.weights.dot(f0) / op.weights.sum();
    const auto back = dno_inverse(op, op.apply(f0));
    CHECK((back.f - f0).cwiseAbs().maxCoeff() <= 1e-8 * f0.cwiseAbs().maxCoeff());

    for (int k = 1; k <= 4; ++k) {
        const double kk = k * kPi;
        VectorXd g = nodal(disc->ref, cosine, kk);
        const auto inv = dno_inverse(op, g, true);
        const VectorXd expected = g / (kk * std::tanh(kk * 0.5));
        CHECK((inv.f - expected).norm() / expected.norm() < 0.02);
    }
    CHECK_THROWS_AS(dno_inverse(op, VectorXd::Ones(65)), Error);
    CHECK(dno_inverse(op, VectorXd::Ones(65), true).mean_defect > 0.5);
}

TEST_CASE("third-order operator A and its shifted inverse") {
    const auto disc = make_discretization(rectangle(), 64, 1.0 / 64, 1.0);
    const HarmonicMap map(*disc->domain, evaluate_frame(disc->ref, VectorXd::Zero(65)));
    const DnoOperator op = assemble_dno(map);
    CHECK(apply_A(op, VectorXd::Ones(65)).cwiseAbs().maxCoeff() == 0.0);
    // linear data: round-off of the third-order operator, relative to its size
    const double scale = op.matrix.norm() * surface_laplacian_matrix(op.frame).norm();
    CHECK(apply_A(op, disc->ref.grid.nodes()).cwiseAbs().maxCoeff() < 1e-14 * scale);
    for (int k = 1; k <= 3; ++k) {
        const double kk = k * kPi;
        const VectorXd f = nodal(disc->ref, cosine, kk);
        const double symbol = kk * kk * kk * std::tanh(kk * 0.5);
        const VectorXd af = apply_A(op, f);
        CHECK((af - symbol * f).norm() / (symbol * f.norm()) < 0.02);

        const double a = 2.0;
        const VectorXd rhs = (a * a * a + symbol) * f;
        const VectorXd sol = solve_Aa(op, a, rhs, f[0], f[64]);
        // s(1 - s) lies in the Dirichlet kernel of A, so consistency errors are damped only by a^3
        CHECK((sol - f).cwiseAbs().maxCoeff() <= (af - symbol * f).cwiseAbs().maxCoeff() / (a * a * a));
        // with the discrete operator on the right-hand side the cosine is recovered to solver tolerance
        const VectorXd rhs_h = a * a * a * f + af;
        CHECK((solve_Aa(op, a, rhs_h, f[0], f[64]) - f).cwiseAbs().maxCoeff() < 1e-8);
    }
    const double c = 0.7;
    const VectorXd flat = solve_Aa(op, 2.0, VectorXd::Constant(65, 8.0 * c), c, c);
    CHECK((flat.array() - c).abs().maxCoeff() < 1e-8);

    std::mt19937 rng(5);
    std::normal_distribution<double> gauss;
    VectorXd r(65);
    for (int j = 0; j <= 64; ++j) r[j] = gauss(rng);
    for (double a : {2.0, 4.0}) CHECK(solve_Aa(op, a, r, 0.0, 0.0).allFinite());
}

TEST_CASE("N_a for flat, lifted and circular surfaces") {
    const double a = 2.0;
    const auto disc = make_discretization(rectangle(), 32, 1.0 / 32, 0.5);
    const HarmonicMap flat(*disc->domain, evaluate_frame(disc->ref, VectorXd::Zero(33)));
    CHECK(compute_Na(flat, a).cwiseAbs().maxCoeff() < 1e-12);
    const HarmonicMap lifted(*disc->domain, evaluate_frame(disc->ref, VectorXd::Constant(33, 0.01)));
    CHECK((compute_Na(lifted, a).array() - 8.0 * 0.01).abs().maxCoeff() < 1e-10);
    // dome y = c + sqrt(R^2 - x^2) - R over vertical walls: constant curvature 1/R
    const double radius = 5.0;
    VectorXd d(33);
    for (int j = 0; j <= 32; ++j) {
        const double x = disc->ref.gamma_star(j, 0);
        d[j] = 0.004 + std::sqrt(radius * radius - x * x) - radius;
    }
    const HarmonicMap dome(*disc->domain, evaluate_frame(disc->ref, d));
    CHECK((dome.frame().kappa.array() - 1.0 / radius).abs().maxCoeff() < 1e-8);
    CHECK((compute_Na(dome, a) - a * a * a * d).cwiseAbs().maxCoeff() < 1e-6 * a * a * a * d.cwiseAbs().maxCoeff());
}

TEST_CASE("K inversion recovers random admissible states") {
    const auto disc = make_discretization(baseline_wedge(), 32, 1.0 / 32, 0.25);
    const double a = 2.0;
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 3; ++trial) {
        const VectorXd d0 = random_smooth(disc->ref, rng, 0.5 * disc->ref.delta);
        const HarmonicMap map(*disc->domain, evaluate_frame(disc->ref, d0));
        const VectorXd target = compute_Na(map, a);
        const auto inv = invert_K(*disc->domain, a, target, d0[0], d0[32], VectorXd::Zero(33));
        CHECK(inv.converged);
        CHECK(inv.trace.size() - 1 <= 8);
        CHECK((inv.d - d0).cwiseAbs().maxCoeff() <= 1e-6 * d0.cwiseAbs().maxCoeff());
        // quadratic tail: the last residual drops much faster than the linear trend
        const auto& t = inv.trace;
        if (t.size() >= 3 && t[t.size() - 2].residual > 1e-9) {
            const double r1 = t[t.size() - 1].residual / t[t.size() - 2].residual;
            const double r0 = t[t.size() - 2].residual / t[t.size() - 3].residual;
            CHECK(r1 <= 0.3 * r0);
        }
    }
}

TEST_CASE("K inversion fixed points") {
    const double a = 2.0;
    {
        const auto disc = make_discretization(baseline_wedge(), 32, 1.0 / 32, 0.25);
        const auto inv = invert_K(*disc->domain, a, VectorXd::Zero(33), 0.0, 0.0, VectorXd::Zero(33));
        CHECK(inv.d.cwiseAbs().maxCoeff() == 0.0);
    }
    {
        const auto disc = make_discretization(rectangle(), 32, 1.0 / 32, 0.5);
        const double c = 0.005;
        VectorXd guess = VectorXd::Zero(33);
        const auto inv = invert_K(*disc->domain, a, VectorXd::Constant(33, a * a * a * c), c, c, guess);
        CHECK((inv.d.array() - c).abs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("simplified Jacobians converge where the contact direction is constant") {
    const auto disc = make_discretization(rectangle(), 32, 1.0 / 32, 0.5);
    const double a = 2.0;
    std::mt19937 rng(99);
    const VectorXd d0 = random_smooth(disc->ref, rng, 0.5 * disc->ref.delta);
    const HarmonicMap map(*disc->domain, evaluate_frame(disc->ref, d0));
    for (auto kind : {NewtonJacobian::principal, NewtonJacobian::curvature}) {
        NewtonSettings s;
        s.jacobian = kind;
        s.max_iter = 60;
        const auto inv = invert_K(*disc->domain, a, compute_Na(map, a), d0[0], d0[32], VectorXd::Zero(33), s);
        CHECK((inv.d - d0).cwiseAbs().maxCoeff() <= 1e-6 * d0.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("full Jacobian matches finite differences of N_a") {
    const auto disc = make_discretization(baseline_wedge(), 16, 1.0 / 16, 0.25);
    const double a = 2.0;
    std::mt19937 rng(7);
    const VectorXd d = random_smooth(disc->ref, rng, 0.4 * disc->ref.delta);
    const HarmonicMap map(*disc->domain, evaluate_frame(disc->ref, d));
    const MatrixXd jac = na_jacobian(map, a);
    const int n = d.size();
    const double eps = 1e-6;
    MatrixXd fd(n, n);
    for (int j = 0; j < n; ++j) {
        VectorXd dp = d, dm = d;
        dp[j] += eps;
        dm[j] -= eps;
        const HarmonicMap mp(*disc->domain, evaluate_frame(disc->ref, dp));
        const HarmonicMap mm(*disc->domain, evaluate_frame(disc->ref, dm));
        fd.col(j) = (compute_Na(mp, a) - compute_Na(mm, a)) / (2 * eps);
    }
    CHECK((jac - fd).norm() <= 1e-5 * fd.norm());
}
