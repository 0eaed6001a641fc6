#include <doctest.h>

#include "geometry.hpp"

using namespace wwc;

namespace {

GeometryConfig rectangle_config() {
    GeometryConfig g;
    g.tank = TankShape::rectangle;
    g.depth = 0.5;
    g.override_angle_gate = true;
    return g;
}

GeometryConfig wedge_config(double angle) {
    GeometryConfig g;
    g.tank = TankShape::wedge;
    g.wall_angle_left = g.wall_angle_right = angle;
    return g;
}

}  // namespace

TEST_CASE("reference surface invariants on the wedge") {
    const auto ref = build_reference(wedge_config(kPi / 20), 32);
    CHECK(ref.omega_left == doctest::Approx(kPi / 20).epsilon(1e-14));
    CHECK(ref.omega_right == doctest::Approx(kPi / 20).epsilon(1e-14));
    CHECK(std::abs(ref.mu(0, 0) + ref.tau_b_left.x()) < 1e-12);
    CHECK(std::abs(ref.mu(0, 1) + ref.tau_b_left.y()) < 1e-12);
    CHECK(std::abs(ref.mu(32, 0) - ref.tau_b_right.x()) < 1e-12);
    CHECK(std::abs(ref.mu(32, 1) - ref.tau_b_right.y()) < 1e-12);
    for (int j = 0; j <= 32; ++j) CHECK(dot_row(ref.mu, ref.normal_star, j) >= ref.c0);
    CHECK((ref.gamma_b_star.front() - ref.p_left).norm() == 0.0);
    CHECK((ref.gamma_b_star.back() - ref.p_right).norm() == 0.0);
    CHECK(row(ref.gamma_star, 0) == ref.p_left);
}

TEST_CASE("reference angle gate") {
    CHECK_NOTHROW(build_reference(wedge_config(kPi / 20), 16));
    CHECK_THROWS_AS(build_reference(wedge_config(kPi / 8), 16), ConfigError);
    auto cfg = wedge_config(kPi / 8);
    cfg.override_angle_gate = true;
    CHECK_NOTHROW(build_reference(cfg, 16));
    GeometryConfig rect = rectangle_config();
    rect.override_angle_gate = false;
    CHECK_THROWS_AS(build_reference(rect, 16), ConfigError);
}

TEST_CASE("vertical walls give mu equal to the normal") {
    const auto ref = build_reference(rectangle_config(), 16);
    for (int j = 0; j <= 16; ++j) {
        CHECK(ref.mu(j, 0) == 0.0);
        CHECK(ref.mu(j, 1) == 1.0);
    }
}

TEST_CASE("flat frame and rigid translation") {
    const auto ref = build_reference(rectangle_config(), 24);
    for (double c : {0.0, 0.013}) {
        const auto f = evaluate_frame(ref, VectorXd::Constant(25, c));
        CHECK(f.kappa.cwiseAbs().maxCoeff() < 1e-10);
        for (int j = 0; j <= 24; ++j) {
            CHECK(f.normal(j, 0) == doctest::Approx(0.0));
            CHECK(f.normal(j, 1) == doctest::Approx(1.0));
            CHECK(f.points(j, 1) == doctest::Approx(c));
        }
        CHECK(f.omega_left == doctest::Approx(kPi / 2).epsilon(1e-12));
        CHECK(f.omega_right == doctest::Approx(kPi / 2).epsilon(1e-12));
    }
}

TEST_CASE("circular arc curvature and Laplace-Beltrami") {
    const auto ref = build_reference(rectangle_config(), 32);
    const double radius = 2.0;
    const double xc = 0.0, yc = -std::sqrt(radius * radius - 0.25);
    VectorXd d(33);
    for (int j = 0; j <= 32; ++j) {
        const double x = ref.gamma_star(j, 0);
        d[j] = yc + std::sqrt(radius * radius - (x - xc) * (x - xc));
    }
    const auto f = evaluate_frame(ref, d);
    for (int j = 0; j <= 32; ++j) CHECK(f.kappa[j] == doctest::Approx(1.0 / radius).epsilon(1e-9));
    CHECK((curvature_from_normal(f) - f.kappa).cwiseAbs().maxCoeff() < 1e-8);

    // u = x / R restricted to the circle is cos(theta); its Laplace-Beltrami is -cos(theta) / R^2
    VectorXd u(33), expect(33);
    for (int j = 0; j <= 32; ++j) {
        u[j] = (f.points(j, 0) - xc) / radius;
        expect[j] = -u[j] / (radius * radius);
    }
    CHECK((surface_laplacian(f, u) - expect).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("surface operators on a flat segment") {
    const auto ref = build_reference(rectangle_config(), 16);
    const auto f = evaluate_frame(ref, VectorXd::Zero(17));
    const VectorXd s = ref.grid.nodes();
    const VectorXd q = s.array().square();
    CHECK((surface_gradient(f, q) - 2.0 * s).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((surface_laplacian(f, q) - VectorXd::Constant(17, 2.0)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(surface_gradient(f, VectorXd::Ones(17)).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(surface_laplacian(f, VectorXd::Ones(17)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("contact angles against inclined walls") {
    for (double th : {kPi / 20, kPi / 3}) {
        auto cfg = wedge_config(th);
        cfg.override_angle_gate = true;
        const auto ref = build_reference(cfg, 16);
        const auto f = evaluate_frame(ref, VectorXd::Zero(17));
        CHECK(f.omega_left == doctest::Approx(th).epsilon(1e-12));
        CHECK(f.omega_right == doctest::Approx(th).epsilon(1e-12));
        // tau_b . N = -sin(omega_l) at the left contact point
        CHECK(ref.tau_b_left.dot(row(f.normal, 0)) == doctest::Approx(-std::sin(f.omega_left)).epsilon(1e-12));
    }
}

TEST_CASE("frame identities for a generic admissible displacement") {
    const auto ref = build_reference(wedge_config(kPi / 20), 32);
    VectorXd d(33);
    for (int j = 0; j <= 32; ++j) {
        const double s = ref.grid.node(j);
        d[j] = 0.004 * std::cos(3.0 * s) + 0.002 * std::sin(7.0 * s);
    }
    const auto f = evaluate_frame(ref, d);
    for (int j = 0; j <= 32; ++j) {
        CHECK(row(f.tau, j).norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(dot_row(f.tau, f.normal, j)) < 1e-12);
    }
    CHECK_NOTHROW(check_admissible(ref, f));
}

TEST_CASE("both curvature formulas agree under refinement") {
    double prev = 1.0;
    for (int m : {32, 64, 96}) {
        const auto ref = build_reference(wedge_config(kPi / 20), m);
        VectorXd d(m + 1);
        for (int j = 0; j <= m; ++j) {
            const double s = ref.grid.node(j);
            d[j] = 0.004 * std::cos(3.0 * s) + 0.002 * std::sin(7.0 * s);
        }
        const auto f = evaluate_frame(ref, d);
        const double gap = (curvature_from_normal(f) - f.kappa).cwiseAbs().maxCoeff();
        MESSAGE("M = " << m << " curvature gap " << gap);
        CHECK(gap < 0.1 * prev);
        prev = gap;
    }
    CHECK(prev < 1e-8);
}

TEST_CASE("mirror symmetry of the frame") {
    const auto ref = build_reference(wedge_config(kPi / 20), 32);
    VectorXd d(33);
    for (int j = 0; j <= 32; ++j) d[j] = 0.005 * std::cos(2.0 * kPi * ref.gamma_star(j, 0));
    for (int j = 0; j <= 16; ++j) d[32 - j] = d[j];
    const auto f = evaluate_frame(ref, d);
    for (int j = 0; j <= 32; ++j) CHECK(f.kappa[j] == doctest::Approx(f.kappa[32 - j]).epsilon(1e-9));
    CHECK(f.omega_left == doctest::Approx(f.omega_right).epsilon(1e-12));
}

TEST_CASE("curvature Jacobian matches finite differences") {
    const auto ref = build_reference(wedge_config(kPi / 20), 16);
    VectorXd d(17);
    for (int j = 0; j <= 16; ++j) d[j] = 0.003 * std::sin(4.0 * ref.grid.node(j));
    const auto f = evaluate_frame(ref, d);
    const MatrixXd J = curvature_jacobian(f);
    const double eps = 1e-7;
    for (int j : {0, 5, 8, 16}) {
        VectorXd dp = d, dm = d;
        dp[j] += eps;
        dm[j] -= eps;
        const VectorXd fd = (evaluate_frame(ref, dp).kappa - evaluate_frame(ref, dm).kappa) / (2 * eps);
        CHECK((fd - J.col(j)).cwiseAbs().maxCoeff() < 1e-5 * (1.0 + J.col(j).cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("admissibility rejects large displacements") {
    const auto ref = build_reference(wedge_config(kPi / 20), 16);
    const auto f = evaluate_frame(ref, VectorXd::Constant(17, 0.03));
    CHECK_THROWS_AS(check_admissible(ref, f), InadmissibleState);
}

TEST_CASE("angle gate") {
    CHECK(angle_gate(2.0) == doctest::Approx(kPi / 2));
    CHECK(angle_gate(9.0) == doctest::Approx(kPi / 16));
    CHECK(angle_gate(8.5) == doctest::Approx(kPi / 16));
    for (double s : {8.01, 8.3, 8.999}) CHECK(angle_gate(s) == kPi / 16);
    double prev = angle_gate(2.0);
    for (double s = 2.0; s < 12.0; s += 0.25) {
        CHECK(angle_gate(s) <= prev);
        prev = angle_gate(s);
    }
    CHECK_THROWS(angle_gate(1.5));
}
