#include <doctest.h>

#include "chebyshev.hpp"

using namespace wwc;

TEST_CASE("chebyshev nodes are ordered and antisymmetric") {
    const ChebyshevGrid g(16, 2.0);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(16) == doctest::Approx(2.0).epsilon(1e-15));
    for (int j = 0; j < 16; ++j) CHECK(g.node(j + 1) > g.node(j));
    for (int j = 0; j <= 16; ++j) CHECK(g.node(j) + g.node(16 - j) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("differentiation is exact on polynomials") {
    const ChebyshevGrid g(12, 1.5);
    const VectorXd s = g.nodes();
    const VectorXd f = s.array().square();
    const VectorXd df = g.derivative(f);
    const VectorXd d2f = g.diff2() * f;
    for (int j = 0; j <= 12; ++j) {
        CHECK(df[j] == doctest::Approx(2.0 * s[j]).epsilon(1e-11));
        CHECK(d2f[j] == doctest::Approx(2.0).epsilon(1e-9));
    }
    const VectorXd ones = VectorXd::Ones(13);
    CHECK(g.derivative(ones).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("clenshaw-curtis weights integrate polynomials and smooth functions") {
    const ChebyshevGrid g(20, 3.0);
    CHECK(g.quad().sum() == doctest::Approx(3.0).epsilon(1e-14));
    const VectorXd s = g.nodes();
    CHECK(g.integrate(s.array().pow(5).matrix()) == doctest::Approx(std::pow(3.0, 6) / 6).epsilon(1e-12));
    CHECK(g.integrate(s.array().exp().matrix()) == doctest::Approx(std::exp(3.0) - 1.0).epsilon(1e-12));
}

TEST_CASE("barycentric interpolation reproduces smooth functions") {
    const ChebyshevGrid g(24, 1.0);
    const VectorXd f = g.nodes().array().sin();
    for (double s : {0.0, 0.013, 0.5, 0.77, 1.0}) CHECK(g.interpolate(f, s) == doctest::Approx(std::sin(s)).epsilon(1e-13));
}

TEST_CASE("coefficient transform round trips and filter keeps low modes") {
    const ChebyshevGrid g(64, 1.0);
    const VectorXd f = (3.0 * g.nodes().array()).cos();
    CHECK((g.from_coefficients(g.to_coefficients(f)) - f).cwiseAbs().maxCoeff() < 1e-13);
    const VectorXd c = g.to_coefficients(f);
    CHECK(std::abs(c[40]) < 1e-14);
    CHECK((g.filter(f, 36.0, 8) - f).cwiseAbs().maxCoeff() < 1e-12);
    VectorXd rough = VectorXd::Zero(65);
    rough[32] = 1.0;
    CHECK(g.filter(rough, 36.0, 8).norm() < rough.norm());
}
