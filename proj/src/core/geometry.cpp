#include "geometry.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace wwc {
namespace {

Vec2 line_intersection(const Vec2& p, const Vec2& dp, const Vec2& q, const Vec2& dq) {
    const double den = cross(dp, dq);
    if (std::abs(den) < 1e-14) throw ConfigError("tank walls are parallel; cannot close the bottom");
    const double t = cross(q - p, dq) / den;
    return p + t * dp;
}

double polygon_area(const std::vector<Vec2>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
    return 0.5 * a;
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

ReferenceSurface build_reference(const GeometryConfig& cfg, int m) {
    ReferenceSurface ref;
    const double len = cfg.length;
    ref.grid = ChebyshevGrid(m, len);
    ref.c0 = cfg.c0;
    ref.delta = cfg.delta;

    double th_l = cfg.wall_angle_left;
    double th_r = cfg.wall_angle_right;
    if (cfg.tank == TankShape::rectangle) th_l = th_r = kPi / 2;

    ref.p_left = Vec2(-0.5 * len, 0.0);
    ref.p_right = Vec2(0.5 * len, 0.0);
    ref.tau_b_left = Vec2(std::cos(th_l), -std::sin(th_l));
    ref.tau_b_right = Vec2(std::cos(th_r), std::sin(th_r));
    if (th_l == kPi / 2) ref.tau_b_left = Vec2(0.0, -1.0);
    if (th_r == kPi / 2) ref.tau_b_right = Vec2(0.0, 1.0);

    std::vector<Vec2> bottom{ref.p_left};
    switch (cfg.tank) {
        case TankShape::wedge:
            bottom.push_back(line_intersection(ref.p_left, ref.tau_b_left, ref.p_right, ref.tau_b_right));
            if (th_l == th_r) bottom.back().x() = 0.0;
            break;
        case TankShape::rectangle:
            bottom.emplace_back(-0.5 * len, -cfg.depth);
            bottom.emplace_back(0.5 * len, -cfg.depth);
            break;
        case TankShape::trapezoid: {
            const Vec2 bl = ref.p_left + (cfg.depth / std::sin(th_l)) * ref.tau_b_left;
            const Vec2 br = ref.p_right - (cfg.depth / std::sin(th_r)) * ref.tau_b_right;
            if (br.x() - bl.x() <= 1e-9 * len)
                throw ConfigError("[geometry] trapezoid walls meet above the requested depth; use tank = wedge");
            bottom.push_back(bl);
            bottom.push_back(br);
            break;
        }
    }
    bottom.push_back(ref.p_right);
    if (bottom[1].y() >= 0.0) throw ConfigError("[geometry] tank bottom lies above the surface");
    ref.gamma_b_star = bottom;
    ref.straight_left = (bottom[1] - bottom[0]).norm();
    ref.straight_right = (bottom[bottom.size() - 1] - bottom[bottom.size() - 2]).norm();
    ref.dry_left = ref.dry_right = cfg.wall_extension * len;
    ref.gamma_fix.push_back(ref.p_left - ref.dry_left * ref.tau_b_left);
    ref.gamma_fix.insert(ref.gamma_fix.end(), bottom.begin(), bottom.end());
    ref.gamma_fix.push_back(ref.p_right + ref.dry_right * ref.tau_b_right);
    ref.bottom_length = 0.0;
    for (std::size_t i = 0; i + 1 < bottom.size(); ++i) ref.bottom_length += (bottom[i + 1] - bottom[i]).norm();

    std::vector<Vec2> poly(bottom.begin(), bottom.end());
    ref.area = polygon_area(poly);

    ref.omega_left = std::atan2(cross(ref.tau_b_left, Vec2(1, 0)), ref.tau_b_left.dot(Vec2(1, 0)));
    ref.omega_right = std::atan2(cross(Vec2(-1, 0), -ref.tau_b_right), Vec2(-1, 0).dot(-ref.tau_b_right));
    ref.symmetric = std::abs(th_l - th_r) == 0.0;

    const int n = m + 1;
    ref.gamma_star.resize(n, 2);
    ref.normal_star.resize(n, 2);
    ref.mu.resize(n, 2);
    const double ell = cfg.blend_length * len;
    const Vec2 mu_l = -ref.tau_b_left;
    const Vec2 mu_r = ref.tau_b_right;
    for (int j = 0; j < n; ++j) {
        const double s = ref.grid.node(j);
        ref.gamma_star.row(j) << ref.p_left.x() + s, 0.0;
        ref.normal_star.row(j) << 0.0, 1.0;
        const double el = std::exp(-(s / ell) * (s / ell));
        const double er = std::exp(-((len - s) / ell) * ((len - s) / ell));
        const double bl = el * (1.0 - er);
        const double br = er * (1.0 - el);
        const double bc = (1.0 - el) * (1.0 - er);
        Vec2 mu = bl * mu_l + br * mu_r + bc * Vec2(0, 1);
        ref.mu.row(j) = mu.normalized().transpose();
    }
    if (ref.symmetric) {
        // mirror so that left-right symmetry holds to the last bit
        for (int j = 0; j < n / 2; ++j) {
            ref.mu(m - j, 0) = -ref.mu(j, 0);
            ref.mu(m - j, 1) = ref.mu(j, 1);
            ref.gamma_star(m - j, 0) = -ref.gamma_star(j, 0);
        }
        if (m % 2 == 0) {
            ref.mu.row(m / 2) << 0.0, 1.0;
            ref.gamma_star(m / 2, 0) = 0.0;
        }
    }

    for (int j = 0; j < n; ++j) {
        const double t = dot_row(ref.mu, ref.normal_star, j);
        if (t < ref.c0)
            throw ConfigError(fmt::format("mu.N* = {:.4g} below c0 = {:.4g} at node {}", t, ref.c0, j));
    }
    const double gate = kPi / 16;
    for (double w : {ref.omega_left, ref.omega_right}) {
        if (!cfg.override_angle_gate && !(w > 0.0 && w < gate))
            throw ConfigError(fmt::format(
                "reference contact angle {:.6g} rad outside (0, pi/16); set override_angle_gate to proceed", w));
    }
    return ref;
}

CurveFrame evaluate_frame(const ReferenceSurface& ref, const VectorXd& d) {
    const int n = ref.size();
    if (d.size() != n) throw Error(ErrorCode::invalid_argument, "displacement has wrong length");
    CurveFrame f;
    f.ref = &ref;
    f.d = d;
    f.points = ref.gamma_star;
    for (int j = 0; j < n; ++j) f.points.row(j) += d[j] * ref.mu.row(j);
    const MatrixXd& D = ref.grid.diff();
    f.dpoints = D * f.points;
    f.ddpoints = D * f.dpoints;
    f.metric.resize(n);
    f.tau.resize(n, 2);
    f.normal.resize(n, 2);
    f.kappa.resize(n);
    for (int j = 0; j < n; ++j) {
        const Vec2 dp = row(f.dpoints, j);
        const Vec2 ddp = row(f.ddpoints, j);
        const double g = dp.norm();
        if (!(g >= 1e-10)) throw InadmissibleState(fmt::format("degenerate surface metric {:.3g} at node {}", g, j));
        f.metric[j] = g;
        const Vec2 t = dp / g;
        f.tau.row(j) = t.transpose();
        f.normal.row(j) = perp(t).transpose();
        f.kappa[j] = -cross(dp, ddp) / (g * g * g);
    }
    std::tie(f.omega_left, f.omega_right) = contact_angles(f);

    // coarse self-intersection guard over non-adjacent chords
    for (int i = 0; i + 1 < n; ++i) {
        const Vec2 a = row(f.points, i), b = row(f.points, i + 1);
        const Vec2 lo = a.cwiseMin(b), hi = a.cwiseMax(b);
        for (int k = i + 2; k + 1 < n; ++k) {
            const Vec2 c = row(f.points, k), e = row(f.points, k + 1);
            if ((c.cwiseMax(e).array() < lo.array()).any() || (c.cwiseMin(e).array() > hi.array()).any()) continue;
            if (segments_cross(a, b, c, e))
                throw InadmissibleState(fmt::format("surface self-intersects between nodes {} and {}", i, k));
        }
    }
    return f;
}

std::pair<double, double> contact_angles(const CurveFrame& frame) {
    const auto& ref = *frame.ref;
    const int m = ref.size() - 1;
    const Vec2 t0 = row(frame.tau, 0);
    const Vec2 tm = -row(frame.tau, m);
    const Vec2 bl = ref.tau_b_left;
    const Vec2 br = -ref.tau_b_right;
    const double wl = std::atan2(cross(bl, t0), bl.dot(t0));
    const double wr = std::atan2(cross(tm, br), tm.dot(br));
    return {wl, wr};
}

VectorXd surface_gradient(const CurveFrame& frame, const VectorXd& f) {
    // shifting by f[0] makes constants differentiate to exactly zero
    return (frame.ref->grid.diff() * (f.array() - f[0]).matrix()).cwiseQuotient(frame.metric);
}

VectorXd surface_laplacian(const CurveFrame& frame, const VectorXd& f) {
    return surface_gradient(frame, surface_gradient(frame, f));
}

PointList surface_gradient_field(const CurveFrame& frame, const PointList& f) {
    PointList g = frame.ref->grid.diff() * f;
    for (Eigen::Index j = 0; j < g.rows(); ++j) g.row(j) /= frame.metric[j];
    return g;
}

PointList surface_laplacian_field(const CurveFrame& frame, const PointList& f) {
    return surface_gradient_field(frame, surface_gradient_field(frame, f));
}

VectorXd curvature_from_normal(const CurveFrame& frame) {
    const PointList dn = surface_gradient_field(frame, frame.normal);
    VectorXd k(dn.rows());
    for (Eigen::Index j = 0; j < dn.rows(); ++j) k[j] = dot_row(dn, frame.tau, j);
    return k;
}

MatrixXd curvature_jacobian(const CurveFrame& frame) {
    const auto& ref = *frame.ref;
    const int n = ref.size();
    const MatrixXd& D = ref.grid.diff();
    const MatrixXd& D2 = ref.grid.diff2();
    MatrixXd J(n, n);
    for (int i = 0; i < n; ++i) {
        const Vec2 p1 = row(frame.dpoints, i);
        const Vec2 p2 = row(frame.ddpoints, i);
        const double g = frame.metric[i];
        const double c = cross(p1, p2);
        for (int j = 0; j < n; ++j) {
            const Vec2 mu = row(ref.mu, j);
            const Vec2 dp1 = D(i, j) * mu;
            const Vec2 dp2 = D2(i, j) * mu;
            const double dc = cross(dp1, p2) + cross(p1, dp2);
            J(i, j) = -dc / (g * g * g) + 3.0 * c * p1.dot(dp1) / std::pow(g, 5);
        }
    }
    return J;
}

double surface_integral(const CurveFrame& frame, const VectorXd& f) {
    return frame.ref->grid.quad().dot(f.cwiseProduct(frame.metric));
}

double surface_length(const CurveFrame& frame) { return frame.ref->grid.integrate(frame.metric); }

void check_admissible(const ReferenceSurface& ref, const CurveFrame& frame) {
    const int m = ref.size() - 1;
    const double dmax = frame.d.cwiseAbs().maxCoeff();
    if (!(dmax < ref.delta))
        throw InadmissibleState(fmt::format("|d|_inf = {:.4g} exceeds the admissibility bound {:.4g}", dmax, ref.delta));
    const double dl = frame.d[0];
    const double dr = frame.d[m];
    if (-dl >= ref.straight_left || dl >= ref.dry_left || -dr >= ref.straight_right || dr >= ref.dry_right)
        throw InadmissibleState("contact point left its straight wall segment");
    for (double w : {frame.omega_left, frame.omega_right})
        if (!(w > 0.0 && w <= kPi / 2 + 1e-9)) throw InadmissibleState(fmt::format("contact angle {:.4g} outside (0, pi/2]", w));
    for (int j = 0; j <= m; ++j) {
        const double t = dot_row(ref.mu, frame.normal, j);
        if (t < 0.5 * ref.c0) throw InadmissibleState(fmt::format("mu.N = {:.4g} below c0/2 at node {}", t, j));
    }
}

double angle_gate(double s) {
    if (!(s >= 2.0)) throw Error(ErrorCode::invalid_argument, "angle_gate needs s >= 2");
    const double fl = std::floor(s);
    const double ceil_s = (s == fl) ? s : fl + 1.0;
    return kPi / (2.0 * (ceil_s - 1.0));
}

}  // namespace wwc
