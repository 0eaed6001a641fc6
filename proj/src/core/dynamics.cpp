#include "dynamics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <random>

namespace wwc {

StepperConfig stepper_config(const RunConfig& cfg) {
    StepperConfig s;
    s.physics = cfg.physics;
    s.cfl = cfg.numerics.cfl;
    s.filter = cfg.numerics.filter == FilterMode::on ||
               (cfg.numerics.filter == FilterMode::automatic && cfg.numerics.m >= 64);
    s.filter_alpha = cfg.numerics.filter_alpha;
    s.filter_order = cfg.numerics.filter_order;
    s.max_halvings = cfg.numerics.max_halvings;
    return s;
}

std::pair<double, double> contact_slip(const CurveFrame& frame, const PhysicsConfig& p) {
    const double c = std::cos(p.omega_s);
    return {p.sigma / p.beta_c * (c - std::cos(frame.omega_left)), p.sigma / p.beta_c * (c - std::cos(frame.omega_right))};
}

RhsBundle build_rhs_bundle(const ReferenceDomain& domain, const SurfaceState& state, const PhysicsConfig& physics) {
    const ReferenceSurface& ref = domain.ref();
    const int n = ref.size(), m = n - 1;
    RhsBundle b;
    b.frame = evaluate_frame(ref, state.d);
    check_admissible(ref, b.frame);
    b.w = state.w;
    std::tie(b.w[0], b.w[m]) = contact_slip(b.frame, physics);
    b.map = std::make_unique<HarmonicMap>(domain, b.frame);
    b.phi = solve_phi(*b.map, b.w);
    b.xi = b.phi.xi;

    const CurveFrame& f = b.frame;
    b.mu_n.resize(n);
    b.v.resize(n, 2);
    b.v_star.resize(n);
    for (int j = 0; j < n; ++j) {
        b.mu_n[j] = dot_row(ref.mu, f.normal, j);
        // normal part is the Neumann datum itself, tangential part from the projected gradient
        const Vec2 tau = row(f.tau, j), normal = row(f.normal, j);
        const Vec2 v = tau.dot(row(b.phi.v, j)) * tau + b.phi.neumann[j] * normal;
        b.v.row(j) = v.transpose();
        b.v_star[j] = (v - b.w[j] * row(ref.mu, j)).dot(tau) / f.metric[j];
    }
    b.dv = surface_gradient_field(f, b.v);
    b.kappa_h = harmonic_extension(*b.map, f.kappa);
    b.nk = b.kappa_h.flux;
    b.pvv = solve_pvv(*b.map, b.phi.v, gravity_vector(physics));
    return b;
}

VectorXd normal_force(const RhsBundle& b, const PhysicsConfig& physics) {
    const Vec2 g = gravity_vector(physics);
    VectorXd force(b.nk.size());
    for (Eigen::Index j = 0; j < force.size(); ++j)
        force[j] = physics.sigma * b.nk[j] + b.pvv.flux[j] - g.dot(row(b.frame.normal, j));
    return force;
}

namespace {

/// Bracket of the acceleration formula without the D_t N term.
VectorXd transport_terms(const RhsBundle& b) {
    const ReferenceSurface& ref = b.ref();
    const VectorXd dw = ref.grid.derivative(b.w);
    const PointList dmu = ref.grid.diff() * ref.mu;
    VectorXd out(b.w.size());
    for (Eigen::Index j = 0; j < out.size(); ++j)
        out[j] = b.mu_n[j] * b.v_star[j] * dw[j] + b.v_star[j] * dot_row(dmu, b.frame.normal, j) * b.w[j];
    return out;
}

}  // namespace

VectorXd accel(const RhsBundle& b, const PhysicsConfig& physics) {
    const ReferenceSurface& ref = b.ref();
    const int n = ref.size(), m = n - 1;
    const VectorXd bracket = transport_terms(b) + normal_force(b, physics);
    VectorXd out = VectorXd::Zero(n);
    for (int j = 1; j < m; ++j) {
        const Vec2 tau = row(b.frame.tau, j), normal = row(b.frame.normal, j);
        const Vec2 slip = b.w[j] * row(ref.mu, j) - row(b.v, j);
        // (w mu - v).D_t N with D_t N = -((grad v)^T N)^T
        const double dtn = -slip.dot(tau) * normal.dot(row(b.dv, j));
        out[j] = -(bracket[j] + dtn) / b.mu_n[j];
    }
    return out;
}

std::pair<double, double> contact_acceleration_Bi(const RhsBundle& b, const PhysicsConfig& physics) {
    const int m = b.ref().size() - 1;
    const VectorXd bracket = transport_terms(b) + normal_force(b, physics);
    return {-bracket[0] / b.mu_n[0], -bracket[m] / b.mu_n[m]};
}

double cfl_dt(const CurveFrame& frame, double cfl, double sigma) {
    if (!(cfl > 0.0)) throw Error(ErrorCode::invalid_argument, "cfl must be positive");
    if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "sigma must be positive");
    const ChebyshevGrid& grid = frame.ref->grid;
    double ds = grid.length();
    for (int j = 0; j + 1 < grid.size(); ++j)
        ds = std::min(ds, (grid.node(j + 1) - grid.node(j)) * std::min(frame.metric[j], frame.metric[j + 1]));
    return cfl * std::pow(ds, 1.5) / std::sqrt(sigma);
}

SurfaceState rk4_step(const ReferenceDomain& domain, const SurfaceState& state, double dt, const StepperConfig& cfg) {
    const ReferenceSurface& ref = domain.ref();
    const int m = ref.size() - 1;
    auto rhs = [&](const VectorXd& d, const VectorXd& w, VectorXd& dd, VectorXd& dw) {
        const RhsBundle b = build_rhs_bundle(domain, {d, w, 0.0}, cfg.physics);
        dd = b.w;
        dw = accel(b, cfg.physics);
    };
    VectorXd k1d, k1w, k2d, k2w, k3d, k3w, k4d, k4w;
    rhs(state.d, state.w, k1d, k1w);
    rhs(state.d + 0.5 * dt * k1d, state.w + 0.5 * dt * k1w, k2d, k2w);
    rhs(state.d + 0.5 * dt * k2d, state.w + 0.5 * dt * k2w, k3d, k3w);
    rhs(state.d + dt * k3d, state.w + dt * k3w, k4d, k4w);

    SurfaceState out;
    out.t = state.t + dt;
    out.d = state.d + (dt / 6.0) * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
    out.w = state.w + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    if (cfg.filter) {
        out.d = ref.grid.filter(out.d, cfg.filter_alpha, cfg.filter_order);
        out.w = ref.grid.filter(out.w, cfg.filter_alpha, cfg.filter_order);
    }
    const CurveFrame frame = evaluate_frame(ref, out.d);
    check_admissible(ref, frame);
    std::tie(out.w[0], out.w[m]) = contact_slip(frame, cfg.physics);
    return out;
}

StepOutcome advance(const ReferenceDomain& domain, const SurfaceState& state, double dt, const StepperConfig& cfg) {
    for (int k = 0;; ++k, dt *= 0.5) {
        try {
            return {rk4_step(domain, state, dt, cfg), dt, k};
        } catch (const InadmissibleState& e) {
            if (k >= cfg.max_halvings)
                throw InadmissibleState(fmt::format("step at t = {:.6g} rejected after {} halvings: {}", state.t, k, e.what()));
        }
    }
}

namespace {

/// Circle (or line) through p0 with tangent t0 that also passes through p1.
struct Arc {
    Vec2 p0, t0, center;
    double radius = 0.0;    ///< signed; tangent at q is perp(q - center) / radius
    bool straight = false;

    Vec2 tangent(const Vec2& q) const { return straight ? t0 : Vec2(perp(q - center) / radius); }

    /// Parameter t with p + t mu on the arc, nearest to p.
    double hit(const Vec2& p, const Vec2& mu) const {
        if (straight) {
            const Vec2 n = perp(t0);
            return n.dot(p0 - p) / n.dot(mu);
        }
        const double b = mu.dot(p - center), c = (p - center).squaredNorm() - radius * radius;
        const double disc = b * b - c;
        if (disc < 0.0) throw Error(ErrorCode::invalid_argument, "equilibrium arc misses a transversal line");
        const double r = std::sqrt(disc);
        const double t1 = -b - r, t2 = -b + r;
        return std::abs(t1) < std::abs(t2) ? t1 : t2;
    }
};

Arc make_arc(const Vec2& p0, const Vec2& t0, const Vec2& p1) {
    Arc a;
    a.p0 = p0;
    a.t0 = t0;
    const Vec2 c = p1 - p0;
    const double den = 2.0 * perp(t0).dot(c);
    if (std::abs(den) < 1e-14 * c.norm()) {
        a.straight = true;
        return a;
    }
    a.radius = c.squaredNorm() / den;
    a.center = p0 + a.radius * perp(t0);
    return a;
}

Vec2 rotate(const Vec2& v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

struct ArcFit {
    Arc arc;
    double omega_right = 0.0;
    double area = 0.0;
};

ArcFit fit_arc(const ReferenceSurface& ref, double omega_s, double dl, double dr) {
    const int m = ref.size() - 1;
    const Vec2 pl = row(ref.gamma_star, 0) + dl * row(ref.mu, 0);
    const Vec2 pr = row(ref.gamma_star, m) + dr * row(ref.mu, m);
    ArcFit f;
    f.arc = make_arc(pl, rotate(ref.tau_b_left, omega_s), pr);
    f.omega_right = std::acos(std::clamp(f.arc.tangent(pr).dot(ref.tau_b_right), -1.0, 1.0));

    // wetted polygon closed by the chord, then the circular segment above or below it
    std::vector<Vec2> poly{pl};
    for (std::size_t k = 1; k + 1 < ref.gamma_b_star.size(); ++k) poly.push_back(ref.gamma_b_star[k]);
    poly.push_back(pr);
    double area = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) area += 0.5 * cross(poly[k], poly[(k + 1) % poly.size()]);
    if (!f.arc.straight) {
        const double r = std::abs(f.arc.radius);
        const double chord = (pr - pl).norm();
        const double phi = 2.0 * std::asin(std::min(1.0, chord / (2.0 * r)));
        const double segment = 0.5 * r * r * (phi - std::sin(phi));
        const Vec2 mid = 0.5 * (pl + pr);
        const Vec2 top = f.arc.center + r * (mid - f.arc.center).normalized();
        area += (top - mid).dot(perp(pr - pl)) > 0.0 ? segment : -segment;
    }
    f.area = area;
    return f;
}

}  // namespace

SurfaceState equilibrium_state(const ReferenceSurface& ref, const PhysicsConfig& physics, double area_ratio) {
    if (physics.g != 0.0) throw Error(ErrorCode::invalid_argument, "the equilibrium arc needs g = 0");
    const int n = ref.size(), m = n - 1;
    const double target = area_ratio * ref.area;
    const double scale = ref.length() * ref.length();
    auto residual = [&](const Eigen::Vector2d& x) {
        const ArcFit f = fit_arc(ref, physics.omega_s, x[0], x[1]);
        return Eigen::Vector2d(f.omega_right - physics.omega_s, (f.area - target) / scale);
    };
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    Eigen::Vector2d r = residual(x);
    for (int it = 0; it < 60 && r.lpNorm<Eigen::Infinity>() > 1e-15; ++it) {
        Eigen::Matrix2d jac;
        const double h = 1e-7 * ref.length();
        for (int k = 0; k < 2; ++k) {
            Eigen::Vector2d xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            jac.col(k) = (residual(xp) - residual(xm)) / (2.0 * h);
        }
        x -= jac.fullPivLu().solve(r);
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > ref.length())
            throw Error(ErrorCode::invalid_argument, "no equilibrium arc near the reference surface");
        r = residual(x);
    }
    if (r.lpNorm<Eigen::Infinity>() > 1e-12) throw Error(ErrorCode::invalid_argument, "equilibrium arc fit did not converge");

    const Arc arc = fit_arc(ref, physics.omega_s, x[0], x[1]).arc;
    SurfaceState s;
    s.d.resize(n);
    for (int j = 0; j < n; ++j) s.d[j] = arc.hit(row(ref.gamma_star, j), row(ref.mu, j));
    s.d[0] = x[0];
    s.d[m] = x[1];
    s.w = VectorXd::Zero(n);
    const double dmax = s.d.cwiseAbs().maxCoeff();
    if (!(dmax < ref.delta))
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("equilibrium arc has |d|_inf = {:.4g}, outside the admissible bound {:.4g}", dmax, ref.delta));
    return s;
}

VectorXd perturbation(const ReferenceSurface& ref, double amplitude, int mode, PerturbShape shape, std::uint64_t seed) {
    const int n = ref.size();
    double c[4] = {0.0, 0.0, 0.0, 0.0};
    if (shape == PerturbShape::random) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        for (double& x : c) x = uni(rng);
    }
    VectorXd p(n);
    for (int j = 0; j < n; ++j) {
        const double s = ref.grid.node(j) / ref.length();
        switch (shape) {
            case PerturbShape::cosine: p[j] = std::cos(mode * kPi * s); break;
            case PerturbShape::sine: p[j] = std::sin(mode * kPi * s); break;
            case PerturbShape::random:
                p[j] = 0.0;
                for (int k = 0; k < 4; ++k) p[j] += c[k] * std::cos((k + 1) * kPi * s);
                break;
        }
    }
    const double peak = p.cwiseAbs().maxCoeff();
    return peak > 0.0 ? VectorXd(p * (amplitude / peak)) : p;
}

VectorXd initial_velocity(const CurveFrame& frame, const PhysicsConfig& physics) {
    const ReferenceSurface& ref = *frame.ref;
    const int n = ref.size(), m = n - 1;
    const auto [wl, wr] = contact_slip(frame, physics);
    VectorXd w(n), bump(n), flux_weight(n);
    for (int j = 0; j < n; ++j) {
        const double s = ref.grid.node(j) / ref.length();
        w[j] = wl * std::exp(-std::pow(s / 0.15, 2)) + wr * std::exp(-std::pow((1.0 - s) / 0.15, 2));
        bump[j] = std::pow(std::sin(kPi * s), 2);
        // chord weight of the piecewise linear surface, the measure in which xi is taken
        const double left = j > 0 ? (row(frame.points, j) - row(frame.points, j - 1)).norm() : 0.0;
        const double right = j < m ? (row(frame.points, j + 1) - row(frame.points, j)).norm() : 0.0;
        flux_weight[j] = 0.5 * (left + right) * dot_row(ref.mu, frame.normal, j);
    }
    w -= (flux_weight.dot(w) / flux_weight.dot(bump)) * bump;
    w[0] = wl;
    w[m] = wr;
    return w;
}

SurfaceState initial_state(const ReferenceSurface& ref, const RunConfig& cfg) {
    const int n = ref.size();
    SurfaceState s;
    switch (cfg.run.initial) {
        case InitialKind::flat:
            s.d = VectorXd::Zero(n);
            s.w = VectorXd::Zero(n);
            break;
        case InitialKind::equilibrium: s = equilibrium_state(ref, cfg.physics); break;
        case InitialKind::perturbed:
            s = equilibrium_state(ref, cfg.physics);
            s.d += perturbation(ref, cfg.run.perturb_amplitude * ref.length(), cfg.run.perturb_mode, cfg.run.perturb_shape,
                                cfg.run.seed);
            break;
    }
    const CurveFrame frame = evaluate_frame(ref, s.d);
    check_admissible(ref, frame);
    s.w = initial_velocity(frame, cfg.physics);
    return s;
}

}  // namespace wwc
