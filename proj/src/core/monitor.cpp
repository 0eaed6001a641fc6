#include "monitor.hpp"

#include <algorithm>

namespace wwc {

namespace {

double surface_l2(const CurveFrame& frame, const VectorXd& f) {
    return std::sqrt(std::max(0.0, surface_integral(frame, f.cwiseAbs2())));
}

/// Composite Simpson rule on nonuniform samples; a trailing odd interval uses the trapezoid rule.
double simpson(const std::vector<double>& t, const std::vector<double>& f) {
    double sum = 0.0;
    std::size_t k = 0;
    for (; k + 2 < t.size(); k += 2) {
        const double h0 = t[k + 1] - t[k], h1 = t[k + 2] - t[k + 1];
        const double h = h0 + h1;
        sum += h / 6.0 *
               ((2.0 - h1 / h0) * f[k] + h * h / (h0 * h1) * f[k + 1] + (2.0 - h0 / h1) * f[k + 2]);
    }
    if (k + 1 < t.size()) sum += 0.5 * (t[k + 1] - t[k]) * (f[k] + f[k + 1]);
    return sum;
}

}  // namespace

EnergyReport physical_energy(const RhsBundle& b, const PhysicsConfig& physics) {
    const ReferenceSurface& ref = b.ref();
    const CurveFrame& frame = b.frame;
    const HarmonicMap& map = *b.map;
    const int m = ref.size() - 1;
    EnergyReport e;
    const VectorXd& phi = b.phi.phi.values;
    e.kinetic = 0.5 * phi.dot(map.stiffness() * phi);
    e.surface = physics.sigma * surface_length(frame);
    e.wetting = -physics.sigma * std::cos(physics.omega_s) * (ref.bottom_length + frame.d[0] + frame.d[m]);
    double moment = 0.0;
    const Mesh& mesh = map.mesh();
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& v = mesh.tri[t];
        moment += map.area()[t] * (map.xy()[v[0]].y() + map.xy()[v[1]].y() + map.xy()[v[2]].y()) / 3.0;
    }
    e.gravitational = physics.g == 0.0 ? 0.0 : physics.g * moment;
    e.total = e.kinetic + e.surface + e.wetting + e.gravitational;
    e.dissipation_rate = physics.beta_c * (b.w[0] * b.w[0] + b.w[m] * b.w[m]);

    // lower-order energy with the transported derivative taken by the chain rule
    const VectorXd dt_d = b.w + b.v_star.cwiseProduct(ref.grid.derivative(frame.d));
    const FieldOnDomain ext = harmonic_extension(map, surface_laplacian(frame, dt_d));
    const VectorXd grad_n_lap = surface_gradient(frame, harmonic_extension(map, surface_laplacian(frame, frame.d)).flux);
    e.e_lower = ext.values.dot(map.stiffness() * ext.values) + physics.sigma * surface_integral(frame, grad_n_lap.cwiseAbs2()) +
                surface_integral(frame, dt_d.cwiseAbs2()) + surface_integral(frame, frame.d.cwiseAbs2());
    const double sl = std::sin(frame.omega_left), sr = std::sin(frame.omega_right);
    e.f_lower_left = sl * sl * grad_n_lap[0] * grad_n_lap[0];
    e.f_lower_right = sr * sr * grad_n_lap[m] * grad_n_lap[m];
    return e;
}

double kinetic_energy_boundary_form(const RhsBundle& b) {
    const HarmonicMap& map = *b.map;
    const VectorXd& phi = b.phi.phi.values;
    const VectorXd c = map.mass() * VectorXd::Ones(phi.size());
    const VectorXd boundary = map.surface_load(b.phi.neumann);
    return 0.5 * phi.dot(boundary) - 0.5 * b.phi.xi * b.phi.gamma * phi.dot(c);
}

double energy_balance_residual(const std::vector<EnergySample>& window) {
    if (window.size() < 3) throw Error(ErrorCode::invalid_argument, "energy balance needs at least 3 reports");
    return std::abs(window.back().energy - window.front().energy + dissipated_amount(window));
}

double dissipated_amount(const std::vector<EnergySample>& window) {
    if (window.size() < 2) return 0.0;
    std::vector<double> t, f;
    for (const auto& s : window) {
        t.push_back(s.t);
        f.push_back(s.dissipation_rate);
    }
    return simpson(t, f);
}

namespace {

/// -(Delta_Gamma v).N - 2 kappa tau.(d_tau v) at the nodes.
VectorXd dtk_rhs(const RhsBundle& b) {
    const CurveFrame& f = b.frame;
    const PointList lap = surface_laplacian_field(f, b.v);
    VectorXd out(b.v.rows());
    for (Eigen::Index j = 0; j < out.size(); ++j)
        out[j] = -dot_row(lap, f.normal, j) - 2.0 * f.kappa[j] * dot_row(f.tau, b.dv, j);
    return out;
}

}  // namespace

double dtk_identity_residual(const RhsBundle& before, const RhsBundle& after, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "dtk identity needs dt > 0");
    const ChebyshevGrid& grid = after.ref().grid;
    const VectorXd transport0 = before.v_star.cwiseProduct(grid.derivative(before.frame.kappa));
    const VectorXd transport1 = after.v_star.cwiseProduct(grid.derivative(after.frame.kappa));
    const VectorXd lhs = (after.frame.kappa - before.frame.kappa) / dt + 0.5 * (transport0 + transport1);
    const VectorXd rhs = 0.5 * (dtk_rhs(before) + dtk_rhs(after));
    const double scale = std::max(surface_l2(after.frame, lhs), surface_l2(after.frame, rhs));
    if (scale < 1e-300) return 0.0;
    return surface_l2(after.frame, lhs - rhs) / scale;
}

double taylor_sign(const RhsBundle& b, const PhysicsConfig& physics) {
    return (-(physics.sigma * b.nk + b.pvv.flux)).minCoeff();
}

double euler_recovery_defect(const RhsBundle& before, const RhsBundle& after, double dt, const PhysicsConfig& physics) {
    if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "Euler defect needs dt > 0");
    const ChebyshevGrid& grid = after.ref().grid;
    const PointList dtv = (after.v - before.v) / dt +
                          0.5 * (before.v_star.asDiagonal() * (grid.diff() * before.v) +
                                 after.v_star.asDiagonal() * (grid.diff() * after.v));
    const VectorXd force = 0.5 * (normal_force(before, physics) + normal_force(after, physics));
    const PointList normal = 0.5 * (before.frame.normal + after.frame.normal);
    VectorXd defect(force.size());
    // the endpoint rows obey the slip law instead; their gap is the B_i diagnostic
    defect.setZero();
    for (Eigen::Index j = 1; j + 1 < defect.size(); ++j) defect[j] = dot_row(dtv, normal, j) + force[j];
    return surface_l2(after.frame, defect);
}

double symmetry_defect(const VectorXd& d) { return (d - d.reverse()).cwiseAbs().maxCoeff(); }

double neumann_reproduction_defect(const RhsBundle& b) {
    double out = 0.0;
    for (Eigen::Index j = 0; j < b.v.rows(); ++j) {
        const double vn = dot_row(b.v, b.frame.normal, j);
        const double wn = b.w[j] * dot_row(b.ref().mu, b.frame.normal, j);
        out = std::max(out, std::abs(vn - wn));
    }
    return out;
}

}  // namespace wwc
