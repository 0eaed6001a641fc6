#pragma once

#include "dynamics.hpp"

#include <vector>

namespace wwc {

struct EnergyReport {
    double kinetic = 0.0;
    double surface = 0.0;
    double wetting = 0.0;
    double gravitational = 0.0;
    double total = 0.0;
    double dissipation_rate = 0.0;
    double e_lower = 0.0;
    double f_lower_left = 0.0;
    double f_lower_right = 0.0;
};

EnergyReport physical_energy(const RhsBundle& b, const PhysicsConfig& physics);

/// Kinetic energy through Green's identity: (1/2) boundary flux form minus the source term.
double kinetic_energy_boundary_form(const RhsBundle& b);

struct EnergySample {
    double t = 0.0;
    double energy = 0.0;
    double dissipation_rate = 0.0;
};

/// |E(end) - E(start) + integral of the dissipation rate|, Simpson in time.
double energy_balance_residual(const std::vector<EnergySample>& window);

/// Time integral of the dissipation rate over the window (Simpson, nonuniform steps).
double dissipated_amount(const std::vector<EnergySample>& window);

/// Relative L2 gap of the curvature transport identity between two consecutive bundles.
double dtk_identity_residual(const RhsBundle& before, const RhsBundle& after, double dt);

/// min over the surface of -d_N (sigma kappa_H + P_vv).
double taylor_sign(const RhsBundle& b, const PhysicsConfig& physics);

/// L2 norm on the surface of (D_t v + grad P - g).N from two consecutive bundles, over the
/// interior nodes where the acceleration equation is imposed.
double euler_recovery_defect(const RhsBundle& before, const RhsBundle& after, double dt, const PhysicsConfig& physics);

/// max |d(s) - d(L - s)|.
double symmetry_defect(const VectorXd& d);

/// max over nodes of |v.N - (w mu).N|.
double neumann_reproduction_defect(const RhsBundle& b);

}  // namespace wwc
