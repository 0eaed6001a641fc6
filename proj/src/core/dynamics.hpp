#pragma once

#include "dno.hpp"

#include <memory>
#include <utility>

namespace wwc {

/// Complete dynamical state of the free surface at the collocation nodes.
struct SurfaceState {
    VectorXd d;
    VectorXd w;     ///< time derivative of d
    double t = 0.0;
};

struct StepperConfig {
    PhysicsConfig physics;
    double cfl = 0.5;
    bool filter = false;
    double filter_alpha = 36.0;
    int filter_order = 8;
    int max_halvings = 5;
};

StepperConfig stepper_config(const RunConfig& cfg);

/// Gravity as a vector; the fluid is pulled towards -y.
inline Vec2 gravity_vector(const PhysicsConfig& p) { return Vec2(0.0, -p.g); }

/// Endpoint velocities from the slip law beta_c w_i = sigma (cos omega_s - cos omega_i).
std::pair<double, double> contact_slip(const CurveFrame& frame, const PhysicsConfig& physics);

/// Everything the right-hand side needs at one state, computed once.
struct RhsBundle {
    CurveFrame frame;
    std::unique_ptr<HarmonicMap> map;
    VectorXd w;                 ///< state velocity with slaved endpoints
    PhiSolution phi;
    PointList v;                ///< velocity trace at the collocation nodes
    PointList dv;               ///< tangential derivative of the velocity trace
    FieldOnDomain kappa_h;      ///< harmonic extension of the curvature
    VectorXd nk;                ///< N(kappa)
    FieldOnDomain pvv;
    VectorXd v_star;            ///< transport speed along the reference arclength
    VectorXd mu_n;              ///< mu . N_t
    double xi = 0.0;

    const ReferenceSurface& ref() const { return *frame.ref; }
};

/// Builds the bundle; the endpoint entries of state.w are replaced by the slip law.
RhsBundle build_rhs_bundle(const ReferenceDomain& domain, const SurfaceState& state, const PhysicsConfig& physics);

/// Normal force sigma N(kappa) + d_N P_vv - g.N at the nodes.
VectorXd normal_force(const RhsBundle& b, const PhysicsConfig& physics);

/// Second time derivative of d at interior nodes; endpoint entries are zero.
VectorXd accel(const RhsBundle& b, const PhysicsConfig& physics);

/// Endpoint form of the acceleration, used to cross-check the slip law.
std::pair<double, double> contact_acceleration_Bi(const RhsBundle& b, const PhysicsConfig& physics);

/// Surface-tension CFL step cfl * min(ds_eff)^(3/2) / sqrt(sigma).
double cfl_dt(const CurveFrame& frame, double cfl, double sigma);

/// Classical RK4 on (d, interior w); endpoint w follows the slip law on every stage frame.
SurfaceState rk4_step(const ReferenceDomain& domain, const SurfaceState& state, double dt, const StepperConfig& cfg);

struct StepOutcome {
    SurfaceState state;
    double dt = 0.0;
    int halvings = 0;
};

/// rk4_step with dt halving when a stage leaves the admissible set.
StepOutcome advance(const ReferenceDomain& domain, const SurfaceState& state, double dt, const StepperConfig& cfg);

/// Circular arc meeting both walls at omega_s with enclosed area area_ratio times the reference area.
SurfaceState equilibrium_state(const ReferenceSurface& ref, const PhysicsConfig& physics, double area_ratio = 1.0);

/// Smooth bump with sup norm amplitude: cos or sin of (mode pi s / L), or a seeded random
/// combination of the first four modes.
VectorXd perturbation(const ReferenceSurface& ref, double amplitude, int mode, PerturbShape shape, std::uint64_t seed);

/// Smooth velocity carrying the slip values at the endpoints with zero net flux through the surface:
/// Gaussian ramps of width 0.15 L minus a multiple of sin^2(pi s / L).
VectorXd initial_velocity(const CurveFrame& frame, const PhysicsConfig& physics);

/// Initial state requested by the run section.
SurfaceState initial_state(const ReferenceSurface& ref, const RunConfig& cfg);

}  // namespace wwc
