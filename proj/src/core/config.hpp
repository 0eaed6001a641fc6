#pragma once

#include "common.hpp"

#include <cstdint>
#include <string>

namespace wwc {

enum class TankShape { rectangle, wedge, trapezoid };

struct GeometryConfig {
    TankShape tank = TankShape::wedge;
    double length = 1.0;            ///< span of the reference surface between the contact points
    double wall_angle_left = kPi / 18;   ///< wall inclination from horizontal
    double wall_angle_right = kPi / 18;
    double depth = 0.5;             ///< rectangle/trapezoid depth below the surface
    double wall_extension = 0.25;   ///< dry wall above each contact point, in units of length
    double blend_length = 0.15;     ///< mu blend length, fraction of length
    double c0 = 0.1;
    double delta = 0.02;            ///< admissibility bound on |d|
    bool override_angle_gate = false;
};

struct PhysicsConfig {
    double sigma = 1.0;
    double beta_c = 1.0;
    double omega_s = kPi / 20;
    double g = 0.0;
    double a = 2.0;
};

enum class FilterMode { off, on, automatic };

/// principal: a^3 - N (mu.N) Laplacian; curvature: a^3 + N dkappa/dd; full: exact linearization of N_a.
enum class NewtonJacobian { principal, curvature, full };

struct NumericsConfig {
    int m = 64;
    double h = 1.0 / 32;
    double grading = 0.25;          ///< corner element size as a fraction of h
    double cfl = 0.5;
    FilterMode filter = FilterMode::automatic;
    double filter_alpha = 36.0;
    int filter_order = 8;
    double newton_tol = 1e-11;
    int newton_max_iter = 20;
    NewtonJacobian newton_jacobian = NewtonJacobian::full;
    int max_halvings = 5;
};

enum class InitialKind { equilibrium, perturbed, flat };

/// random: seeded combination of the first four modes.
enum class PerturbShape { cosine, sine, random };

struct RunSection {
    double t_end = 0.0;
    int steps = 100;                ///< used when t_end == 0
    int output_every = 1;
    int snapshot_every = 0;         ///< 0 disables periodic snapshots
    std::uint64_t seed = 1;
    InitialKind initial = InitialKind::equilibrium;
    double perturb_amplitude = 0.01;  ///< fraction of length
    int perturb_mode = 2;
    PerturbShape perturb_shape = PerturbShape::sine;
    int levels = 3;                 ///< refinement levels of the convergence ladder
};

struct RunConfig {
    GeometryConfig geometry;
    PhysicsConfig physics;
    NumericsConfig numerics;
    RunSection run;
    std::string output_dir = ".";
};

/// Parses the sectioned key = value format. Unknown sections or keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

/// Applies one key = value assignment under the named section.
void set_config_value(RunConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value);

void validate(const RunConfig& cfg);

/// Stable 64-bit digest of everything that determines the reference geometry and mesh.
std::uint64_t reference_hash(const RunConfig& cfg);

}  // namespace wwc
