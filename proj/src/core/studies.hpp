#pragma once

#include "dno.hpp"
#include "dynamics.hpp"

#include <string>
#include <vector>

namespace wwc {

/// One line of a refinement table; rate is NaN on the coarsest level.
struct StudyRow {
    std::string study;
    std::string quantity;
    double resolution = 0.0;
    double value = 0.0;
    double rate = 0.0;
    double threshold = 0.0;
    bool pass = true;
};

/// Surface node count used with mesh size h in the elliptic studies.
int surface_nodes_for(double h);

/// Manufactured harmonic (x^2 - y^2) and Poisson solutions on the configured tank,
/// lifted by a smooth surface displacement; L2 and H1 rates on the h ladder.
std::vector<StudyRow> elliptic_convergence(const GeometryConfig& geometry, const std::vector<double>& hs);

/// Eigenvalues of the discrete D-N operator on a flat rectangle against (k pi / L) tanh(k pi depth / L).
std::vector<StudyRow> dno_spectrum(double length, double depth, int m, double h, int modes = 4, double tolerance = 0.02);

struct RoundtripSample {
    double relative_error = 0.0;
    int iterations = 0;
};

/// invert_K(compute_Na(d), d_l, d_r) for seeded smooth random d with sup norm delta / 2.
std::vector<RoundtripSample> k_roundtrip(const RunConfig& cfg, int samples);

struct RichardsonResult {
    double dt = 0.0;
    int steps = 0;
    double diff_coarse = 0.0;   ///< |d(dt) - d(dt/2)|_inf
    double diff_fine = 0.0;     ///< |d(dt/2) - d(dt/4)|_inf
    double order = 0.0;
};

/// Temporal order from three runs of the configured initial state over steps * dt, filter off.
RichardsonResult richardson_order(const RunConfig& cfg, int steps);

struct IdentityLevel {
    double dt = 0.0;
    double dtk_residual = 0.0;
    double euler_defect = 0.0;
};

/// D_t kappa identity residual and Euler defect for one step of dt, dt/2, dt/4 taken after
/// warmup steps of the configured run.
std::vector<IdentityLevel> identity_time_study(const RunConfig& cfg, int warmup);

/// Euler defect after the same physical time on the M ladder m, 3m/2, 2m, ... with dt from the CFL rule.
std::vector<IdentityLevel> euler_joint_refinement(const RunConfig& cfg, int levels, int coarse_steps);

}  // namespace wwc
