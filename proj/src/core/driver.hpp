#pragma once

#include "monitor.hpp"
#include "studies.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wwc {

/// One line of the monitor time series, in CSV column order.
struct MonitorRow {
    double t = 0.0;
    double e_total = 0.0;
    double e_kin = 0.0;
    double e_surf = 0.0;
    double e_wet = 0.0;
    double e_grav = 0.0;
    double diss_rate = 0.0;
    double xi = 0.0;
    double taylor_min = 0.0;
    double dtk_res = 0.0;       ///< NaN before the first step
    double euler_defect = 0.0;  ///< NaN before the first step
    double omega_l = 0.0;
    double omega_r = 0.0;
    double d_l = 0.0;
    double d_r = 0.0;
};

inline constexpr int kMonitorColumns = 15;

std::string monitor_csv_header();
std::string monitor_csv_line(const MonitorRow& r);
std::vector<double> monitor_values(const MonitorRow& r);

/// Reference, mesh, state and the bundle of the current state.
class Simulation {
public:
    explicit Simulation(const RunConfig& cfg);
    Simulation(const RunConfig& cfg, const SurfaceState& state);

    const RunConfig& config() const { return cfg_; }
    const Discretization& discretization() const { return *disc_; }
    const SurfaceState& state() const { return state_; }
    const SurfaceState& initial() const { return initial_; }
    const RhsBundle& bundle() const { return *bundle_; }
    int steps() const { return steps_; }

    /// CFL step of the current state.
    double stable_dt() const;

    /// One accepted step of at most dt (CFL step when dt <= 0); returns the step actually taken.
    StepOutcome step(double dt = 0.0);

    /// Monitor values of the current state; the identity residuals use the previous step.
    MonitorRow report() const;
    EnergyReport energy() const;

private:
    void rebuild();

    RunConfig cfg_;
    StepperConfig stepper_;
    std::unique_ptr<Discretization> disc_;
    SurfaceState initial_;
    SurfaceState state_;
    std::unique_ptr<RhsBundle> bundle_;
    std::unique_ptr<RhsBundle> previous_;
    double last_dt_ = 0.0;
    int steps_ = 0;
};

struct Snapshot {
    RunConfig config;
    std::uint64_t reference_hash = 0;
    int step = 0;
    SurfaceState state;
    std::optional<MonitorRow> report;   ///< in-run monitor values, when recorded
};

std::string snapshot_json(const Simulation& sim);
void write_snapshot(const Simulation& sim, const std::string& path);
Snapshot parse_snapshot(const std::string& text);
Snapshot load_snapshot(const std::string& path);

struct RunSummary {
    int steps = 0;
    double t = 0.0;
    double max_drift = 0.0;         ///< max_t |d(t) - d(0)|_inf
    double omega_min = 0.0;
    double omega_max = 0.0;
    double max_slip = 0.0;
    double energy_change = 0.0;
    double dissipated = 0.0;
    double balance_residual = 0.0;  ///< NaN with fewer than 3 samples
    double max_energy_increase = 0.0;
    double max_xi = 0.0;
    double min_taylor = 0.0;
    double last_dtk = 0.0;
    double last_euler = 0.0;
    int halvings = 0;
    bool aborted = false;
    std::string message;
};

std::string summary_text(const RunSummary& s);

struct CommandOptions {
    std::string output_dir;             ///< overrides the config when non-empty
    std::optional<std::uint64_t> seed;
    bool override_angle_gate = false;
    bool serial = false;
};

/// Applies command-line overrides to a parsed configuration.
void apply_options(RunConfig& cfg, const CommandOptions& options);

/// Runs the configured simulation, writing monitor.csv, snapshots and summary.txt under the output directory.
RunSummary run_simulation(const RunConfig& cfg, std::ostream& log);

/// Command entry points; return the process exit status (0, 2, 3 or 4) and print to out.
int cmd_run(const std::string& config_path, const CommandOptions& options, std::ostream& out);
int cmd_convergence(const std::string& config_path, const CommandOptions& options, std::ostream& out);
int cmd_diagnose(const std::string& snapshot_path, const CommandOptions& options, std::ostream& out);

/// Refinement studies of the convergence command; rows failing their threshold have pass = false.
std::vector<StudyRow> convergence_table(const RunConfig& cfg);

}  // namespace wwc
