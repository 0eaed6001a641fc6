// Acceptance suite: one PASS/FAIL line per criterion, details indented below it.
// Exits 0 once every criterion has been evaluated; a nonzero status means the harness itself failed.

#include "driver.hpp"

#include <Eigen/SVD>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace wwc;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::vector<std::string> details;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        details.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
    }
    void note(const std::string& what) { details.push_back("     " + what); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig baseline() {
    RunConfig c;
    c.geometry.wall_angle_left = c.geometry.wall_angle_right = kPi / 18;
    c.physics.omega_s = kPi / 20;
    c.physics.g = 0.0;
    c.numerics.m = 64;
    c.numerics.h = 1.0 / 32;
    c.numerics.cfl = 0.5;
    c.numerics.filter = FilterMode::off;
    c.run.seed = 1;
    return c;
}

RunConfig perturbed_baseline() {
    RunConfig c = baseline();
    c.run.initial = InitialKind::perturbed;
    c.run.perturb_amplitude = 0.01;
    c.run.perturb_shape = PerturbShape::sine;
    c.run.perturb_mode = 2;
    return c;
}

Verdict elliptic_rates() {
    Verdict v;
    GeometryConfig g;
    g.wall_angle_left = g.wall_angle_right = kPi / 12;
    g.override_angle_gate = true;
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = elliptic_convergence(g, {1.0 / 16, 1.0 / 32, 1.0 / 64});
    const double elapsed = seconds_since(t0);
    for (const auto& r : rows) {
        if (std::isnan(r.rate)) continue;
        v.check(r.pass, fmt::format("{} {} h = {:.5f}: rate {:.3f} >= {}", r.study, r.quantity, r.resolution, r.rate, r.threshold));
    }
    v.check(elapsed <= 120.0, fmt::format("runtime {:.1f} s <= 120 s", elapsed));
    return v;
}

Verdict dno_structure() {
    Verdict v;
    const RunConfig c = baseline();
    const auto t0 = std::chrono::steady_clock::now();
    const auto disc = make_discretization(c.geometry, c.numerics.m, c.numerics.h, c.numerics.grading);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::normal_distribution<double> gauss;
    const int n = disc->ref.size();
    VectorXd d(n);
    const double c1 = uni(rng), c2 = uni(rng);
    for (int j = 0; j < n; ++j) {
        const double s = disc->ref.grid.node(j) / disc->ref.length();
        d[j] = c1 * std::sin(kPi * s) + c2 * std::cos(2.0 * kPi * s);
    }
    d *= 0.5 * disc->ref.delta / d.cwiseAbs().maxCoeff();
    const HarmonicMap map(*disc->domain, evaluate_frame(disc->ref, d));
    const DnoOperator op = assemble_dno(map);
    double sym = 0.0, mean = 0.0, pos = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        VectorXd f(n), g(n);
        for (int j = 0; j < n; ++j) {
            f[j] = gauss(rng);
            g[j] = gauss(rng);
        }
        const VectorXd nf = op.apply(f), ng = op.apply(g);
        const double fnorm = std::sqrt(op.inner(f, f)), gnorm = std::sqrt(op.inner(g, g));
        sym = std::max(sym, std::abs(op.inner(nf, g) - op.inner(f, ng)) / (std::sqrt(op.inner(nf, nf)) * gnorm));
        mean = std::max(mean, std::abs(op.weights.dot(nf)) / fnorm);
        pos = std::min(pos, op.inner(nf, f) / (fnorm * fnorm));
    }
    const double elapsed = seconds_since(t0);
    v.check(sym <= 1e-8, fmt::format("symmetry defect {:.3e} <= 1e-8 (relative, 20 pairs)", sym));
    v.check(mean <= 1e-10, fmt::format("|mean(N f)| / |f| {:.3e} <= 1e-10", mean));
    v.check(pos >= -1e-12, fmt::format("min <N f, f> / |f|^2 {:.3e} >= -1e-12", pos));
    v.check(elapsed <= 60.0, fmt::format("runtime {:.2f} s <= 60 s at M = 64", elapsed));
    return v;
}

Verdict dno_eigenvalues() {
    Verdict v;
    // the rate column of a spectrum row holds the relative error
    for (const auto& r : dno_spectrum(1.0, 0.5, 64, 1.0 / 64, 4, 0.02))
        v.check(r.pass && r.rate <= 0.02, fmt::format("{} = {:.6f}: relative error {:.3e} <= 0.02", r.quantity, r.value, r.rate));
    return v;
}

Verdict k_inversion() {
    Verdict v;
    const RunConfig c = baseline();
    const auto samples = k_roundtrip(c, 10);
    for (std::size_t k = 0; k < samples.size(); ++k)
        v.check(samples[k].relative_error <= 1e-6 && samples[k].iterations <= 8,
                fmt::format("sample {}: error {:.3e} <= 1e-6, {} Newton iterations <= 8", k, samples[k].relative_error,
                            samples[k].iterations));
    const auto disc = make_discretization(c.geometry, c.numerics.m, c.numerics.h, c.numerics.grading);
    const HarmonicMap map(*disc->domain, evaluate_frame(disc->ref, VectorXd::Zero(disc->ref.size())));
    const Eigen::JacobiSVD<MatrixXd> svd(na_jacobian(map, c.physics.a));
    v.note(fmt::format("smallest singular value of the N_a Jacobian at d = 0, a = {}: {:.4e}", c.physics.a,
                       svd.singularValues().minCoeff()));
    return v;
}

Verdict equilibrium_preservation() {
    Verdict v;
    RunConfig c = baseline();
    c.run.initial = InitialKind::equilibrium;
    Simulation sim(c);
    const int m = c.numerics.m;
    const double e0 = sim.energy().total;
    double drift = 0.0, slip = 0.0, de = 0.0;
    for (int k = 0; k < 100; ++k) {
        sim.step();
        drift = std::max(drift, (sim.state().d - sim.initial().d).cwiseAbs().maxCoeff());
        slip = std::max({slip, std::abs(sim.bundle().w[0]), std::abs(sim.bundle().w[m])});
        de = std::max(de, std::abs(sim.energy().total - e0));
    }
    const double l = c.geometry.length;
    v.check(drift <= 1e-6 * l, fmt::format("max |d(t) - d(0)| {:.3e} <= 1e-6 L", drift));
    v.check(slip <= 1e-8, fmt::format("max slip velocity {:.3e} <= 1e-8", slip));
    v.check(de <= 1e-6 * std::abs(e0), fmt::format("max |E(t) - E(0)| {:.3e} <= 1e-6 |E(0)| = {:.3e}", de, 1e-6 * std::abs(e0)));
    return v;
}

struct BalanceRun {
    double t_end = 0.0;
    double energy0 = 0.0;
    double max_increase = 0.0;
    double change = 0.0;
    double dissipated = 0.0;
    double residual = 0.0;
    double max_xi = 0.0;
    double velocity_scale = 0.0;   ///< max over the run of |v| on the surface
    double gap() const { return residual / std::max(std::abs(change), dissipated); }
};

/// Perturbed run over `steps` CFL steps, or up to t_end when it is positive.
BalanceRun balance_run(const RunConfig& c, int steps, double t_end) {
    Simulation sim(c);
    BalanceRun r;
    std::vector<EnergySample> samples;
    auto record = [&] {
        const MonitorRow row = sim.report();
        if (!samples.empty()) r.max_increase = std::max(r.max_increase, row.e_total - samples.back().energy);
        samples.push_back({row.t, row.e_total, row.diss_rate});
        r.max_xi = std::max(r.max_xi, std::abs(row.xi));
        r.velocity_scale = std::max(r.velocity_scale, sim.bundle().v.rowwise().norm().maxCoeff());
    };
    record();
    if (t_end > 0.0) {
        while (sim.state().t < t_end * (1.0 - 1e-14)) {
            sim.step(t_end - sim.state().t);
            record();
        }
    } else {
        for (int k = 0; k < steps; ++k) {
            sim.step();
            record();
        }
    }
    r.t_end = sim.state().t;
    r.energy0 = samples.front().energy;
    r.change = samples.back().energy - samples.front().energy;
    r.dissipated = dissipated_amount(samples);
    r.residual = energy_balance_residual(samples);
    return r;
}

Verdict dissipation_balance(BalanceRun& coarse_out) {
    Verdict v;
    const RunConfig c = perturbed_baseline();
    const BalanceRun coarse = balance_run(c, 20, 0.0);
    coarse_out = coarse;
    RunConfig fine = c;
    fine.numerics.m = 96;
    fine.numerics.h = c.numerics.h * 2.0 / 3.0;
    const BalanceRun refined = balance_run(fine, 0, coarse.t_end);
    v.check(coarse.max_increase <= 1e-6 * std::abs(coarse.energy0),
            fmt::format("max per-step energy increase {:.3e} <= 1e-6 |E(0)| = {:.3e}", coarse.max_increase, 1e-6 * std::abs(coarse.energy0)));
    v.check(coarse.gap() <= 0.05, fmt::format("balance residual {:.3e} / max(|dE| {:.3e}, dissipated {:.3e}) = {:.2f}% <= 5%",
                                              coarse.residual, std::abs(coarse.change), coarse.dissipated, 100.0 * coarse.gap()));
    v.check(refined.gap() < coarse.gap(), fmt::format("gap under refinement (M = 96, h = {:.5f}, same t = {:.4e}): {:.2f}% < {:.2f}%",
                                                      fine.numerics.h, refined.t_end, 100.0 * refined.gap(), 100.0 * coarse.gap()));
    return v;
}

Verdict temporal_order() {
    Verdict v;
    const RichardsonResult r = richardson_order(perturbed_baseline(), 20);
    v.check(r.order >= 3.5, fmt::format("Richardson order {:.3f} >= 3.5 (dt = {:.3e}, {} steps, diffs {:.3e} {:.3e})", r.order, r.dt,
                                        r.steps, r.diff_coarse, r.diff_fine));
    return v;
}

Verdict structural_identities(const BalanceRun& baseline_run) {
    Verdict v;
    const RunConfig c = perturbed_baseline();
    const auto time = identity_time_study(c, 10);
    for (std::size_t k = 1; k < time.size(); ++k) {
        const double rate = std::log2(time[k - 1].dtk_residual / time[k].dtk_residual);
        v.check(rate >= 1.0, fmt::format("dtk residual {:.4e} -> {:.4e} (dt {:.3e} -> {:.3e}): order {:.3f} >= 1", time[k - 1].dtk_residual,
                                         time[k].dtk_residual, time[k - 1].dt, time[k].dt, rate));
    }
    const auto joint = euler_joint_refinement(c, 3, 10);
    for (std::size_t k = 1; k < joint.size(); ++k)
        v.check(joint[k].euler_defect < joint[k - 1].euler_defect,
                fmt::format("Euler defect {:.4e} -> {:.4e} under joint refinement (dt {:.3e} -> {:.3e})", joint[k - 1].euler_defect,
                            joint[k].euler_defect, joint[k - 1].dt, joint[k].dt));
    const double xi_bound = 1e-8 * baseline_run.velocity_scale * c.geometry.length;
    v.check(baseline_run.max_xi <= xi_bound, fmt::format("max |xi| over the baseline run {:.3e} <= 1e-8 max|v| L = {:.3e}",
                                                         baseline_run.max_xi, xi_bound));
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism() {
    Verdict v;
    RunConfig c = perturbed_baseline();
    c.run.perturb_shape = PerturbShape::random;
    c.run.perturb_amplitude = 0.002;
    c.run.seed = 7;
    c.run.steps = 5;
    const fs::path root = fs::temp_directory_path() / "wwcorner_acceptance";
    fs::remove_all(root);
    std::ostringstream log;
    for (const char* name : {"a", "b"}) {
        c.output_dir = (root / name).string();
        run_simulation(c, log);
    }
    const std::string a = slurp(root / "a" / "monitor.csv"), b = slurp(root / "b" / "monitor.csv");
    v.check(!a.empty() && a == b, fmt::format("monitor.csv byte-identical across two serial runs ({} bytes)", a.size()));
    v.check(slurp(root / "a" / "summary.txt") == slurp(root / "b" / "summary.txt"), "summary.txt byte-identical");
    fs::remove_all(root);
    return v;
}

}  // namespace

int main() {
    int passed = 0, total = 0;
    auto report = [&](int index, const std::string& name, const std::function<Verdict()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        const Verdict v = body();
        ++total;
        if (v.pass) ++passed;
        std::cout << fmt::format("{} criterion {}: {} ({:.1f} s)\n", v.pass ? "PASS" : "FAIL", index, name, seconds_since(t0));
        for (const auto& d : v.details) std::cout << "    " << d << "\n";
        std::cout.flush();
    };
    try {
        BalanceRun baseline_run;
        report(1, "elliptic convergence on the pi/12 wedge", elliptic_rates);
        report(2, "D-N operator structure", dno_structure);
        report(3, "D-N spectrum on the rectangle", dno_eigenvalues);
        report(4, "K roundtrip", k_inversion);
        report(5, "equilibrium preservation", equilibrium_preservation);
        report(6, "dissipation balance", [&] { return dissipation_balance(baseline_run); });
        report(7, "temporal order", temporal_order);
        report(8, "structural identities", [&] { return structural_identities(baseline_run); });
        report(9, "determinism", determinism);
    } catch (const std::exception& e) {
        std::cout << "harness error: " << e.what() << "\n";
        return 1;
    }
    std::cout << fmt::format("{} of {} criteria pass\n", passed, total);
    return 0;
}
