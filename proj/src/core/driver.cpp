#include "driver.hpp"

#include "json.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace wwc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr const char* kColumns[kMonitorColumns] = {"t",     "E_total",    "E_kin",      "E_surf",  "E_wet",
                                                   "E_grav", "diss_rate", "xi",         "taylor_min", "dtk_res",
                                                   "euler_defect", "omega_l", "omega_r", "d_l",     "d_r"};

MonitorRow row_from_values(const std::vector<double>& v) {
    MonitorRow r;
    double* fields[kMonitorColumns] = {&r.t,          &r.e_total, &r.e_kin, &r.e_surf,       &r.e_wet,
                                       &r.e_grav,     &r.diss_rate, &r.xi,  &r.taylor_min,   &r.dtk_res,
                                       &r.euler_defect, &r.omega_l, &r.omega_r, &r.d_l,      &r.d_r};
    for (int k = 0; k < kMonitorColumns; ++k) *fields[k] = v[static_cast<std::size_t>(k)];
    return r;
}

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, fmt::format("cannot open {} '{}'", what, path));
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw Error(ErrorCode::io, fmt::format("write failed for '{}'", path.string()));
}

int exit_code(const Error& e) {
    switch (e.code()) {
        case ErrorCode::numerical: return 3;
        case ErrorCode::acceptance: return 4;
        default: return 2;
    }
}

std::vector<double> json_vector(const nlohmann::json& j, const char* name) {
    if (!j.is_array()) throw ConfigError(fmt::format("snapshot field '{}' must be an array", name));
    std::vector<double> out;
    for (const auto& x : j) out.push_back(x.is_null() ? kNaN : x.get<double>());
    return out;
}

VectorXd to_vector(const std::vector<double>& v) { return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

std::string monitor_csv_header() {
    std::string s;
    for (int k = 0; k < kMonitorColumns; ++k) s += (k ? "," : "") + std::string(kColumns[k]);
    return s + "\n";
}

std::vector<double> monitor_values(const MonitorRow& r) {
    return {r.t,          r.e_total, r.e_kin,        r.e_surf,  r.e_wet,  r.e_grav, r.diss_rate, r.xi,
            r.taylor_min, r.dtk_res, r.euler_defect, r.omega_l, r.omega_r, r.d_l,   r.d_r};
}

std::string monitor_csv_line(const MonitorRow& r) {
    std::string s;
    const auto v = monitor_values(r);
    for (std::size_t k = 0; k < v.size(); ++k) s += fmt::format("{}{:.17g}", k ? "," : "", v[k]);
    return s + "\n";
}

Simulation::Simulation(const RunConfig& cfg) : cfg_(cfg) {
    validate(cfg_);
    stepper_ = stepper_config(cfg_);
    disc_ = make_discretization(cfg_.geometry, cfg_.numerics.m, cfg_.numerics.h, cfg_.numerics.grading);
    initial_ = initial_state(disc_->ref, cfg_);
    state_ = initial_;
    rebuild();
}

Simulation::Simulation(const RunConfig& cfg, const SurfaceState& state) : cfg_(cfg) {
    validate(cfg_);
    stepper_ = stepper_config(cfg_);
    disc_ = make_discretization(cfg_.geometry, cfg_.numerics.m, cfg_.numerics.h, cfg_.numerics.grading);
    const int n = disc_->ref.size();
    if (state.d.size() != n || state.w.size() != n)
        throw Error(ErrorCode::invalid_argument, fmt::format("state has {} / {} values, the reference has {} nodes",
                                                             state.d.size(), state.w.size(), n));
    initial_ = state;
    state_ = state;
    rebuild();
}

void Simulation::rebuild() { bundle_ = std::make_unique<RhsBundle>(build_rhs_bundle(*disc_->domain, state_, cfg_.physics)); }

double Simulation::stable_dt() const { return cfl_dt(bundle_->frame, stepper_.cfl, cfg_.physics.sigma); }

StepOutcome Simulation::step(double dt) {
    const double limit = stable_dt();
    const double h = dt > 0.0 ? std::min(dt, limit) : limit;
    StepOutcome out = advance(*disc_->domain, state_, h, stepper_);
    state_ = out.state;
    previous_ = std::move(bundle_);
    rebuild();
    last_dt_ = out.dt;
    ++steps_;
    return out;
}

EnergyReport Simulation::energy() const { return physical_energy(*bundle_, cfg_.physics); }

MonitorRow Simulation::report() const {
    const EnergyReport e = energy();
    const RhsBundle& b = *bundle_;
    const int m = disc_->ref.size() - 1;
    MonitorRow r;
    r.t = state_.t;
    r.e_total = e.total;
    r.e_kin = e.kinetic;
    r.e_surf = e.surface;
    r.e_wet = e.wetting;
    r.e_grav = e.gravitational;
    r.diss_rate = e.dissipation_rate;
    r.xi = b.xi;
    r.taylor_min = taylor_sign(b, cfg_.physics);
    r.dtk_res = previous_ ? dtk_identity_residual(*previous_, b, last_dt_) : kNaN;
    r.euler_defect = previous_ ? euler_recovery_defect(*previous_, b, last_dt_, cfg_.physics) : kNaN;
    r.omega_l = b.frame.omega_left;
    r.omega_r = b.frame.omega_right;
    r.d_l = state_.d[0];
    r.d_r = state_.d[m];
    return r;
}

std::string snapshot_json(const Simulation& sim) {
    nlohmann::ordered_json j;
    j["format"] = "wwcorner-snapshot-1";
    j["reference_hash"] = fmt::format("{:016x}", reference_hash(sim.config()));
    j["step"] = sim.steps();
    j["t"] = sim.state().t;
    j["config"] = serialize_config(sim.config());
    j["d"] = std::vector<double>(sim.state().d.data(), sim.state().d.data() + sim.state().d.size());
    j["w"] = std::vector<double>(sim.bundle().w.data(), sim.bundle().w.data() + sim.bundle().w.size());
    auto points = nlohmann::ordered_json::array();
    const PointList& p = sim.bundle().frame.points;
    for (Eigen::Index i = 0; i < p.rows(); ++i) points.push_back({p(i, 0), p(i, 1)});
    j["points"] = points;
    auto report = nlohmann::ordered_json::object();
    const auto values = monitor_values(sim.report());
    for (int k = 0; k < kMonitorColumns; ++k) {
        const double v = values[static_cast<std::size_t>(k)];
        if (std::isfinite(v)) report[kColumns[k]] = v;
        else report[kColumns[k]] = nullptr;
    }
    j["report"] = report;
    return j.dump(1) + "\n";
}

void write_snapshot(const Simulation& sim, const std::string& path) { write_file(path, snapshot_json(sim)); }

Snapshot parse_snapshot(const std::string& text) {
    static constexpr const char* required[] = {"reference_hash", "t", "config", "d", "w"};
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        for (const char* key : required)
            if (text.find(fmt::format("\"{}\"", key)) == std::string::npos)
                throw ConfigError(fmt::format("snapshot is truncated: missing field '{}'", key));
        throw ConfigError(fmt::format("malformed snapshot: {}", e.what()));
    }
    if (!j.is_object()) throw ConfigError("malformed snapshot: top level is not an object");
    for (const char* key : required)
        if (!j.contains(key)) throw ConfigError(fmt::format("snapshot is missing field '{}'", key));
    Snapshot s;
    try {
        s.config = parse_config(j.at("config").get<std::string>());
        s.reference_hash = std::stoull(j.at("reference_hash").get<std::string>(), nullptr, 16);
        s.step = j.value("step", 0);
        s.state.t = j.at("t").get<double>();
        s.state.d = to_vector(json_vector(j.at("d"), "d"));
        s.state.w = to_vector(json_vector(j.at("w"), "w"));
        if (j.contains("report")) {
            std::vector<double> values;
            for (const char* c : kColumns) {
                const auto& v = j.at("report").at(c);
                values.push_back(v.is_null() ? kNaN : v.get<double>());
            }
            s.report = row_from_values(values);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("malformed snapshot: {}", e.what()));
    } catch (const std::invalid_argument&) {
        throw ConfigError("malformed snapshot: reference_hash is not hexadecimal");
    }
    if (s.state.d.size() != s.state.w.size()) throw ConfigError("snapshot fields 'd' and 'w' differ in length");
    if (reference_hash(s.config) != s.reference_hash)
        throw ConfigError("snapshot reference_hash does not match its configuration");
    return s;
}

Snapshot load_snapshot(const std::string& path) { return parse_snapshot(read_file(path, "snapshot")); }

std::string summary_text(const RunSummary& s) {
    std::string out;
    out += fmt::format("status              {}\n", s.aborted ? "aborted" : "completed");
    if (!s.message.empty()) out += fmt::format("message             {}\n", s.message);
    out += fmt::format("steps               {}\n", s.steps);
    out += fmt::format("t                   {:.10g}\n", s.t);
    out += fmt::format("dt halvings         {}\n", s.halvings);
    out += fmt::format("max drift |d-d0|    {:.6e}\n", s.max_drift);
    out += fmt::format("contact angles      [{:.12f}, {:.12f}]\n", s.omega_min, s.omega_max);
    out += fmt::format("max slip velocity   {:.6e}\n", s.max_slip);
    out += fmt::format("energy change       {:.6e}\n", s.energy_change);
    out += fmt::format("dissipated          {:.6e}\n", s.dissipated);
    out += fmt::format("balance residual    {:.6e}\n", s.balance_residual);
    out += fmt::format("max energy increase {:.6e}\n", s.max_energy_increase);
    out += fmt::format("max |xi|            {:.6e}\n", s.max_xi);
    out += fmt::format("min taylor sign     {:.6e}\n", s.min_taylor);
    out += fmt::format("last dtk residual   {:.6e}\n", s.last_dtk);
    out += fmt::format("last euler defect   {:.6e}\n", s.last_euler);
    return out;
}

void apply_options(RunConfig& cfg, const CommandOptions& options) {
    if (!options.output_dir.empty()) cfg.output_dir = options.output_dir;
    if (options.seed) cfg.run.seed = *options.seed;
    if (options.override_angle_gate) cfg.geometry.override_angle_gate = true;
    validate(cfg);
}

RunSummary run_simulation(const RunConfig& cfg, std::ostream& log) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io, fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));

    Simulation sim(cfg);
    std::ofstream csv(dir / "monitor.csv", std::ios::binary);
    if (!csv) throw Error(ErrorCode::io, fmt::format("cannot write '{}'", (dir / "monitor.csv").string()));
    csv << monitor_csv_header();

    RunSummary s;
    std::vector<EnergySample> samples;
    const int m = sim.discretization().ref.size() - 1;
    auto record = [&](const MonitorRow& r, bool output) {
        if (output) csv << monitor_csv_line(r);
        if (!samples.empty()) s.max_energy_increase = std::max(s.max_energy_increase, r.e_total - samples.back().energy);
        samples.push_back({r.t, r.e_total, r.diss_rate});
        s.max_drift = std::max(s.max_drift, (sim.state().d - sim.initial().d).cwiseAbs().maxCoeff());
        s.omega_min = std::min({s.omega_min, r.omega_l, r.omega_r});
        s.omega_max = std::max({s.omega_max, r.omega_l, r.omega_r});
        s.max_slip = std::max({s.max_slip, std::abs(sim.bundle().w[0]), std::abs(sim.bundle().w[m])});
        s.max_xi = std::max(s.max_xi, std::abs(r.xi));
        s.min_taylor = std::min(s.min_taylor, r.taylor_min);
        s.last_dtk = r.dtk_res;
        s.last_euler = r.euler_defect;
    };
    {
        const MonitorRow r0 = sim.report();
        s.omega_min = s.omega_max = r0.omega_l;
        s.min_taylor = r0.taylor_min;
        record(r0, true);
    }
    const bool by_time = cfg.run.t_end > 0.0;
    auto done = [&] {
        return by_time ? sim.state().t >= cfg.run.t_end * (1.0 - 1e-14) : sim.steps() >= cfg.run.steps;
    };
    try {
        while (!done()) {
            const double remaining = by_time ? cfg.run.t_end - sim.state().t : 0.0;
            const StepOutcome o = sim.step(remaining);
            s.halvings += o.halvings;
            const bool last = done();
            record(sim.report(), last || sim.steps() % cfg.run.output_every == 0);
            if (cfg.run.snapshot_every > 0 && sim.steps() % cfg.run.snapshot_every == 0)
                write_snapshot(sim, (dir / fmt::format("snapshot_{:06d}.json", sim.steps())).string());
        }
        write_snapshot(sim, (dir / "snapshot_final.json").string());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::numerical) throw;
        s.aborted = true;
        s.message = e.what();
        write_snapshot(sim, (dir / "snapshot_last_good.json").string());
        log << "numerical abort: " << e.what() << "\n";
    }
    csv.close();
    s.steps = sim.steps();
    s.t = sim.state().t;
    s.energy_change = samples.back().energy - samples.front().energy;
    s.dissipated = dissipated_amount(samples);
    s.balance_residual = samples.size() >= 3 ? energy_balance_residual(samples) : kNaN;
    write_file(dir / "summary.txt", summary_text(s));
    return s;
}

int cmd_run(const std::string& config_path, const CommandOptions& options, std::ostream& out) {
    try {
        RunConfig cfg = load_config(config_path);
        apply_options(cfg, options);
        const RunSummary s = run_simulation(cfg, out);
        out << summary_text(s);
        return s.aborted ? 3 : 0;
    } catch (const Error& e) {
        out << "error: " << e.what() << "\n";
        return exit_code(e);
    }
}

std::vector<StudyRow> convergence_table(const RunConfig& cfg) {
    if (cfg.run.levels < 2) throw ConfigError("convergence ladder: need >= 2 levels");
    constexpr double nan = kNaN;
    std::vector<double> hs;
    for (int k = 0; k < cfg.run.levels; ++k) hs.push_back(cfg.numerics.h / std::pow(2.0, k));
    std::vector<StudyRow> rows = elliptic_convergence(cfg.geometry, hs);

    const auto spectrum = dno_spectrum(cfg.geometry.length, cfg.geometry.depth, cfg.numerics.m, hs.back());
    rows.insert(rows.end(), spectrum.begin(), spectrum.end());

    RunConfig fine = cfg;
    fine.numerics.h = hs.back();
    const auto trips = k_roundtrip(fine, 10);
    double worst = 0.0;
    int iterations = 0;
    for (const auto& t : trips) {
        worst = std::max(worst, t.relative_error);
        iterations = std::max(iterations, t.iterations);
    }
    rows.push_back({"k_roundtrip", "max relative error", fine.numerics.h, worst, nan, 1e-6, worst <= 1e-6});
    rows.push_back({"k_roundtrip", "max Newton iterations", fine.numerics.h, double(iterations), nan, 8, iterations <= 8});

    const RichardsonResult rich = richardson_order(cfg, 20);
    rows.push_back({"richardson", "temporal order", rich.dt, rich.diff_fine, rich.order, 3.5, rich.order >= 3.5});

    const auto time = identity_time_study(cfg, 10);
    for (std::size_t k = 0; k < time.size(); ++k) {
        const double rate = k == 0 ? nan : std::log2(time[k - 1].dtk_residual / time[k].dtk_residual);
        rows.push_back({"dtk_identity", "residual vs dt", time[k].dt, time[k].dtk_residual, rate, 1.0, k == 0 || rate >= 1.0});
    }
    const auto joint = euler_joint_refinement(cfg, cfg.run.levels, 10);
    for (std::size_t k = 0; k < joint.size(); ++k) {
        const double rate = k == 0 ? nan : std::log(joint[k - 1].euler_defect / joint[k].euler_defect) / std::log(joint[k - 1].dt / joint[k].dt);
        rows.push_back({"euler_defect", "defect vs joint refinement", joint[k].dt, joint[k].euler_defect, rate, 0.0,
                        k == 0 || joint[k].euler_defect < joint[k - 1].euler_defect});
    }
    return rows;
}

int cmd_convergence(const std::string& config_path, const CommandOptions& options, std::ostream& out) {
    try {
        RunConfig cfg = load_config(config_path);
        apply_options(cfg, options);
        const auto rows = convergence_table(cfg);
        std::filesystem::create_directories(cfg.output_dir);
        std::string csv = "study,quantity,resolution,value,rate,threshold,pass\n";
        std::vector<std::string> failing;
        for (const auto& r : rows) {
            csv += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.study, r.quantity, r.resolution, r.value, r.rate,
                               r.threshold, r.pass ? "pass" : "fail");
            out << fmt::format("{:<14} {:<28} res {:<11.4e} value {:<11.4e} rate {:<8.3f} threshold {:<8.3g} {}\n", r.study,
                               r.quantity, r.resolution, r.value, r.rate, r.threshold, r.pass ? "pass" : "FAIL");
            if (!r.pass) failing.push_back(fmt::format("{} / {} at {:.4e}", r.study, r.quantity, r.resolution));
        }
        write_file(std::filesystem::path(cfg.output_dir) / "convergence.csv", csv);
        for (const auto& f : failing) out << "failing row: " << f << "\n";
        return failing.empty() ? 0 : 4;
    } catch (const Error& e) {
        out << "error: " << e.what() << "\n";
        return exit_code(e);
    }
}

int cmd_diagnose(const std::string& snapshot_path, const CommandOptions& options, std::ostream& out) {
    try {
        Snapshot snap = load_snapshot(snapshot_path);
        apply_options(snap.config, options);
        const Simulation sim(snap.config, snap.state);
        const MonitorRow r = sim.report();
        const RhsBundle& b = sim.bundle();
        const VectorXd na = compute_Na(*b.map, snap.config.physics.a);
        const double omega_s = snap.config.physics.omega_s;
        out << fmt::format("snapshot            {} (step {}, t = {:.10g})\n", snapshot_path, snap.step, snap.state.t);
        out << fmt::format("nodes               {}\n", b.frame.d.size());
        out << fmt::format("contact angles      {:.15f} {:.15f} (omega_s {:.15f}, deviation {:.3e})\n", r.omega_l, r.omega_r,
                           omega_s, std::max(std::abs(r.omega_l - omega_s), std::abs(r.omega_r - omega_s)));
        out << fmt::format("curvature range     [{:.6e}, {:.6e}]\n", b.frame.kappa.minCoeff(), b.frame.kappa.maxCoeff());
        out << fmt::format("|N_a|_inf           {:.6e}\n", na.cwiseAbs().maxCoeff());
        out << fmt::format("|N(kappa)|_inf      {:.6e}\n", b.nk.cwiseAbs().maxCoeff());
        out << fmt::format("energy total        {:.15e}\n", r.e_total);
        out << fmt::format("  kinetic           {:.15e}\n", r.e_kin);
        out << fmt::format("  surface           {:.15e}\n", r.e_surf);
        out << fmt::format("  wetting           {:.15e}\n", r.e_wet);
        out << fmt::format("  gravitational     {:.15e}\n", r.e_grav);
        out << fmt::format("dissipation rate    {:.6e}\n", r.diss_rate);
        out << fmt::format("xi                  {:.6e}\n", r.xi);
        out << fmt::format("taylor sign min     {:.6e}\n", r.taylor_min);
        out << fmt::format("slip velocities     {:.6e} {:.6e}\n", b.w[0], b.w[b.w.size() - 1]);
        if (snap.report) {
            const auto now = monitor_values(r), then = monitor_values(*snap.report);
            double dev = 0.0;
            for (std::size_t k = 0; k < now.size(); ++k)
                if (std::isfinite(now[k]) && std::isfinite(then[k]))
                    dev = std::max(dev, std::abs(now[k] - then[k]) / std::max(1.0, std::abs(then[k])));
            out << fmt::format("max deviation from in-run report {:.3e}\n", dev);
        }
        return 0;
    } catch (const Error& e) {
        out << "error: " << e.what() << "\n";
        return exit_code(e);
    }
}

}  // namespace wwc
