#include <doctest.h>

#include "driver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wwc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wwcorner_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig small_run(const fs::path& dir) {
    RunConfig c;
    c.numerics.m = 32;
    c.numerics.h = 1.0 / 16;
    c.numerics.filter = FilterMode::off;
    c.run.initial = InitialKind::perturbed;
    c.run.perturb_amplitude = 0.005;
    c.run.steps = 4;
    c.run.snapshot_every = 2;
    c.output_dir = dir.string();
    return c;
}

}  // namespace

TEST_CASE("monitor rows have a fixed column layout") {
    const std::string header = monitor_csv_header();
    CHECK(std::count(header.begin(), header.end(), ',') == kMonitorColumns - 1);
    MonitorRow r;
    r.t = 0.1;
    r.dtk_res = std::nan("");
    const std::string line = monitor_csv_line(r);
    CHECK(std::count(line.begin(), line.end(), ',') == kMonitorColumns - 1);
    CHECK(monitor_values(r).size() == static_cast<std::size_t>(kMonitorColumns));
}

TEST_CASE("runs are deterministic to the byte") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    std::ostringstream log;
    const RunSummary sa = run_simulation(small_run(a), log);
    const RunSummary sb = run_simulation(small_run(b), log);
    CHECK_FALSE(sa.aborted);
    CHECK(sa.steps == 4);
    CHECK(fs::exists(a / "snapshot_000002.json"));
    CHECK(fs::exists(a / "snapshot_final.json"));
    CHECK(fs::exists(a / "summary.txt"));
    const std::string ca = slurp(a / "monitor.csv");
    CHECK(ca == slurp(b / "monitor.csv"));
    CHECK(std::count(ca.begin(), ca.end(), '\n') == 6);
    // the embedded config differs in output_dir only
    const Snapshot fa = load_snapshot((a / "snapshot_final.json").string());
    const Snapshot fb = load_snapshot((b / "snapshot_final.json").string());
    CHECK(fa.state.d == fb.state.d);
    CHECK(fa.state.w == fb.state.w);
    CHECK(sb.max_energy_increase <= 0.0);
}

TEST_CASE("snapshots restore the state and the in-run report") {
    const fs::path dir = scratch("snap");
    Simulation sim(small_run(dir));
    sim.step();
    sim.step();
    const std::string path = (dir / "s.json").string();
    write_snapshot(sim, path);
    const Snapshot snap = load_snapshot(path);
    CHECK(snap.step == 2);
    CHECK(snap.state.t == sim.state().t);
    CHECK((snap.state.d - sim.state().d).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(snap.report.has_value());

    const Simulation again(snap.config, snap.state);
    const auto now = monitor_values(again.report()), then = monitor_values(*snap.report);
    for (std::size_t k = 0; k < now.size(); ++k) {
        if (!std::isfinite(now[k]) || !std::isfinite(then[k])) continue;
        CHECK(std::abs(now[k] - then[k]) <= 1e-12 * std::max(1.0, std::abs(then[k])));
    }

    std::ostringstream out;
    CHECK(cmd_diagnose(path, {}, out) == 0);
    CHECK(out.str().find("max deviation from in-run report") != std::string::npos);
}

TEST_CASE("damaged snapshots are rejected") {
    const fs::path dir = scratch("bad");
    Simulation sim(small_run(dir));
    const std::string text = snapshot_json(sim);
    CHECK_THROWS_WITH_AS(parse_snapshot(text.substr(0, text.size() / 3)), doctest::Contains("truncated"), ConfigError);
    std::string tampered = text;
    const auto at = tampered.find("\"reference_hash\"");
    REQUIRE(at != std::string::npos);
    const auto digit = tampered.find_first_of("0123456789abcdef", tampered.find(':', at) + 3);
    tampered[digit] = tampered[digit] == '0' ? '1' : '0';
    CHECK_THROWS_AS(parse_snapshot(tampered), ConfigError);

    std::ofstream(dir / "cut.json") << text.substr(0, 40);
    std::ostringstream out;
    CHECK(cmd_diagnose((dir / "cut.json").string(), {}, out) == 2);
}

TEST_CASE("command exit statuses") {
    const fs::path dir = scratch("cmd");
    std::ostringstream out;
    CHECK(cmd_run((dir / "missing.ini").string(), {}, out) == 2);

    std::ofstream(dir / "big.ini") << "[run]\ninitial = perturbed\nperturb_amplitude = 0.5\nsteps = 1\n[geometry]\noverride_angle_gate = true\n";
    CommandOptions o;
    o.output_dir = (dir / "big").string();
    CHECK(cmd_run((dir / "big.ini").string(), o, out) == 3);

    std::ofstream(dir / "one.ini") << "[run]\nlevels = 1\n";
    CHECK(cmd_convergence((dir / "one.ini").string(), o, out) == 2);
}

TEST_CASE("command-line overrides") {
    RunConfig c;
    CommandOptions o;
    o.output_dir = "elsewhere";
    o.seed = 99;
    o.override_angle_gate = true;
    apply_options(c, o);
    CHECK(c.output_dir == "elsewhere");
    CHECK(c.run.seed == 99u);
    CHECK(c.geometry.override_angle_gate);
}
