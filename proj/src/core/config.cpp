#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace wwc {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_plain(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ConfigError(where + ": expected a number, got '" + s + "'");
    return v;
}

/// Accepts plain numbers and the forms pi, pi/q, p*pi, p*pi/q.
double parse_real(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    const auto at = s.find("pi");
    if (at == std::string::npos) return parse_plain(s, where);
    double factor = 1.0;
    if (at > 0) {
        std::string head = trim(s.substr(0, at));
        if (head.empty() || head.back() != '*') throw ConfigError(where + ": malformed pi expression '" + s + "'");
        head.pop_back();
        factor = parse_plain(trim(head), where);
    }
    std::string tail = trim(s.substr(at + 2));
    if (!tail.empty()) {
        if (tail.front() != '/') throw ConfigError(where + ": malformed pi expression '" + s + "'");
        factor /= parse_plain(trim(tail.substr(1)), where);
    }
    return factor * kPi;
}

int parse_int(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(where + ": expected an integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(where + ": expected a boolean, got '" + s + "'");
}

std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

const char* tank_name(TankShape t) {
    switch (t) {
        case TankShape::rectangle: return "rectangle";
        case TankShape::wedge: return "wedge";
        case TankShape::trapezoid: return "trapezoid";
    }
    return "wedge";
}

const char* filter_name(FilterMode f) {
    switch (f) {
        case FilterMode::off: return "off";
        case FilterMode::on: return "on";
        case FilterMode::automatic: return "auto";
    }
    return "auto";
}

const char* initial_name(InitialKind k) {
    switch (k) {
        case InitialKind::equilibrium: return "equilibrium";
        case InitialKind::perturbed: return "perturbed";
        case InitialKind::flat: return "flat";
    }
    return "equilibrium";
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value) {
    const std::string where = "[" + section + "] " + key;
    auto& geo = cfg.geometry;
    auto& phy = cfg.physics;
    auto& num = cfg.numerics;
    auto& run = cfg.run;
    if (section == "geometry") {
        if (key == "tank") {
            const std::string v = trim(value);
            if (v == "rectangle") geo.tank = TankShape::rectangle;
            else if (v == "wedge") geo.tank = TankShape::wedge;
            else if (v == "trapezoid") geo.tank = TankShape::trapezoid;
            else throw ConfigError(where + ": unknown tank shape '" + v + "'");
        } else if (key == "length") geo.length = parse_real(value, where);
        else if (key == "wall_angle") geo.wall_angle_left = geo.wall_angle_right = parse_real(value, where);
        else if (key == "wall_angle_left") geo.wall_angle_left = parse_real(value, where);
        else if (key == "wall_angle_right") geo.wall_angle_right = parse_real(value, where);
        else if (key == "depth") geo.depth = parse_real(value, where);
        else if (key == "wall_extension") geo.wall_extension = parse_real(value, where);
        else if (key == "blend_length") geo.blend_length = parse_real(value, where);
        else if (key == "c0") geo.c0 = parse_real(value, where);
        else if (key == "delta") geo.delta = parse_real(value, where);
        else if (key == "override_angle_gate") geo.override_angle_gate = parse_bool(value, where);
        else if (key == "M") num.m = parse_int(value, where);
        else throw ConfigError("unknown key " + where);
    } else if (section == "physics") {
        if (key == "sigma") phy.sigma = parse_real(value, where);
        else if (key == "beta_c") phy.beta_c = parse_real(value, where);
        else if (key == "omega_s") phy.omega_s = parse_real(value, where);
        else if (key == "g") phy.g = parse_real(value, where);
        else if (key == "a") phy.a = parse_real(value, where);
        else throw ConfigError("unknown key " + where);
    } else if (section == "numerics") {
        if (key == "M") num.m = parse_int(value, where);
        else if (key == "h") num.h = parse_real(value, where);
        else if (key == "grading") num.grading = parse_real(value, where);
        else if (key == "cfl") num.cfl = parse_real(value, where);
        else if (key == "filter") {
            const std::string v = trim(value);
            if (v == "auto") num.filter = FilterMode::automatic;
            else num.filter = parse_bool(v, where) ? FilterMode::on : FilterMode::off;
        } else if (key == "filter_alpha") num.filter_alpha = parse_real(value, where);
        else if (key == "filter_order") num.filter_order = parse_int(value, where);
        else if (key == "newton_tol") num.newton_tol = parse_real(value, where);
        else if (key == "newton_max_iter") num.newton_max_iter = parse_int(value, where);
        else if (key == "newton_jacobian") {
            const std::string v = trim(value);
            if (v == "full") num.newton_jacobian = NewtonJacobian::full;
            else if (v == "curvature") num.newton_jacobian = NewtonJacobian::curvature;
            else if (v == "principal") num.newton_jacobian = NewtonJacobian::principal;
            else throw ConfigError(where + ": expected 'full', 'curvature' or 'principal'");
        } else if (key == "max_halvings") num.max_halvings = parse_int(value, where);
        else throw ConfigError("unknown key " + where);
    } else if (section == "run") {
        if (key == "t_end") run.t_end = parse_real(value, where);
        else if (key == "steps") run.steps = parse_int(value, where);
        else if (key == "output_every") run.output_every = parse_int(value, where);
        else if (key == "snapshot_every") run.snapshot_every = parse_int(value, where);
        else if (key == "seed") {
            const std::string v = trim(value);
            std::uint64_t s = 0;
            auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
            if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(where + ": expected an unsigned integer");
            run.seed = s;
        } else if (key == "initial") {
            const std::string v = trim(value);
            if (v == "equilibrium") run.initial = InitialKind::equilibrium;
            else if (v == "perturbed") run.initial = InitialKind::perturbed;
            else if (v == "flat") run.initial = InitialKind::flat;
            else throw ConfigError(where + ": unknown initial state '" + v + "'");
        } else if (key == "perturb_amplitude") run.perturb_amplitude = parse_real(value, where);
        else if (key == "perturb_mode") run.perturb_mode = parse_int(value, where);
        else if (key == "perturb_shape") {
            const std::string v = trim(value);
            if (v == "cos") run.perturb_shape = PerturbShape::cosine;
            else if (v == "sin") run.perturb_shape = PerturbShape::sine;
            else if (v == "random") run.perturb_shape = PerturbShape::random;
            else throw ConfigError(where + ": expected 'cos', 'sin' or 'random'");
        } else if (key == "levels") run.levels = parse_int(value, where);
        else if (key == "output_dir") cfg.output_dir = trim(value);
        else throw ConfigError("unknown key " + where);
    } else {
        throw ConfigError("unknown section [" + section + "]");
    }
}

RunConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
    }
    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside of any section");
        for (const auto& [key, value] : body) set_config_value(cfg, section, key, value.data());
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    std::string s;
    s += "[geometry]\n";
    s += fmt::format("tank = {}\n", tank_name(c.geometry.tank));
    s += "length = " + fmt_real(c.geometry.length) + "\n";
    s += "wall_angle_left = " + fmt_real(c.geometry.wall_angle_left) + "\n";
    s += "wall_angle_right = " + fmt_real(c.geometry.wall_angle_right) + "\n";
    s += "depth = " + fmt_real(c.geometry.depth) + "\n";
    s += "wall_extension = " + fmt_real(c.geometry.wall_extension) + "\n";
    s += "blend_length = " + fmt_real(c.geometry.blend_length) + "\n";
    s += "c0 = " + fmt_real(c.geometry.c0) + "\n";
    s += "delta = " + fmt_real(c.geometry.delta) + "\n";
    s += fmt::format("override_angle_gate = {}\n", c.geometry.override_angle_gate);
    s += "\n[physics]\n";
    s += "sigma = " + fmt_real(c.physics.sigma) + "\n";
    s += "beta_c = " + fmt_real(c.physics.beta_c) + "\n";
    s += "omega_s = " + fmt_real(c.physics.omega_s) + "\n";
    s += "g = " + fmt_real(c.physics.g) + "\n";
    s += "a = " + fmt_real(c.physics.a) + "\n";
    s += "\n[numerics]\n";
    s += fmt::format("M = {}\n", c.numerics.m);
    s += "h = " + fmt_real(c.numerics.h) + "\n";
    s += "grading = " + fmt_real(c.numerics.grading) + "\n";
    s += "cfl = " + fmt_real(c.numerics.cfl) + "\n";
    s += fmt::format("filter = {}\n", filter_name(c.numerics.filter));
    s += "filter_alpha = " + fmt_real(c.numerics.filter_alpha) + "\n";
    s += fmt::format("filter_order = {}\n", c.numerics.filter_order);
    s += "newton_tol = " + fmt_real(c.numerics.newton_tol) + "\n";
    s += fmt::format("newton_max_iter = {}\n", c.numerics.newton_max_iter);
    const char* jac_names[] = {"principal", "curvature", "full"};
    s += fmt::format("newton_jacobian = {}\n", jac_names[static_cast<int>(c.numerics.newton_jacobian)]);
    s += fmt::format("max_halvings = {}\n", c.numerics.max_halvings);
    s += "\n[run]\n";
    s += "t_end = " + fmt_real(c.run.t_end) + "\n";
    s += fmt::format("steps = {}\n", c.run.steps);
    s += fmt::format("output_every = {}\n", c.run.output_every);
    s += fmt::format("snapshot_every = {}\n", c.run.snapshot_every);
    s += fmt::format("seed = {}\n", c.run.seed);
    s += fmt::format("initial = {}\n", initial_name(c.run.initial));
    s += "perturb_amplitude = " + fmt_real(c.run.perturb_amplitude) + "\n";
    s += fmt::format("perturb_mode = {}\n", c.run.perturb_mode);
    const char* shape_names[] = {"cos", "sin", "random"};
    s += fmt::format("perturb_shape = {}\n", shape_names[static_cast<int>(c.run.perturb_shape)]);
    s += fmt::format("levels = {}\n", c.run.levels);
    s += "output_dir = " + c.output_dir + "\n";
    return s;
}

void validate(const RunConfig& c) {
    const auto& g = c.geometry;
    const auto& p = c.physics;
    const auto& n = c.numerics;
    const auto& r = c.run;
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(g.length > 0, "[geometry] length must be positive");
    require(g.wall_angle_left > 0 && g.wall_angle_left <= kPi / 2, "[geometry] wall_angle_left must lie in (0, pi/2]");
    require(g.wall_angle_right > 0 && g.wall_angle_right <= kPi / 2, "[geometry] wall_angle_right must lie in (0, pi/2]");
    require(g.depth > 0, "[geometry] depth must be positive");
    require(g.wall_extension > 0, "[geometry] wall_extension must be positive");
    require(g.blend_length > 0 && g.blend_length < 0.5, "[geometry] blend_length must lie in (0, 0.5)");
    require(g.c0 > 0 && g.c0 < 1, "[geometry] c0 must lie in (0, 1)");
    require(g.delta > 0, "[geometry] delta must be positive");
    require(p.sigma > 0, "[physics] sigma must be positive");
    require(p.beta_c > 0, "[physics] beta_c must be positive");
    require(p.omega_s > 0 && p.omega_s < kPi / 2, "[physics] omega_s must lie in (0, pi/2)");
    require(p.g >= 0, "[physics] g must be non-negative");
    require(p.a > 0, "[physics] a must be positive");
    require(n.m >= 4 && n.m % 2 == 0, "[numerics] M must be an even integer >= 4");
    require(n.h > 0 && n.h < g.length, "[numerics] h must lie in (0, length)");
    require(n.grading > 0 && n.grading <= 1, "[numerics] grading must lie in (0, 1]");
    require(n.cfl > 0, "[numerics] cfl must be positive");
    require(n.filter_alpha >= 0 && n.filter_order >= 1, "[numerics] filter parameters out of range");
    require(n.newton_tol > 0 && n.newton_max_iter >= 1, "[numerics] Newton settings out of range");
    require(n.max_halvings >= 0, "[numerics] max_halvings must be non-negative");
    require(r.t_end >= 0 && r.steps >= 0, "[run] t_end and steps must be non-negative");
    require(r.output_every >= 1, "[run] output_every must be >= 1");
    require(r.snapshot_every >= 0, "[run] snapshot_every must be >= 0");
    require(r.perturb_mode >= 1, "[run] perturb_mode must be >= 1");
    require(r.perturb_amplitude >= 0, "[run] perturb_amplitude must be non-negative");
    require(r.levels >= 1, "[run] levels must be >= 1");
}

std::uint64_t reference_hash(const RunConfig& c) {
    const std::string key = fmt::format(
        "{}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{:.17g}|{}|{:.17g}|{:.17g}", tank_name(c.geometry.tank),
        c.geometry.length, c.geometry.wall_angle_left, c.geometry.wall_angle_right, c.geometry.depth,
        c.geometry.wall_extension, c.geometry.blend_length, c.geometry.c0, c.numerics.m, c.numerics.h,
        c.numerics.grading);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char ch : key) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace wwc
