#include "wwcorner/wwcorner.h"

#include "driver.hpp"

#include <cstring>
#include <iostream>
#include <new>

struct wwc_config {
    wwc::RunConfig cfg;
};

struct wwc_sim {
    std::unique_ptr<wwc::Simulation> sim;
};

namespace {

thread_local std::string last_error;

wwc_status fail(wwc_status code, const char* what) {
    last_error = what;
    return code;
}

/// Runs body, translating exceptions into status codes and the thread-local message.
template <class F>
wwc_status guarded(F&& body) {
    try {
        last_error.clear();
        return body();
    } catch (const wwc::Error& e) {
        return fail(static_cast<wwc_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::bad_alloc&) {
        return fail(WWC_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(WWC_ERR_INTERNAL, e.what());
    }
}

wwc::CommandOptions to_options(const wwc_options* o) {
    wwc::CommandOptions out;
    if (!o) return out;
    if (o->output_dir) out.output_dir = o->output_dir;
    if (o->has_seed) out.seed = o->seed;
    out.override_angle_gate = o->override_angle_gate != 0;
    out.serial = o->serial != 0;
    return out;
}

/// Commands report their own errors; anything escaping them is a numerical abort.
template <class F>
int run_command(F&& body) {
    try {
        last_error.clear();
        return body();
    } catch (const std::exception& e) {
        last_error = e.what();
        std::cout << "error: " << e.what() << "\n";
        return WWC_ERR_NUMERICAL;
    }
}

}  // namespace

extern "C" {

const char* wwc_last_error(void) { return last_error.c_str(); }

const char* wwc_version(void) { return "0.1.0"; }

wwc_status wwc_config_default(wwc_config** out) {
    if (!out) return fail(WWC_ERR_INVALID_ARGUMENT, "null output pointer");
    return guarded([&] {
        *out = new wwc_config{};
        return WWC_OK;
    });
}

wwc_status wwc_config_load(const char* path, wwc_config** out) {
    if (!path || !out) return fail(WWC_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new wwc_config{wwc::load_config(path)};
        return WWC_OK;
    });
}

wwc_status wwc_config_parse(const char* text, wwc_config** out) {
    if (!text || !out) return fail(WWC_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new wwc_config{wwc::parse_config(text)};
        return WWC_OK;
    });
}

wwc_status wwc_config_set(wwc_config* cfg, const char* section, const char* key, const char* value) {
    if (!cfg || !section || !key || !value) return fail(WWC_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        wwc::RunConfig next = cfg->cfg;
        wwc::set_config_value(next, section, key, value);
        wwc::validate(next);
        cfg->cfg = next;
        return WWC_OK;
    });
}

wwc_status wwc_config_serialize(const wwc_config* cfg, char* buffer, size_t size, size_t* needed) {
    if (!cfg) return fail(WWC_ERR_INVALID_ARGUMENT, "null config");
    return guarded([&] {
        const std::string text = wwc::serialize_config(cfg->cfg);
        if (needed) *needed = text.size() + 1;
        if (!buffer || size < text.size() + 1) return fail(WWC_ERR_BUFFER_TOO_SMALL, "buffer too small for the serialized config");
        std::memcpy(buffer, text.c_str(), text.size() + 1);
        return WWC_OK;
    });
}

void wwc_config_free(wwc_config* cfg) { delete cfg; }

wwc_status wwc_sim_create(const wwc_config* cfg, wwc_sim** out) {
    if (!cfg || !out) return fail(WWC_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto sim = std::make_unique<wwc::Simulation>(cfg->cfg);
        *out = new wwc_sim{std::move(sim)};
        return WWC_OK;
    });
}

void wwc_sim_free(wwc_sim* sim) { delete sim; }

wwc_status wwc_sim_nodes(const wwc_sim* sim, size_t* count) {
    if (!sim || !count) return fail(WWC_ERR_INVALID_ARGUMENT, "null argument");
    *count = static_cast<size_t>(sim->sim->state().d.size());
    return WWC_OK;
}

wwc_status wwc_sim_step(wwc_sim* sim, int n) {
    if (!sim || n < 0) return fail(WWC_ERR_INVALID_ARGUMENT, "null simulation or negative step count");
    return guarded([&] {
        for (int k = 0; k < n; ++k) sim->sim->step();
        return WWC_OK;
    });
}

wwc_status wwc_sim_state(const wwc_sim* sim, double* d, double* w, size_t count, double* t) {
    if (!sim) return fail(WWC_ERR_INVALID_ARGUMENT, "null simulation");
    const auto& s = sim->sim->state();
    const auto& wb = sim->sim->bundle().w;
    const size_t n = static_cast<size_t>(s.d.size());
    if ((d || w) && count < n) return fail(WWC_ERR_BUFFER_TOO_SMALL, "state buffer shorter than the node count");
    if (d) std::memcpy(d, s.d.data(), n * sizeof(double));
    if (w) std::memcpy(w, wb.data(), n * sizeof(double));
    if (t) *t = s.t;
    return WWC_OK;
}

wwc_status wwc_sim_report(const wwc_sim* sim, wwc_report* out) {
    if (!sim || !out) return fail(WWC_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const wwc::MonitorRow r = sim->sim->report();
        *out = wwc_report{r.t,       r.e_total,    r.e_kin,   r.e_surf,  r.e_wet, r.e_grav, r.diss_rate, r.xi,
                          r.taylor_min, r.dtk_res, r.euler_defect, r.omega_l, r.omega_r, r.d_l, r.d_r};
        return WWC_OK;
    });
}

wwc_status wwc_sim_write_snapshot(const wwc_sim* sim, const char* path) {
    if (!sim || !path) return fail(WWC_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        wwc::write_snapshot(*sim->sim, path);
        return WWC_OK;
    });
}

int wwc_cmd_run(const char* config_path, const wwc_options* options) {
    if (!config_path) return fail(WWC_ERR_CONFIG, "null config path");
    return run_command([&] { return wwc::cmd_run(config_path, to_options(options), std::cout); });
}

int wwc_cmd_convergence(const char* config_path, const wwc_options* options) {
    if (!config_path) return fail(WWC_ERR_CONFIG, "null config path");
    return run_command([&] { return wwc::cmd_convergence(config_path, to_options(options), std::cout); });
}

int wwc_cmd_diagnose(const char* snapshot_path, const wwc_options* options) {
    if (!snapshot_path) return fail(WWC_ERR_CONFIG, "null snapshot path");
    return run_command([&] { return wwc::cmd_diagnose(snapshot_path, to_options(options), std::cout); });
}

}  // extern "C"
