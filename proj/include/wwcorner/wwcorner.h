#ifndef WWCORNER_H
#define WWCORNER_H

/* C interface of the wwcorner contact-line water-wave simulator. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WWC_API __declspec(dllexport)
#else
#define WWC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; the nonzero command codes are also process exit statuses. */
typedef enum wwc_status {
    WWC_OK = 0,
    WWC_ERR_INVALID_ARGUMENT = 1,
    WWC_ERR_CONFIG = 2,
    WWC_ERR_NUMERICAL = 3,
    WWC_ERR_ACCEPTANCE = 4,
    WWC_ERR_IO = 5,
    WWC_ERR_BUFFER_TOO_SMALL = 6,
    WWC_ERR_INTERNAL = 7
} wwc_status;

typedef struct wwc_config wwc_config;
typedef struct wwc_sim wwc_sim;

/* Monitor values of one state, in the column order of monitor.csv. dtk_res and
   euler_defect are NaN until the first step. */
typedef struct wwc_report {
    double t;
    double e_total;
    double e_kin;
    double e_surf;
    double e_wet;
    double e_grav;
    double diss_rate;
    double xi;
    double taylor_min;
    double dtk_res;
    double euler_defect;
    double omega_l;
    double omega_r;
    double d_l;
    double d_r;
} wwc_report;

/* Command-line style overrides; zero-initialise for none. */
typedef struct wwc_options {
    const char* output_dir; /* NULL keeps the configured directory */
    int has_seed;
    uint64_t seed;
    int override_angle_gate;
    int serial;
} wwc_options;

/* Message of the last failure on the calling thread; never NULL. */
WWC_API const char* wwc_last_error(void);
WWC_API const char* wwc_version(void);

WWC_API wwc_status wwc_config_default(wwc_config** out);
WWC_API wwc_status wwc_config_load(const char* path, wwc_config** out);
WWC_API wwc_status wwc_config_parse(const char* text, wwc_config** out);
WWC_API wwc_status wwc_config_set(wwc_config* cfg, const char* section, const char* key, const char* value);
/* Writes the serialized config including the terminating NUL; *needed receives the required size. */
WWC_API wwc_status wwc_config_serialize(const wwc_config* cfg, char* buffer, size_t size, size_t* needed);
WWC_API void wwc_config_free(wwc_config* cfg);

WWC_API wwc_status wwc_sim_create(const wwc_config* cfg, wwc_sim** out);
WWC_API void wwc_sim_free(wwc_sim* sim);
/* Number of surface collocation nodes (M + 1). */
WWC_API wwc_status wwc_sim_nodes(const wwc_sim* sim, size_t* count);
/* Takes n CFL steps. */
WWC_API wwc_status wwc_sim_step(wwc_sim* sim, int n);
/* Copies d and w (each of length count) and the time; either array may be NULL. */
WWC_API wwc_status wwc_sim_state(const wwc_sim* sim, double* d, double* w, size_t count, double* t);
WWC_API wwc_status wwc_sim_report(const wwc_sim* sim, wwc_report* out);
WWC_API wwc_status wwc_sim_write_snapshot(const wwc_sim* sim, const char* path);

/* Commands; the return value is the exit status (0, 2, 3 or 4). Output goes to stdout. */
WWC_API int wwc_cmd_run(const char* config_path, const wwc_options* options);
WWC_API int wwc_cmd_convergence(const char* config_path, const wwc_options* options);
WWC_API int wwc_cmd_diagnose(const char* snapshot_path, const wwc_options* options);

#ifdef __cplusplus
}
#endif

#endif
