#ifndef CHEMSICAL_H
#define CHEMSICAL_H

/* C interface to the reaction-network engines and the receiver experiments.
 * Objects are opaque handles released with the matching *_free function.
 * Every call returns a cs_status; on failure cs_last_error() describes it
 * (per thread, valid until the next failing call on that thread).
 * Strings returned through char** are owned by the caller: cs_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(CHEMSICAL_BUILDING_LIBRARY)
#define CS_API __attribute__((visibility("default")))
#else
#define CS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    CS_OK = 0,
    CS_ERR_PARSE = 1,            /* malformed .crn text */
    CS_ERR_INVALID_ARGUMENT = 2, /* bad parameter or option */
    CS_ERR_CONTRACT = 3,         /* network or state violates an invariant */
    CS_ERR_INTEGRATION = 4,      /* ODE step size underflow */
    CS_ERR_IO = 5,
    CS_ERR_INTERNAL = 6
} cs_status;

typedef struct cs_document cs_document;
typedef struct cs_trajectory cs_trajectory;

CS_API const char* cs_last_error(void);
CS_API void cs_string_free(char* s);
CS_API const char* cs_version(void);

/* ---- networks ---- */

CS_API cs_status cs_document_parse(const char* text, cs_document** out);
CS_API cs_status cs_document_read_file(const char* path, cs_document** out);
CS_API void cs_document_free(cs_document* doc);
CS_API cs_status cs_document_serialize(const cs_document* doc, char** out);
/* Validation findings and conservation laws as text; *valid is 1 when the
 * network has no violations. */
CS_API cs_status cs_document_check(const cs_document* doc, int* valid, char** report);
CS_API cs_status cs_document_set_initial(cs_document* doc, const char* species, uint64_t amount);

typedef enum { CS_ADAPT_CATALYTIC = 0, CS_ADAPT_CONSUMING = 1 } cs_adaptation;
typedef enum { CS_TRANSLATE_COPY = 0, CS_TRANSLATE_TRANSFER = 1 } cs_translation;

typedef struct {
    uint64_t tau1, tau2_0, tau2_1;
    /* kappa_D1, kappa_T1, kappa_AM1, kappa_WA1, kappa_D2, kappa_T2, kappa_AM2 */
    double kappa[7];
    uint64_t stage2_pool;
    uint64_t input_count;
    uint64_t n_max;
    int adaptation;  /* cs_adaptation */
    int translation; /* cs_translation */
} cs_chemsical_params;

CS_API void cs_chemsical_params_default(cs_chemsical_params* p);
/* Rate constant sets 1..5. */
CS_API cs_status cs_rrc_preset(int index, double kappa[7]);
CS_API cs_status cs_chemsical_build(const cs_chemsical_params* p, cs_document** out);

/* ---- simulation ---- */

typedef struct {
    double t_end;
    size_t sample_count;
    double rel_tol, abs_tol;
    double steady_state_epsilon; /* 0 disables the early stop */
} cs_ode_options;

typedef enum { CS_RECORD_FINAL = 0, CS_RECORD_GRID = 1, CS_RECORD_EVENTS = 2 } cs_record_mode;

typedef struct {
    double t_end;
    int record_mode; /* cs_record_mode */
    size_t sample_count;
    uint64_t max_events;
    int aggregate_pools;
} cs_ssa_options;

CS_API void cs_ode_options_default(cs_ode_options* o);
CS_API void cs_ssa_options_default(cs_ssa_options* o);

CS_API cs_status cs_simulate_ode(const cs_document* doc, const cs_ode_options* o, cs_trajectory** out);
CS_API cs_status cs_simulate_ssa(const cs_document* doc, const cs_ssa_options* o, uint64_t base_seed,
                                 uint64_t stream_index, cs_trajectory** out);
CS_API void cs_trajectory_free(cs_trajectory* traj);
CS_API size_t cs_trajectory_rows(const cs_trajectory* traj);
CS_API size_t cs_trajectory_species_count(const cs_trajectory* traj);
CS_API const char* cs_trajectory_species_name(const cs_trajectory* traj, size_t i);
CS_API cs_status cs_trajectory_value(const cs_trajectory* traj, size_t row, size_t col, double* out);
CS_API cs_status cs_trajectory_time(const cs_trajectory* traj, size_t row, double* out);
/* "t_end", "steady_state", "absorbing" or "max_events". */
CS_API const char* cs_trajectory_stop_reason(const cs_trajectory* traj);
CS_API cs_status cs_trajectory_csv(const cs_trajectory* traj, char** out);
/* Decision bits read from the final state of a receiver network. */
CS_API cs_status cs_trajectory_decision(const cs_trajectory* traj, int* s1, int* s2);

/* Final-state ensemble summary as JSON. */
CS_API cs_status cs_ensemble_json(const cs_document* doc, size_t n_traj, uint64_t base_seed,
                                  const cs_ssa_options* o, unsigned workers, char** out);

/* ---- channel and experiments ---- */

typedef struct {
    double d1, d2;      /* m */
    double radius;      /* m */
    double diffusion;   /* m^2/s */
    double n_tx;
    double t_sample;    /* s; 0 samples at the peak time of the first transmitter */
} cs_channel_params;

CS_API void cs_channel_params_default(cs_channel_params* c);
CS_API cs_status cs_channel_signal(const cs_channel_params* c, double* t_p, double* lambda1, double* lambda2);

typedef struct {
    cs_channel_params channel;
    cs_chemsical_params chem; /* input_count ignored */
    uint64_t stride;
    size_t n_traj;
    uint64_t base_seed;
    double t_end;
    unsigned workers;
    int timestamp;          /* emit a "# generated:" line */
    const char* provenance; /* text after "# params: " */
} cs_scenario;

CS_API void cs_scenario_default(cs_scenario* s);

typedef enum { CS_SWEEP_THRESHOLDS = 0, CS_SWEEP_KAPPA_AM2 = 1, CS_SWEEP_PARAMETER = 2 } cs_sweep_axis;

CS_API cs_status cs_pmf_csv(const cs_scenario* s, char** csv);
/* *truncated receives the number of trajectories stopped by max_events. */
CS_API cs_status cs_curve_csv(const cs_scenario* s, char** csv, double* p_e, size_t* truncated);
CS_API cs_status cs_profile_csv(const cs_scenario* s, char** csv, double* weighted_error);
/* values may be NULL for the axis default grid. */
CS_API cs_status cs_sweep_csv(const cs_scenario* s, int axis, const char* parameter, const double* values,
                              size_t n_values, char** csv);
CS_API cs_status cs_ideal_error(const cs_scenario* s, double* out);

#ifdef __cplusplus
}
#endif

#endif
