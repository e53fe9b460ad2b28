/* C interface to the netflow library.
 *
 * Objects are opaque handles created by nf_*_create / nf_*_load style calls
 * and released with the matching nf_*_free (NULL is accepted). Every fallible
 * call returns an nf_status; on failure nf_last_error() describes the error
 * for the calling thread until its next failing call. Output pointers are
 * written only on success.
 *
 * State vectors are arrays of node_count doubles. Series states are stored
 * column-major: the state at time k starts at states[k * dimension].
 */
#ifndef NETFLOW_H
#define NETFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(NETFLOW_BUILDING_LIBRARY)
#define NF_API __attribute__((visibility("default")))
#else
#define NF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nf_status {
  NF_OK = 0,
  NF_ERR_INVALID_ARGUMENT = 1,
  NF_ERR_FORMAT = 2,
  NF_ERR_CONFIG = 3,
  NF_ERR_NUMERICAL = 4,
  NF_ERR_IO = 5,
  NF_ERR_INTERNAL = 6
} nf_status;

typedef struct nf_network nf_network;
typedef struct nf_series nf_series;
typedef struct nf_model nf_model;
typedef struct nf_config nf_config;

NF_API const char* nf_last_error(void);
NF_API const char* nf_version(void);
NF_API const char* nf_status_name(nf_status status);

/* 16 hex digits of the FNV-1a digest of `text`, plus terminator. */
NF_API nf_status nf_hash_string(const char* text, char out[17]);

/* ---- networks ---------------------------------------------------------- */

NF_API nf_status nf_network_grid(int side, nf_network** out);
NF_API nf_status nf_network_er(int n, double p, uint64_t seed, nf_network** out);
NF_API nf_status nf_network_ba(int n, int m, uint64_t seed, nf_network** out);
NF_API nf_status nf_network_ws(int n, int k, double beta, uint64_t seed, nf_network** out);
NF_API nf_status nf_network_load(const char* path, nf_network** out);
/* `comment` (may be NULL) is written as a leading '#' line. */
NF_API nf_status nf_network_save(const nf_network* net, const char* path, const char* comment);
NF_API int nf_network_node_count(const nf_network* net);
NF_API size_t nf_network_edge_count(const nf_network* net);
NF_API nf_status nf_network_fingerprint(const nf_network* net, char out[17]);
NF_API void nf_network_free(nf_network* net);

/* ---- time series ------------------------------------------------------- */

NF_API nf_status nf_series_create(size_t dimension, size_t length, const double* times, const double* states,
                                  nf_series** out);
NF_API nf_status nf_series_load(const char* path, nf_series** out);
NF_API nf_status nf_series_save(const nf_series* series, const char* path, const char* comment);
NF_API size_t nf_series_length(const nf_series* series);
NF_API size_t nf_series_dimension(const nf_series* series);
/* Copies length times / dimension * length states into caller storage. */
NF_API nf_status nf_series_times(const nf_series* series, double* out);
NF_API nf_status nf_series_states(const nf_series* series, double* out);
NF_API void nf_series_free(nf_series* series);

/* ---- ground-truth dynamics and simulation ------------------------------ */

typedef enum nf_dynamics_kind { NF_HEAT = 0, NF_BIOCHEMICAL = 1, NF_BIRTHDEATH = 2 } nf_dynamics_kind;

typedef struct nf_dynamics {
  nf_dynamics_kind kind;
  double alpha;
  double bio_source;
  double bio_decay;
  double bio_coupling;
  double bd_decay;
  double bd_coupling;
} nf_dynamics;

NF_API void nf_dynamics_defaults(nf_dynamics_kind kind, nf_dynamics* out);
/* "heat", "biochemical" or "birthdeath". */
NF_API nf_status nf_dynamics_parse(const char* name, nf_dynamics* out);

typedef struct nf_solver_options {
  double rtol;
  double atol;
  double h_init;
  double h_min;
  double h_max;
  int64_t max_steps;
} nf_solver_options;

NF_API void nf_solver_defaults(nf_solver_options* out);

/* RKF45 trajectory of the ground-truth field from (0, x0) at `times`.
 * `solver` may be NULL for the reference tolerances. */
NF_API nf_status nf_simulate(const nf_network* net, const nf_dynamics* dynamics, const double* x0,
                             const double* times, size_t count, const nf_solver_options* solver,
                             nf_series** out);
/* `count` distinct sorted draws from U(0, t_max]. */
NF_API nf_status nf_sample_times(int count, double t_max, uint64_t seed, double* out);
/* Node-wise U[lo, hi). */
NF_API nf_status nf_initial_state(int n, double lo, double hi, uint64_t seed, double* out);

/* ---- models ------------------------------------------------------------ */

typedef enum nf_model_kind { NF_MODEL_DNND = 0, NF_MODEL_NDCN = 1 } nf_model_kind;
typedef enum nf_activation { NF_TANH = 0, NF_RELU = 1 } nf_activation;

/* Hidden widths are arrays of `*_len` entries. */
NF_API nf_status nf_model_create_dnnd(const nf_network* net, const int* self_hidden, size_t self_len,
                                      const int* coupling_hidden, size_t coupling_len, nf_activation activation,
                                      uint64_t seed, nf_model** out);
NF_API nf_status nf_model_create_ndcn(const nf_network* net, int embed_dim, const int* encoder_hidden,
                                      size_t encoder_len, const int* latent_hidden, size_t latent_len,
                                      const int* decoder_hidden, size_t decoder_len, nf_activation activation,
                                      uint64_t seed, nf_model** out);
/* Default architecture of each kind. */
NF_API nf_status nf_model_create_default(const nf_network* net, nf_model_kind kind, uint64_t seed, nf_model** out);
NF_API nf_model_kind nf_model_get_kind(const nf_model* model);
NF_API size_t nf_model_parameter_count(const nf_model* model);
NF_API void nf_model_free(nf_model* model);

#define NF_MAX_WARMUP_STAGES 16

typedef struct nf_train_options {
  int epochs;
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  int substeps_per_obs;
  int loss_mse;       /* 0: mean absolute error, 1: mean squared error */
  double reg_weight;
  int reg_l1;         /* 0: L2 penalty, 1: L1 penalty */
  int warmup;         /* 0 disables the temperature schedule */
  double warmup_taus[NF_MAX_WARMUP_STAGES]; /* INFINITY allowed */
  size_t warmup_stages;
  int epochs_per_stage;
} nf_train_options;

NF_API void nf_train_defaults(nf_model_kind kind, nf_train_options* out);

/* Trains on `observations` (rollout from the first sample). When
 * `loss_log_path` is non-NULL the per-epoch losses are written there with
 * `comment` as a leading '#' line. `final_loss` (may be NULL) receives the
 * last epoch's unweighted loss. */
NF_API nf_status nf_model_train(nf_model* model, const nf_series* observations, const nf_train_options* options,
                                const char* loss_log_path, const char* comment, double* final_loss);

/* `config_hash` (may be NULL) is stored for provenance. */
NF_API nf_status nf_model_save(const nf_model* model, const char* path, const char* config_hash);
/* Fails with NF_ERR_CONFIG when the checkpoint was trained on another network. */
NF_API nf_status nf_model_load(const char* path, const nf_network* net, nf_model** out);

NF_API nf_status nf_model_predict(const nf_model* model, const double* x0, const double* times, size_t count,
                                  const nf_solver_options* solver, nf_series** out);

/* ---- evaluation -------------------------------------------------------- */

typedef struct nf_lyapunov_options {
  double delta0;
  double renorm_interval;
  double horizon;
  double transient;
  uint64_t seed;
} nf_lyapunov_options;

NF_API void nf_lyapunov_defaults(nf_lyapunov_options* out);

/* Largest exponent of the model (NDCN: its latent system from encode(x0)). */
NF_API nf_status nf_lyapunov_model(const nf_model* model, const double* x0, const nf_lyapunov_options* options,
                                   const nf_solver_options* solver, double* exponent, int* diverged);
NF_API nf_status nf_lyapunov_truth(const nf_network* net, const nf_dynamics* dynamics, const double* x0,
                                   const nf_lyapunov_options* options, const nf_solver_options* solver,
                                   double* exponent, int* diverged);

/* Max relative deviation between the straight prediction and the restart at
 * t1, over `count` evenly spaced times in (t1, t1 + t2]. */
NF_API nf_status nf_flowcheck_model(const nf_model* model, const double* x0, double t1, double t2, int count,
                                    const nf_solver_options* solver, double* deviation);
NF_API nf_status nf_flowcheck_truth(const nf_network* net, const nf_dynamics* dynamics, const double* x0,
                                    double t1, double t2, int count, const nf_solver_options* solver,
                                    double* deviation);

typedef struct nf_eval_options {
  const char* windows; /* NULL or "default", else "label:t_lo:t_hi:samples,..." */
  int repeats;
  uint64_t seed;
  int lyapunov;
  nf_lyapunov_options lyapunov_options;
  int flow_check;
  double flow_t1;
  double flow_t2;
  nf_solver_options solver;
} nf_eval_options;

NF_API void nf_eval_defaults(nf_eval_options* out);

/* Windowed MAPE and the enabled checks. Writes a JSON report and/or the MAPE
 * table when the paths are non-NULL. Up to `capacity` per-window mean MAPE
 * values go to `mean_out` (may be NULL); `window_count` (may be NULL)
 * receives the number of windows. */
NF_API nf_status nf_eval(const nf_model* model, const nf_dynamics* truth, const double* x0,
                         const nf_eval_options* options, const char* report_path, const char* mape_path,
                         const char* comment, double* mean_out, size_t capacity, size_t* window_count);

/* DNND models only: F on `resolution` points, G on resolution^2 points. */
NF_API nf_status nf_export_field(const nf_model* model, double lo, double hi, int resolution,
                                 const char* self_path, const char* coupling_path, const char* comment);

/* ---- experiment configs ------------------------------------------------- */

NF_API nf_status nf_config_load(const char* path, nf_config** out);
NF_API nf_status nf_config_parse(const char* text, nf_config** out);
NF_API nf_status nf_config_hash(const nf_config* cfg, char out[17]);
/* Canonical serialisation; returns the length needed excluding the
 * terminator and copies at most `size` bytes including it. */
NF_API size_t nf_config_serialize(const nf_config* cfg, char* buffer, size_t size);
NF_API nf_status nf_config_model_kind(const nf_config* cfg, nf_model_kind* out);
/* The config's training section as train options. */
NF_API nf_status nf_config_train_options(const nf_config* cfg, nf_train_options* out);
/* Untrained model with the config's architecture and seed. */
NF_API nf_status nf_model_create_from_config(const nf_network* net, const nf_config* cfg, nf_model** out);
NF_API void nf_config_free(nf_config* cfg);

/* Full experiment into `out_dir`. */
NF_API nf_status nf_pipeline_run(const nf_config* cfg, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* NETFLOW_H */
