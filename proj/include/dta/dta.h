/* C interface to the DTA spiking-neuron learning library.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return DTA_OK on success; on failure they return an error code
 * and dta_last_error() carries a thread-local message. Times are in
 * milliseconds, rates in spikes/ms.
 */
#ifndef DTA_DTA_H
#define DTA_DTA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DTA_API __declspec(dllexport)
#else
#define DTA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dta_status {
    DTA_OK = 0,
    DTA_ERR_INVALID_ARGUMENT = 1,
    DTA_ERR_PARSE = 2,
    DTA_ERR_IO = 3,
    DTA_ERR_DIVERGED = 4,
    DTA_ERR_THETA_SEARCH = 5,
    DTA_ERR_UNBOUNDED = 6,
    DTA_ERR_INTERNAL = 7
} dta_status;

typedef enum dta_kernel {
    DTA_KERNEL_STDP = 0,
    DTA_KERNEL_PSP = 1,
    DTA_KERNEL_FILT = 2
} dta_kernel;

typedef enum dta_task { DTA_TASK_ENCODING = 0, DTA_TASK_DECODING = 1 } dta_task;

typedef struct dta_neuron dta_neuron;
typedef struct dta_pattern dta_pattern;
typedef struct dta_train_config dta_train_config;
typedef struct dta_train_result dta_train_result;
typedef struct dta_experiment dta_experiment;

DTA_API const char* dta_version(void);

/* message for the most recent failure on this thread */
DTA_API const char* dta_last_error(void);

/* ---- neuron ---- */

DTA_API dta_status dta_neuron_create(int n_channels, double threshold, double tau_m, double tau_s,
                                     dta_neuron** out);
DTA_API dta_status dta_neuron_set_grid(dta_neuron* n, double dt, double refine_tol);
DTA_API int dta_neuron_n_channels(const dta_neuron* n);
DTA_API dta_status dta_neuron_set_weights(dta_neuron* n, const double* w, size_t len);
DTA_API dta_status dta_neuron_get_weights(const dta_neuron* n, double* out, size_t len);
DTA_API void dta_neuron_free(dta_neuron* n);

/* ---- input patterns ---- */

DTA_API dta_status dta_pattern_create(int n_channels, double duration, dta_pattern** out);
DTA_API dta_status dta_pattern_set_channel(dta_pattern* p, int channel, const double* times,
                                           size_t len);
DTA_API dta_status dta_pattern_poisson(int n_channels, double duration, double rate, uint64_t seed,
                                       dta_pattern** out);
DTA_API void dta_pattern_free(dta_pattern* p);

/* One Poisson spike train; release the buffer with dta_buffer_free. */
DTA_API dta_status dta_poisson_train(double duration, double rate, uint64_t seed,
                                     double** times_out, size_t* count_out);

/* ---- simulation ---- */

/* threshold_override may be NULL to use the neuron's threshold. The spike
 * buffer is allocated by the library; release it with dta_buffer_free. */
DTA_API dta_status dta_simulate(const dta_neuron* n, const dta_pattern* x,
                                const double* threshold_override, double** spikes_out,
                                size_t* count_out);
DTA_API void dta_buffer_free(double* buf);

/* ---- training ---- */

DTA_API dta_status dta_train_config_create(dta_train_config** out);
DTA_API dta_status dta_train_config_set_kernel(dta_train_config* c, dta_kernel kernel);
DTA_API dta_status dta_train_config_set_max_epochs(dta_train_config* c, int max_epochs);
DTA_API dta_status dta_train_config_set_eta_bounds(dta_train_config* c, double lb_d, double ub_d,
                                                   double lb_o, double ub_o);
DTA_API dta_status dta_train_config_set_fallback_eta(dta_train_config* c, double eta);
DTA_API dta_status dta_train_config_set_match_tol(dta_train_config* c, double tol);
DTA_API dta_status dta_train_config_set_ineq_margin(dta_train_config* c, double margin);
DTA_API void dta_train_config_free(dta_train_config* c);

/* Encoding: desired spike trains, one per pattern. Decoding: integer spike
 * counts, one per pattern. Weights are updated on the neuron in place. */
DTA_API dta_status dta_train_encoding(dta_neuron* n, const dta_pattern* const* patterns,
                                      size_t n_patterns, const double* const* desired,
                                      const size_t* desired_len, const dta_train_config* c,
                                      uint64_t seed, dta_train_result** out);
DTA_API dta_status dta_train_decoding(dta_neuron* n, const dta_pattern* const* patterns,
                                      size_t n_patterns, const int* labels,
                                      const dta_train_config* c, uint64_t seed,
                                      dta_train_result** out);

DTA_API int dta_train_result_converged(const dta_train_result* r);
DTA_API int dta_train_result_epochs(const dta_train_result* r);
DTA_API int dta_train_result_fallbacks(const dta_train_result* r);
DTA_API size_t dta_train_result_n_epoch_accuracies(const dta_train_result* r);
DTA_API double dta_train_result_accuracy(const dta_train_result* r, size_t epoch_index);
DTA_API void dta_train_result_free(dta_train_result* r);

/* ---- spike-train metrics ---- */

DTA_API double dta_vrd(const double* a, size_t na, const double* b, size_t nb, double tau_q);
DTA_API double dta_vrd_star(double duration, double delta_t);
DTA_API double dta_theoretical_capacity(double n_channels, double nu_out, double tau_m,
                                        double tau_s);

/* ---- experiments ---- */

/* kind: encode-capacity-short | encode-capacity-long | decode-capacity |
 * calpha | interference | iris | vrd-refit */
DTA_API dta_status dta_experiment_create_default(const char* kind, dta_experiment** out);
DTA_API dta_status dta_experiment_create_from_json(const char* json_text, dta_experiment** out);
DTA_API dta_status dta_experiment_load(const char* path, dta_experiment** out);
DTA_API dta_status dta_experiment_set_seed(dta_experiment* e, uint64_t seed);
DTA_API dta_status dta_experiment_set_trials(dta_experiment* e, int trials);
DTA_API dta_status dta_experiment_set_threads(dta_experiment* e, int threads);
DTA_API dta_status dta_experiment_config_json(const dta_experiment* e, char** json_out);

/* Runs the experiment and writes records.csv, curves.csv and summary.json
 * under out_dir. When summary_json_out is non-NULL it receives the summary
 * text; release it with dta_string_free. */
DTA_API dta_status dta_experiment_run(const dta_experiment* e, const char* out_dir,
                                      char** summary_json_out);
DTA_API void dta_experiment_free(dta_experiment* e);
DTA_API void dta_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* DTA_DTA_H */
