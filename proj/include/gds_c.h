/* C interface to the graph dynamical sampling library.
 *
 * All functions return a gds_status; on failure a thread-local message is
 * available through gds_last_error(). Objects are opaque handles released
 * with their matching _free function. Strings returned through char** are
 * owned by the caller and released with gds_string_free().
 */

#ifndef GDS_C_H
#define GDS_C_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GDS_API __declspec(dllexport)
#else
#define GDS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gds_status {
  GDS_OK = 0,
  GDS_ERR_INVALID_ARGUMENT = 1,
  GDS_ERR_IO = 2,
  GDS_ERR_PARSE = 3,
  GDS_ERR_NUMERIC = 4,
  GDS_ERR_RANK_DEFICIENT = 5,
  GDS_ERR_NO_CONVERGENCE = 6,
  GDS_ERR_INTERNAL = 7
} gds_status;

typedef enum gds_laplacian_kind {
  GDS_LAPLACIAN_NORMALIZED = 0,
  GDS_LAPLACIAN_COMBINATORIAL = 1
} gds_laplacian_kind;

typedef struct gds_graph gds_graph;
typedef struct gds_spectral gds_spectral;
typedef struct gds_config gds_config;

GDS_API const char* gds_version(void);
GDS_API const char* gds_status_name(gds_status status);

/* Message for the most recent failure on this thread. */
GDS_API const char* gds_last_error(void);

GDS_API void gds_string_free(char* s);

/* ---- graphs ---------------------------------------------------------- */

GDS_API gds_status gds_graph_load_edge_list(const char* path, gds_graph** out);
GDS_API gds_status gds_graph_from_knn_file(const char* coords_csv, int k, gds_graph** out);
/* coords_xy is row-major n x 2. */
GDS_API gds_status gds_graph_from_knn(const double* coords_xy, int n, int k, gds_graph** out);
GDS_API gds_status gds_graph_grid(int rows, int cols, gds_graph** out);
GDS_API gds_status gds_graph_random_geometric(int n, double radius, uint64_t seed,
                                              gds_graph** out);
GDS_API gds_status gds_graph_save_edge_list(const gds_graph* g, const char* path);
GDS_API int gds_graph_nodes(const gds_graph* g);
GDS_API int64_t gds_graph_edges(const gds_graph* g);
/* out must hold n doubles. */
GDS_API gds_status gds_graph_degrees(const gds_graph* g, double* out);
GDS_API uint64_t gds_graph_hash(const gds_graph* g);
GDS_API void gds_graph_free(gds_graph* g);

/* ---- spectra ---------------------------------------------------------- */

GDS_API gds_status gds_spectral_compute(const gds_graph* g, gds_laplacian_kind kind,
                                        gds_spectral** out);
GDS_API int gds_spectral_size(const gds_spectral* sp);
/* out must hold n doubles (ascending eigenvalues). */
GDS_API gds_status gds_spectral_eigenvalues(const gds_spectral* sp, double* out);
/* signals is column-major n x num_signals. */
GDS_API gds_status gds_spectral_bandwidth_for_energy(const gds_spectral* sp,
                                                     const double* signals, int num_signals,
                                                     double fraction, int* out_k);
GDS_API void gds_spectral_free(gds_spectral* sp);

/* ---- scalar helpers --------------------------------------------------- */

/* ceil(3 nu / (c delta^2) ln(4k/eps)). */
GDS_API gds_status gds_sample_complexity(double nu, double c, int k, double delta, double eps,
                                         int64_t* out_m);
/* Frame bounds of the stacked embedding for eigenvalues lambda[0..n). */
GDS_API gds_status gds_stability_bounds(const double* lambda, int n, int k, int s, double* out_c,
                                        double* out_C);

/* ---- configuration ----------------------------------------------------- */

GDS_API gds_status gds_config_create(gds_config** out);
GDS_API gds_status gds_config_load(const char* path, gds_config** out);
GDS_API gds_status gds_config_set(gds_config* cfg, const char* key, const char* value);
/* Returns NULL when the key is absent; the pointer is valid until the next
 * mutation of cfg on this thread. */
GDS_API const char* gds_config_get(const gds_config* cfg, const char* key);
GDS_API void gds_config_free(gds_config* cfg);

/* ---- config-driven commands ------------------------------------------- */
/* out_path/out_dir may be NULL or empty where the command allows it. When
 * out_json is non-NULL it receives a malloc'd JSON summary. */

GDS_API gds_status gds_cmd_graph_build(const gds_config* cfg, const char* out_path,
                                       char** out_json);
GDS_API gds_status gds_cmd_simulate(const gds_config* cfg, const char* out_path, char** out_json);
GDS_API gds_status gds_cmd_coherence(const gds_config* cfg, const char* out_path,
                                     char** out_json);
GDS_API gds_status gds_cmd_complexity(const gds_config* cfg, const char* out_path,
                                      char** out_json);
GDS_API gds_status gds_cmd_recover(const gds_config* cfg, const char* out_path, char** out_json);
GDS_API gds_status gds_cmd_rip_check(const gds_config* cfg, const char* out_path,
                                     char** out_json);
GDS_API gds_status gds_cmd_experiment_synthetic(const gds_config* cfg, const char* out_dir,
                                                char** out_json);
GDS_API gds_status gds_cmd_experiment_real(const gds_config* cfg, const char* out_dir,
                                           char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* GDS_C_H */
