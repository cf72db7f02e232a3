/*
 * gmcfuse C API.
 *
 * All objects are opaque handles created and destroyed through this header.
 * Every fallible call returns a gmcf_status; on failure gmcf_last_error()
 * describes the problem for the calling thread. Handles are not shareable
 * across threads while a call on them is in progress.
 */
#ifndef GMCFUSE_H
#define GMCFUSE_H

#include <stddef.h>

#if defined(_WIN32)
#  ifdef GMCFUSE_BUILDING
#    define GMCF_API __declspec(dllexport)
#  else
#    define GMCF_API __declspec(dllimport)
#  endif
#else
#  define GMCF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gmcf_status {
  GMCF_OK = 0,
  GMCF_ERR_ARGUMENT = 1,
  GMCF_ERR_DIMENSION = 2,
  GMCF_ERR_STRUCTURE = 3,
  GMCF_ERR_CONFIG = 4,
  GMCF_ERR_DIVERGENCE = 5,
  GMCF_ERR_DIAGNOSTIC = 6,
  GMCF_ERR_IO = 7,
  GMCF_ERR_NULL = 8,
  GMCF_ERR_INTERNAL = 9
} gmcf_status;

typedef struct gmcf_image gmcf_image;
typedef struct gmcf_job gmcf_job;
typedef struct gmcf_result gmcf_result;

typedef struct gmcf_metrics {
  double pe;
  double q0;
  double q;
  int window;
} gmcf_metrics;

GMCF_API const char* gmcf_version(void);
/* Message of the last failed call on this thread; empty string if none. */
GMCF_API const char* gmcf_last_error(void);
GMCF_API const char* gmcf_status_string(gmcf_status status);

/* ---- images: row-major doubles, nominal range [0,1] ---- */

/* data may be NULL for an all-zero image. */
GMCF_API gmcf_status gmcf_image_create(int width, int height, const double* data, gmcf_image** out);
/* Loads PNG/PGM/PPM; color files are reduced to their BT.601 luma. */
GMCF_API gmcf_status gmcf_image_load(const char* path, gmcf_image** out);
/* bit_depth 8 or 16; format from the extension (.png, .pgm). */
GMCF_API gmcf_status gmcf_image_save(const gmcf_image* image, const char* path, int bit_depth);
GMCF_API void gmcf_image_destroy(gmcf_image* image);
GMCF_API int gmcf_image_width(const gmcf_image* image);
GMCF_API int gmcf_image_height(const gmcf_image* image);
GMCF_API const double* gmcf_image_data(const gmcf_image* image);

GMCF_API gmcf_status gmcf_scene_create(int width, int height, unsigned long long seed, gmcf_image** out);
/* Complementary-blur pair: y1 blurred on the left half, y2 on the right. */
GMCF_API gmcf_status gmcf_synth_pair(const gmcf_image* ground_truth, double sigma_left,
                                     double sigma_right, double noise_sigma,
                                     unsigned long long seed, gmcf_image** y1, gmcf_image** y2);
/* Writes the truncated Gaussian PSF used by gmcf_synth_pair in the text PSF format. */
GMCF_API gmcf_status gmcf_psf_write_gaussian(double sigma, const char* path);
GMCF_API gmcf_status gmcf_psnr(const gmcf_image* reference, const gmcf_image* test, double* out);
/* window <= 0 selects the default of 8. */
GMCF_API gmcf_status gmcf_metrics_compute(const gmcf_image* a, const gmcf_image* b,
                                          const gmcf_image* fused, int window, gmcf_metrics* out);

/* ---- jobs: key/value settings mirroring the CLI flags ---- */

GMCF_API gmcf_status gmcf_job_create(gmcf_job** out);
GMCF_API void gmcf_job_destroy(gmcf_job* job);
GMCF_API gmcf_status gmcf_job_set(gmcf_job* job, const char* key, const char* value);
GMCF_API gmcf_status gmcf_job_load_file(gmcf_job* job, const char* path);

/* Runs the file pipeline described by the job (inputs, output, metrics CSV). */
GMCF_API gmcf_status gmcf_job_run(const gmcf_job* job, gmcf_result** out);
/* Fuses two in-memory grayscale images with the job's method, solver, gain
 * and PSF settings. File paths for inputs/outputs are ignored. */
GMCF_API gmcf_status gmcf_fuse_images(const gmcf_job* job, const gmcf_image* y1,
                                      const gmcf_image* y2, gmcf_result** out);

GMCF_API void gmcf_result_destroy(gmcf_result* result);
/* Borrowed; valid until the result is destroyed. */
GMCF_API const gmcf_image* gmcf_result_fused(const gmcf_result* result);
GMCF_API int gmcf_result_iterations(const gmcf_result* result);
GMCF_API double gmcf_result_final_residual(const gmcf_result* result);
GMCF_API double gmcf_result_seconds(const gmcf_result* result);
/* Returns the trace length and points *values at it (borrowed). */
GMCF_API size_t gmcf_result_cost_trace(const gmcf_result* result, const double** values);
/* 1 and fills *out when metrics are attached, else 0. */
GMCF_API int gmcf_result_metrics(const gmcf_result* result, gmcf_metrics* out);
/* Computes Pe/Q0/Q of the fused image against the two sources and attaches them. */
GMCF_API gmcf_status gmcf_result_attach_metrics(gmcf_result* result, const gmcf_image* y1,
                                                const gmcf_image* y2);
GMCF_API gmcf_status gmcf_result_set_dataset(gmcf_result* result, const char* dataset);

/* ---- reports ---- */

GMCF_API gmcf_status gmcf_report_write(const gmcf_result* const* results, size_t count,
                                       const char* csv_path);
/* Human-readable table. Writes at most capacity bytes (NUL-terminated) and
 * stores the full length, excluding the terminator, in *needed. */
GMCF_API gmcf_status gmcf_report_table(const gmcf_result* const* results, size_t count, char* buffer,
                                       size_t capacity, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* GMCFUSE_H */
