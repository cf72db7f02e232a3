#include "gmcfuse/gmcfuse.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "gmcfuse/errors.hpp"
#include "gmcfuse/image_io.hpp"
#include "gmcfuse/metrics.hpp"
#include "gmcfuse/operators.hpp"
#include "gmcfuse/pipeline.hpp"

struct gmcf_image {
  gmcfuse::Image image;
};

struct gmcf_job {
  gmcfuse::FusionJob job;
};

struct gmcf_result {
  gmcfuse::FusionOutcome outcome;
  gmcfuse::ReportRow row;
  gmcf_image fused;
};

namespace {

thread_local std::string last_error;

gmcf_status to_status(gmcfuse::ErrorCode code) {
  switch (code) {
    case gmcfuse::ErrorCode::Argument: return GMCF_ERR_ARGUMENT;
    case gmcfuse::ErrorCode::Dimension: return GMCF_ERR_DIMENSION;
    case gmcfuse::ErrorCode::Structure: return GMCF_ERR_STRUCTURE;
    case gmcfuse::ErrorCode::Config: return GMCF_ERR_CONFIG;
    case gmcfuse::ErrorCode::Divergence: return GMCF_ERR_DIVERGENCE;
    case gmcfuse::ErrorCode::Diagnostic: return GMCF_ERR_DIAGNOSTIC;
    case gmcfuse::ErrorCode::Io: return GMCF_ERR_IO;
  }
  return GMCF_ERR_INTERNAL;
}

template <class F>
gmcf_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return GMCF_OK;
  } catch (const gmcfuse::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GMCF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GMCF_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return GMCF_ERR_INTERNAL;
  }
}

gmcf_status null_arg(const char* what) {
  last_error = std::string(what) + " must not be NULL";
  return GMCF_ERR_NULL;
}

gmcf_result* make_result(gmcfuse::FusionOutcome outcome, gmcfuse::ReportRow row) {
  auto* r = new gmcf_result{std::move(outcome), std::move(row), {}};
  r->fused.image = r->outcome.fused;
  return r;
}

std::vector<gmcfuse::ReportRow> collect_rows(const gmcf_result* const* results, size_t count) {
  std::vector<gmcfuse::ReportRow> rows;
  rows.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    if (!results[i]) throw gmcfuse::ArgumentError("report: result handle is NULL");
    rows.push_back(results[i]->row);
  }
  if (rows.empty()) throw gmcfuse::ArgumentError("report needs at least one result");
  return rows;
}

}  // namespace

extern "C" {

const char* gmcf_version(void) { return "1.0.0"; }

const char* gmcf_last_error(void) { return last_error.c_str(); }

const char* gmcf_status_string(gmcf_status status) {
  switch (status) {
    case GMCF_OK: return "ok";
    case GMCF_ERR_ARGUMENT: return "argument error";
    case GMCF_ERR_DIMENSION: return "dimension error";
    case GMCF_ERR_STRUCTURE: return "structure error";
    case GMCF_ERR_CONFIG: return "configuration error";
    case GMCF_ERR_DIVERGENCE: return "divergence error";
    case GMCF_ERR_DIAGNOSTIC: return "diagnostic error";
    case GMCF_ERR_IO: return "i/o error";
    case GMCF_ERR_NULL: return "null handle";
    case GMCF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

gmcf_status gmcf_image_create(int width, int height, const double* data, gmcf_image** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    gmcfuse::Image img = data ? gmcfuse::Image(width, height,
                                               std::vector<double>(data, data + static_cast<size_t>(width) * height))
                              : gmcfuse::Image(width, height);
    *out = new gmcf_image{std::move(img)};
  });
}

gmcf_status gmcf_image_load(const char* path, gmcf_image** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new gmcf_image{gmcfuse::luma(gmcfuse::load_image(path))}; });
}

gmcf_status gmcf_image_save(const gmcf_image* image, const char* path, int bit_depth) {
  if (!image) return null_arg("image");
  if (!path) return null_arg("path");
  return guarded([&] {
    if (bit_depth != 8 && bit_depth != 16) throw gmcfuse::ArgumentError("bit depth must be 8 or 16");
    gmcfuse::save_image(path, image->image, bit_depth);
  });
}

void gmcf_image_destroy(gmcf_image* image) { delete image; }

int gmcf_image_width(const gmcf_image* image) { return image ? image->image.width() : 0; }

int gmcf_image_height(const gmcf_image* image) { return image ? image->image.height() : 0; }

const double* gmcf_image_data(const gmcf_image* image) {
  return image ? image->image.pixels().data() : nullptr;
}

gmcf_status gmcf_scene_create(int width, int height, unsigned long long seed, gmcf_image** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new gmcf_image{gmcfuse::synthetic_scene(width, height, seed)}; });
}

gmcf_status gmcf_synth_pair(const gmcf_image* ground_truth, double sigma_left, double sigma_right,
                            double noise_sigma, unsigned long long seed, gmcf_image** y1,
                            gmcf_image** y2) {
  if (!ground_truth) return null_arg("ground_truth");
  if (!y1 || !y2) return null_arg("output handle");
  return guarded([&] {
    gmcfuse::SynthOptions opts;
    opts.noise_sigma = noise_sigma;
    opts.seed = seed;
    gmcfuse::SynthPair pair = gmcfuse::synth_pair(ground_truth->image, sigma_left, sigma_right, opts);
    auto a = std::make_unique<gmcf_image>(gmcf_image{std::move(pair.y1)});
    auto b = std::make_unique<gmcf_image>(gmcf_image{std::move(pair.y2)});
    *y1 = a.release();
    *y2 = b.release();
  });
}

gmcf_status gmcf_psf_write_gaussian(double sigma, const char* path) {
  if (!path) return null_arg("path");
  return guarded([&] { gmcfuse::save_psf(path, gmcfuse::Psf::gaussian(sigma)); });
}

gmcf_status gmcf_psnr(const gmcf_image* reference, const gmcf_image* test, double* out) {
  if (!reference || !test) return null_arg("image");
  if (!out) return null_arg("out");
  return guarded([&] { *out = gmcfuse::psnr(reference->image, test->image); });
}

gmcf_status gmcf_metrics_compute(const gmcf_image* a, const gmcf_image* b, const gmcf_image* fused,
                                 int window, gmcf_metrics* out) {
  if (!a || !b || !fused) return null_arg("image");
  if (!out) return null_arg("out");
  return guarded([&] {
    const int w = window > 0 ? window : gmcfuse::metric_constants::default_window;
    const gmcfuse::MetricsReport m = gmcfuse::evaluate_metrics(a->image, b->image, fused->image, w);
    *out = gmcf_metrics{m.pe, m.q0, m.q, m.window};
  });
}

gmcf_status gmcf_job_create(gmcf_job** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new gmcf_job{}; });
}

void gmcf_job_destroy(gmcf_job* job) { delete job; }

gmcf_status gmcf_job_set(gmcf_job* job, const char* key, const char* value) {
  if (!job) return null_arg("job");
  if (!key || !value) return null_arg("key/value");
  return guarded([&] { gmcfuse::apply_job_setting(job->job, key, value); });
}

gmcf_status gmcf_job_load_file(gmcf_job* job, const char* path) {
  if (!job) return null_arg("job");
  if (!path) return null_arg("path");
  return guarded([&] { job->job = gmcfuse::load_job_file(path, job->job); });
}

gmcf_status gmcf_job_run(const gmcf_job* job, gmcf_result** out) {
  if (!job) return null_arg("job");
  if (!out) return null_arg("out");
  return guarded([&] {
    gmcfuse::PipelineOutput po = gmcfuse::fuse_pipeline(job->job);
    *out = make_result(std::move(po.outcome), std::move(po.row));
  });
}

gmcf_status gmcf_fuse_images(const gmcf_job* job, const gmcf_image* y1, const gmcf_image* y2,
                             gmcf_result** out) {
  if (!job) return null_arg("job");
  if (!y1 || !y2) return null_arg("image");
  if (!out) return null_arg("out");
  return guarded([&] {
    gmcfuse::FusionOptions options;
    options.method = job->job.method;
    options.solver = job->job.solver;
    options.gains = job->job.gains;
    if (job->job.psf1) options.psf1 = gmcfuse::load_psf(*job->job.psf1);
    if (job->job.psf2) options.psf2 = gmcfuse::load_psf(*job->job.psf2);
    gmcfuse::FusionOutcome outcome = gmcfuse::fuse_images(y1->image, y2->image, options);
    gmcfuse::ReportRow row;
    row.dataset = job->job.dataset.empty() ? "memory" : job->job.dataset;
    row.method = gmcfuse::method_name(job->job.method);
    row.seconds = outcome.seconds;
    *out = make_result(std::move(outcome), std::move(row));
  });
}

void gmcf_result_destroy(gmcf_result* result) { delete result; }

const gmcf_image* gmcf_result_fused(const gmcf_result* result) {
  return result ? &result->fused : nullptr;
}

int gmcf_result_iterations(const gmcf_result* result) {
  return result && result->outcome.solver ? result->outcome.solver->iters_used : 0;
}

double gmcf_result_final_residual(const gmcf_result* result) {
  return result && result->outcome.solver ? result->outcome.solver->final_residual : 0.0;
}

double gmcf_result_seconds(const gmcf_result* result) { return result ? result->row.seconds : 0.0; }

size_t gmcf_result_cost_trace(const gmcf_result* result, const double** values) {
  if (!result || !result->outcome.solver) {
    if (values) *values = nullptr;
    return 0;
  }
  const auto& trace = result->outcome.solver->cost_trace;
  if (values) *values = trace.data();
  return trace.size();
}

int gmcf_result_metrics(const gmcf_result* result, gmcf_metrics* out) {
  if (!result || !result->row.metrics) return 0;
  if (out) {
    const auto& m = *result->row.metrics;
    *out = gmcf_metrics{m.pe, m.q0, m.q, m.window};
  }
  return 1;
}

gmcf_status gmcf_result_attach_metrics(gmcf_result* result, const gmcf_image* y1, const gmcf_image* y2) {
  if (!result) return null_arg("result");
  if (!y1 || !y2) return null_arg("image");
  return guarded([&] {
    result->row.metrics = gmcfuse::evaluate_metrics(y1->image, y2->image, result->fused.image);
  });
}

gmcf_status gmcf_result_set_dataset(gmcf_result* result, const char* dataset) {
  if (!result) return null_arg("result");
  if (!dataset) return null_arg("dataset");
  return guarded([&] { result->row.dataset = dataset; });
}

gmcf_status gmcf_report_write(const gmcf_result* const* results, size_t count, const char* csv_path) {
  if (!results) return null_arg("results");
  if (!csv_path) return null_arg("csv_path");
  return guarded([&] {
    const auto rows = collect_rows(results, count);
    gmcfuse::write_report(csv_path, rows);
  });
}

gmcf_status gmcf_report_table(const gmcf_result* const* results, size_t count, char* buffer,
                              size_t capacity, size_t* needed) {
  if (!results) return null_arg("results");
  return guarded([&] {
    const std::string text = gmcfuse::report_table(collect_rows(results, count));
    if (needed) *needed = text.size();
    if (buffer && capacity > 0) {
      const size_t n = std::min(capacity - 1, text.size());
      std::memcpy(buffer, text.data(), n);
      buffer[n] = '\0';
    }
  });
}

}  // extern "C"
