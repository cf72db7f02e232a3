#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmcfuse/gmc_solver.hpp"
#include "gmcfuse/image.hpp"
#include "gmcfuse/image_io.hpp"
#include "gmcfuse/metrics.hpp"
#include "gmcfuse/operators.hpp"
#include "gmcfuse/sensor_gain.hpp"

namespace gmcfuse {

enum class Method { Gmc, L1, WaveletWa };

Method parse_method(const std::string& name);
std::string method_name(Method m);

inline constexpr double kCleanLambda = 0.005;
inline constexpr double kNoisyLambda = 0.5;

struct FusionOptions {
  Method method = Method::Gmc;
  SolverConfig solver;
  GainOptions gains;
  std::optional<Psf> psf1;
  std::optional<Psf> psf2;
};

struct FusionOutcome {
  Image fused;  ///< original input size, clamped to [0,1]
  int levels = 0;
  std::optional<GainMap> gains;
  std::optional<FusionResult> solver;  ///< absent for wavelet-wa
  double seconds = 0.0;                ///< fusion time, gain estimation excluded
};

/// In-memory fusion of two registered grayscale (or luma) images. For the
/// iterative methods the inputs and gain maps are symmetric-padded to a
/// multiple of 2^levels and the result is cropped back.
FusionOutcome fuse_images(const Image& y1, const Image& y2, const FusionOptions& options);

/// Averages the wavelet coefficients of both inputs and synthesizes.
Image baseline_wavelet_wa(const Image& y1, const Image& y2, int levels);

struct SynthOptions {
  double noise_sigma = 0.0;
  unsigned long long seed = 0;
  int seam = 8;
};

struct SynthPair {
  Image y1;  ///< blurred left half, sharp right
  Image y2;  ///< sharp left, blurred right half
  Psf psf1;
  Psf psf2;
};

SynthPair synth_pair(const Image& ground_truth, double sigma_left, double sigma_right,
                     const SynthOptions& options = {});

/// Deterministic piecewise-smooth test scene in [0.05, 0.95].
Image synthetic_scene(int width, int height, unsigned long long seed);

struct FusionJob {
  std::string in1;
  std::string in2;
  std::optional<std::string> psf1;
  std::optional<std::string> psf2;
  Method method = Method::Gmc;
  SolverConfig solver;
  GainOptions gains;
  std::string out;
  std::optional<std::string> metrics_csv;
  bool crop = false;
  std::string dataset;  ///< defaults to the stem of in1
};

/// Applies one `key = value` setting (the CLI flag names without dashes).
/// Throws ArgumentError for unknown keys or malformed values.
void apply_job_setting(FusionJob& job, const std::string& key, const std::string& value);

/// Reads a line-oriented `key = value` job file on top of `base`.
FusionJob load_job_file(const std::string& path, FusionJob base = {});

struct ReportRow {
  std::string dataset;
  std::string method;
  std::optional<MetricsReport> metrics;
  double seconds = 0.0;
};

struct PipelineOutput {
  FusionOutcome outcome;
  ReportRow row;
};

/// Loads, fuses (luma only for color input), writes the output file and the
/// optional metrics CSV.
PipelineOutput fuse_pipeline(const FusionJob& job);

/// Data rows followed by one ("Average", method) row per method, each the
/// arithmetic mean of that method's rows. Metrics missing from every row of a
/// method stay missing.
std::vector<ReportRow> summarize(std::span<const ReportRow> rows);

/// CSV with columns dataset,method,pe,q0,q,seconds for the rows and their
/// summarize() averages; absent metrics render as NA.
std::string report_csv(std::span<const ReportRow> rows);
std::string report_table(std::span<const ReportRow> rows);
void write_report(const std::string& csv_path, std::span<const ReportRow> rows);

}  // namespace gmcfuse
