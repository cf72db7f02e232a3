// gmcfuse command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gmcfuse/gmcfuse.h"

namespace {

struct ImageDeleter {
  void operator()(gmcf_image* p) const noexcept { gmcf_image_destroy(p); }
};
struct JobDeleter {
  void operator()(gmcf_job* p) const noexcept { gmcf_job_destroy(p); }
};
struct ResultDeleter {
  void operator()(gmcf_result* p) const noexcept { gmcf_result_destroy(p); }
};
using ImagePtr = std::unique_ptr<gmcf_image, ImageDeleter>;
using JobPtr = std::unique_ptr<gmcf_job, JobDeleter>;
using ResultPtr = std::unique_ptr<gmcf_result, ResultDeleter>;

class CliFailure : public std::runtime_error {
 public:
  CliFailure(gmcf_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
  gmcf_status status;
};

void check(gmcf_status s, const char* what) {
  if (s != GMCF_OK) {
    throw CliFailure(s, std::string(what) + ": " + gmcf_status_string(s) + ": " + gmcf_last_error());
  }
}

ImagePtr load(const std::string& path) {
  gmcf_image* img = nullptr;
  check(gmcf_image_load(path.c_str(), &img), "load");
  return ImagePtr(img);
}

std::string table_of(const std::vector<const gmcf_result*>& results) {
  size_t needed = 0;
  check(gmcf_report_table(results.data(), results.size(), nullptr, 0, &needed), "report");
  std::string text(needed + 1, '\0');
  check(gmcf_report_table(results.data(), results.size(), text.data(), text.size(), &needed), "report");
  text.resize(needed);
  return text;
}

// Flags that map one-to-one onto job settings.
const char* const kJobKeys[] = {"in1",   "in2",   "psf1",  "psf2", "method", "lambda",
                                "gamma", "mu",    "levels", "patch", "iters",  "tol",
                                "out",   "metrics", "dataset", "preset"};

int run_fuse(const std::map<std::string, CLI::Option*>& opts, const std::map<std::string, std::string>& values,
             const std::string& job_file, bool crop, bool smooth, bool quiet) {
  gmcf_job* raw = nullptr;
  check(gmcf_job_create(&raw), "job");
  JobPtr job(raw);
  if (!job_file.empty()) check(gmcf_job_load_file(job.get(), job_file.c_str()), "job file");
  for (const auto& [key, opt] : opts) {
    if (opt->count() > 0) check(gmcf_job_set(job.get(), key.c_str(), values.at(key).c_str()), key.c_str());
  }
  if (crop) check(gmcf_job_set(job.get(), "crop", "true"), "crop");
  if (smooth) check(gmcf_job_set(job.get(), "smooth-gains", "true"), "smooth-gains");

  gmcf_result* res = nullptr;
  check(gmcf_job_run(job.get(), &res), "fuse");
  ResultPtr result(res);
  if (!quiet) {
    std::printf("iterations: %d  final relative change: %.3e  solver seconds: %.3f\n",
                gmcf_result_iterations(result.get()), gmcf_result_final_residual(result.get()),
                gmcf_result_seconds(result.get()));
    if (gmcf_result_metrics(result.get(), nullptr)) {
      std::fputs(table_of({result.get()}).c_str(), stdout);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sensor image fusion with GMC sparse regularization in the Haar wavelet domain"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gmcf_version()));

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Fuse two registered images");
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> opts;
  for (const char* key : kJobKeys) values[key];
  opts["in1"] = fuse->add_option("--in1", values["in1"], "First source image (PNG/PGM/PPM)");
  opts["in2"] = fuse->add_option("--in2", values["in2"], "Second source image");
  opts["psf1"] = fuse->add_option("--psf1", values["psf1"], "PSF file for the first source");
  opts["psf2"] = fuse->add_option("--psf2", values["psf2"], "PSF file for the second source");
  opts["method"] = fuse->add_option("--method", values["method"], "gmc | l1 | wavelet-wa")
                       ->check(CLI::IsMember({"gmc", "l1", "wavelet-wa"}));
  opts["lambda"] = fuse->add_option("--lambda", values["lambda"], "Regularization weight (default 0.005)");
  opts["gamma"] = fuse->add_option("--gamma", values["gamma"], "Convexity parameter in [0,1] (default 0.8)");
  opts["mu"] = fuse->add_option("--mu", values["mu"], "Step size (default: 1.9/rho)");
  opts["levels"] = fuse->add_option("--levels", values["levels"], "Haar decomposition depth (default: auto)");
  opts["patch"] = fuse->add_option("--patch", values["patch"], "Gain-estimation patch size (default 16)");
  opts["iters"] = fuse->add_option("--iters", values["iters"], "Maximum iterations (default 300)");
  opts["tol"] = fuse->add_option("--tol", values["tol"], "Relative-change stopping threshold (default 1e-6)");
  opts["out"] = fuse->add_option("--out", values["out"], "Output image path");
  opts["metrics"] = fuse->add_option("--metrics", values["metrics"], "Write Pe/Q0/Q to this CSV");
  opts["dataset"] = fuse->add_option("--dataset", values["dataset"], "Dataset label for the CSV");
  opts["preset"] = fuse->add_option("--preset", values["preset"], "clean (lambda 0.005) | noisy (lambda 0.5)")
                       ->check(CLI::IsMember({"clean", "noisy"}));
  std::string job_file;
  bool crop = false;
  bool smooth = false;
  bool quiet = false;
  fuse->add_option("--job", job_file, "key = value job file; flags override its values")
      ->check(CLI::ExistingFile);
  fuse->add_flag("--crop", crop, "Center-crop inputs to a common size");
  fuse->add_flag("--smooth-gains", smooth, "Average gains over neighbouring patches");
  fuse->add_flag("-q,--quiet", quiet, "No console summary");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic complementary-blur pair");
  std::string gt_path;
  std::string gt_out;
  std::string out1;
  std::string out2;
  std::string psf_out1;
  std::string psf_out2;
  int size = 256;
  unsigned long long seed = 1;
  double sigma_left = 2.0;
  double sigma_right = 2.0;
  double noise = 0.0;
  synth->add_option("--gt", gt_path, "Ground-truth image (default: generated scene)");
  synth->add_option("--size", size, "Generated scene size");
  synth->add_option("--seed", seed, "Scene and noise seed");
  synth->add_option("--sigma-left", sigma_left, "Blur of the left half of the first image");
  synth->add_option("--sigma-right", sigma_right, "Blur of the right half of the second image");
  synth->add_option("--noise", noise, "Additive Gaussian noise sigma");
  synth->add_option("--out1", out1, "First output image")->required();
  synth->add_option("--out2", out2, "Second output image")->required();
  synth->add_option("--gt-out", gt_out, "Also write the ground truth here");
  synth->add_option("--psf-out1", psf_out1, "Write the first PSF here");
  synth->add_option("--psf-out2", psf_out2, "Write the second PSF here");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Score a fused image against its sources");
  std::string m_in1;
  std::string m_in2;
  std::string m_fused;
  int window = 8;
  metrics->add_option("--in1", m_in1, "First source")->required();
  metrics->add_option("--in2", m_in2, "Second source")->required();
  metrics->add_option("--fused", m_fused, "Fused image")->required();
  metrics->add_option("--window", window, "Q0/Q window size");

  // bench
  auto* bench = app.add_subcommand("bench", "Compare wavelet-wa, l1 and gmc on synthetic pairs");
  int count = 5;
  int bench_size = 256;
  double bench_noise = 0.0;
  double bench_sigma = 2.0;
  std::string bench_lambda = "0.005";
  std::string bench_csv;
  bench->add_option("--count", count, "Number of synthetic pairs");
  bench->add_option("--size", bench_size, "Scene size");
  bench->add_option("--noise", bench_noise, "Additive noise sigma");
  bench->add_option("--sigma", bench_sigma, "Blur sigma of the defocused halves");
  bench->add_option("--lambda", bench_lambda, "Regularization weight");
  bench->add_option("--csv", bench_csv, "Write the report CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fuse->parsed()) return run_fuse(opts, values, job_file, crop, smooth, quiet);

    if (synth->parsed()) {
      ImagePtr gt;
      if (!gt_path.empty()) {
        gt = load(gt_path);
      } else {
        gmcf_image* raw = nullptr;
        check(gmcf_scene_create(size, size, seed, &raw), "scene");
        gt.reset(raw);
      }
      gmcf_image* a = nullptr;
      gmcf_image* b = nullptr;
      check(gmcf_synth_pair(gt.get(), sigma_left, sigma_right, noise, seed, &a, &b), "synth");
      ImagePtr y1(a);
      ImagePtr y2(b);
      check(gmcf_image_save(y1.get(), out1.c_str(), 8), "save");
      check(gmcf_image_save(y2.get(), out2.c_str(), 8), "save");
      if (!gt_out.empty()) check(gmcf_image_save(gt.get(), gt_out.c_str(), 8), "save");
      if (!psf_out1.empty()) check(gmcf_psf_write_gaussian(sigma_left, psf_out1.c_str()), "psf");
      if (!psf_out2.empty()) check(gmcf_psf_write_gaussian(sigma_right, psf_out2.c_str()), "psf");
      return 0;
    }

    if (metrics->parsed()) {
      ImagePtr a = load(m_in1);
      ImagePtr b = load(m_in2);
      ImagePtr f = load(m_fused);
      gmcf_metrics m{};
      check(gmcf_metrics_compute(a.get(), b.get(), f.get(), window, &m), "metrics");
      std::printf("pe,q0,q\n%.6f,%.6f,%.6f\n", m.pe, m.q0, m.q);
      return 0;
    }

    if (bench->parsed()) {
      std::vector<ResultPtr> owned;
      std::vector<const gmcf_result*> rows;
      for (int i = 0; i < count; ++i) {
        gmcf_image* raw = nullptr;
        check(gmcf_scene_create(bench_size, bench_size, 1000 + i, &raw), "scene");
        ImagePtr gt(raw);
        gmcf_image* a = nullptr;
        gmcf_image* b = nullptr;
        check(gmcf_synth_pair(gt.get(), bench_sigma, bench_sigma, bench_noise, 2000 + i, &a, &b), "synth");
        ImagePtr y1(a);
        ImagePtr y2(b);
        const std::string dataset = "synth" + std::to_string(i);
        for (const char* method : {"wavelet-wa", "l1", "gmc"}) {
          gmcf_job* jraw = nullptr;
          check(gmcf_job_create(&jraw), "job");
          JobPtr job(jraw);
          check(gmcf_job_set(job.get(), "method", method), "method");
          check(gmcf_job_set(job.get(), "lambda", bench_lambda.c_str()), "lambda");
          check(gmcf_job_set(job.get(), "dataset", dataset.c_str()), "dataset");
          gmcf_result* rraw = nullptr;
          check(gmcf_fuse_images(job.get(), y1.get(), y2.get(), &rraw), "fuse");
          ResultPtr res(rraw);
          check(gmcf_result_attach_metrics(res.get(), y1.get(), y2.get()), "metrics");
          double db = 0.0;
          check(gmcf_psnr(gt.get(), gmcf_result_fused(res.get()), &db), "psnr");
          std::printf("%-8s %-11s PSNR %6.2f dB\n", dataset.c_str(), method, db);
          rows.push_back(res.get());
          owned.push_back(std::move(res));
        }
      }
      std::fputs(table_of(rows).c_str(), stdout);
      if (!bench_csv.empty()) check(gmcf_report_write(rows.data(), rows.size(), bench_csv.c_str()), "csv");
      return 0;
    }
  } catch (const CliFailure& e) {
    std::fprintf(stderr, "gmcfuse: %s\n", e.what());
    return 2;
  }
  return 0;
}
