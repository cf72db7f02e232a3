#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "gmcfuse/errors.hpp"
#include "gmcfuse/image_io.hpp"
#include "gmcfuse/pipeline.hpp"
#include "oracles.hpp"
#include "tmpdir.hpp"

using namespace gmcfuse;

namespace {

double mean_abs_diff(const Image& a, const Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.pixels()[i] - b.pixels()[i]);
  return s / static_cast<double>(a.size());
}

double variance(const Image& img, int x0, int y0, int n) {
  double m = 0.0;
  for (int y = y0; y < y0 + n; ++y) {
    for (int x = x0; x < x0 + n; ++x) m += img(x, y);
  }
  m /= n * n;
  double v = 0.0;
  for (int y = y0; y < y0 + n; ++y) {
    for (int x = x0; x < x0 + n; ++x) v += (img(x, y) - m) * (img(x, y) - m);
  }
  return v / (n * n);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::Gmc, Method::L1, Method::WaveletWa}) CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS_AS(parse_method("pca"), ArgumentError);
}

TEST_CASE("wavelet averaging baseline") {
  std::mt19937_64 rng(1);
  Image a = oracle::random_image(40, 33, rng);
  Image b = oracle::random_image(40, 33, rng);
  CHECK(oracle::max_abs_diff(baseline_wavelet_wa(a, a, 3).pixels(), a.pixels()) < 1e-10);
  Image avg(40, 33);
  Image half(40, 33);
  for (std::size_t i = 0; i < avg.size(); ++i) {
    avg.pixels()[i] = 0.5 * (a.pixels()[i] + b.pixels()[i]);
    half.pixels()[i] = 0.5 * a.pixels()[i];
  }
  CHECK(oracle::max_abs_diff(baseline_wavelet_wa(a, b, 3).pixels(), avg.pixels()) < 1e-10);
  CHECK(oracle::max_abs_diff(baseline_wavelet_wa(a, Image(40, 33, 0.0), 2).pixels(), half.pixels()) < 1e-10);
}

TEST_CASE("synthetic pairs") {
  Image gt = synthetic_scene(64, 64, 3);
  for (double v : gt.pixels()) {
    CHECK(v >= 0.05);
    CHECK(v <= 0.95);
  }
  CHECK(synthetic_scene(64, 64, 3).data() == gt.data());
  CHECK(synthetic_scene(64, 64, 4).data() != gt.data());

  SynthPair sharp = synth_pair(gt, 0.0, 0.0);
  CHECK(sharp.y1.data() == gt.data());
  CHECK(sharp.y2.data() == gt.data());

  SynthPair p = synth_pair(gt, 2.0, 2.0);
  for (const Psf* psf : {&p.psf1, &p.psf2}) {
    double s = 0.0;
    for (double v : psf->kernel().pixels()) s += v;
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  // Away from the seam each blurred patch with structure has less variance
  // than its sharp twin (a smooth ramp has nothing for the blur to remove).
  int checked = 0;
  for (int py = 0; py < 64; py += 16) {
    for (int px : {0, 48}) {
      const double v1 = variance(p.y1, px, py, 16);
      const double v2 = variance(p.y2, px, py, 16);
      if (variance(gt, px, py, 16) < 1e-3) continue;
      ++checked;
      if (px == 0) {
        CHECK(v1 < v2);
      } else {
        CHECK(v2 < v1);
      }
    }
  }
  CHECK(checked >= 3);
  SynthPair n1 = synth_pair(gt, 2.0, 2.0, {0.05, 9, 8});
  SynthPair n2 = synth_pair(gt, 2.0, 2.0, {0.05, 9, 8});
  CHECK(n1.y1.data() == n2.y1.data());
  CHECK(n1.y1.data() != p.y1.data());
  CHECK_THROWS_AS(synth_pair(gt, -1.0, 0.0), ArgumentError);
}

TEST_CASE("identical inputs reproduce the input") {
  Image y = synthetic_scene(64, 48, 5);
  FusionOptions opt;
  opt.solver.lambda = kCleanLambda;
  FusionOutcome out = fuse_images(y, y, opt);
  CHECK(out.fused.same_shape(y));
  CHECK(mean_abs_diff(out.fused, y) <= 0.01);
  REQUIRE(out.gains);
  CHECK(out.gains->beta1(10, 10) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("l1 equals gmc with gamma = 0") {
  Image gt = synthetic_scene(48, 48, 6);
  SynthPair p = synth_pair(gt, 1.5, 1.5, {0.01, 1, 8});
  FusionOptions l1;
  l1.method = Method::L1;
  l1.solver.gamma = 0.8;  // ignored by l1
  FusionOptions gmc;
  gmc.solver.gamma = 0.0;
  FusionOutcome a = fuse_images(p.y1, p.y2, l1);
  FusionOutcome b = fuse_images(p.y1, p.y2, gmc);
  CHECK(oracle::max_abs_diff(a.fused.pixels(), b.fused.pixels()) < 1e-10);
}

TEST_CASE("fusing a complementary-blur pair beats both inputs") {
  for (unsigned long long seed : {1ull, 2ull}) {
    Image gt = synthetic_scene(96, 96, seed);
    SynthPair p = synth_pair(gt, 2.0, 2.0);
    FusionOutcome out = fuse_images(p.y1, p.y2, FusionOptions{});
    const double fused = psnr(gt, out.fused);
    CHECK(fused > psnr(gt, p.y1));
    CHECK(fused > psnr(gt, p.y2));
  }
}

TEST_CASE("odd sizes are padded and cropped back") {
  std::mt19937_64 rng(7);
  Image a = oracle::random_image(37, 29, rng);
  Image b = oracle::random_image(37, 29, rng);
  for (Method m : {Method::Gmc, Method::L1, Method::WaveletWa}) {
    FusionOptions opt;
    opt.method = m;
    opt.solver.max_iters = 20;
    FusionOutcome out = fuse_images(a, b, opt);
    CHECK(out.fused.width() == 37);
    CHECK(out.fused.height() == 29);
    CHECK(out.solver.has_value() == (m != Method::WaveletWa));
  }
  CHECK_THROWS_AS(fuse_images(a, Image(37, 30), FusionOptions{}), DimensionError);
}

TEST_CASE("identity PSFs reduce to the fusion-only path") {
  Image gt = synthetic_scene(32, 32, 8);
  SynthPair p = synth_pair(gt, 1.0, 1.0);
  FusionOptions plain;
  FusionOptions with;
  with.psf1 = Psf::identity();
  with.psf2 = Psf::identity();
  FusionOutcome a = fuse_images(p.y1, p.y2, plain);
  FusionOutcome b = fuse_images(p.y1, p.y2, with);
  CHECK(a.fused.data() == b.fused.data());
  CHECK(a.solver->iters_used == b.solver->iters_used);
}

TEST_CASE("joint deconvolution uses the supplied PSFs") {
  Image gt = synthetic_scene(32, 32, 9);
  const Psf g = Psf::gaussian(1.0);
  const Image blurred = conv2_apply(gt, g);
  FusionOptions opt;
  opt.psf1 = g;
  opt.psf2 = g;
  opt.solver.lambda = 1e-4;
  opt.solver.max_iters = 500;
  FusionOutcome deconv = fuse_images(blurred, blurred, opt);
  FusionOutcome plain = fuse_images(blurred, blurred, FusionOptions{});
  CHECK(psnr(gt, deconv.fused) > psnr(gt, plain.fused));
}

TEST_CASE("report rows and averages") {
  ReportRow r1{"a", "gmc", MetricsReport{0.5, 0.6, 0.7, 8}, 1.0};
  std::vector<ReportRow> one{r1};
  auto s1 = summarize(one);
  REQUIRE(s1.size() == 2);
  CHECK(s1[1].dataset == "Average");
  CHECK(s1[1].metrics->pe == r1.metrics->pe);
  CHECK(s1[1].metrics->q == r1.metrics->q);
  CHECK(s1[1].seconds == r1.seconds);

  ReportRow r2{"b", "gmc", MetricsReport{0.25, 0.1, 0.3, 8}, 3.0};
  std::vector<ReportRow> two{r1, r2};
  auto s2 = summarize(two);
  REQUIRE(s2.size() == 3);
  CHECK(std::abs(s2[2].metrics->pe - 0.375) < 1e-12);
  CHECK(std::abs(s2[2].metrics->q0 - 0.35) < 1e-12);
  CHECK(std::abs(s2[2].metrics->q - 0.5) < 1e-12);
  CHECK(std::abs(s2[2].seconds - 2.0) < 1e-12);

  ReportRow r3{"a", "l1", std::nullopt, 0.5};
  std::vector<ReportRow> mixed{r1, r3, r2};
  auto s3 = summarize(mixed);
  REQUIRE(s3.size() == 5);
  CHECK(s3[3].method == "gmc");
  CHECK(s3[4].method == "l1");
  CHECK_FALSE(s3[4].metrics.has_value());

  const auto csv = lines(report_csv(mixed));
  REQUIRE(csv.size() == 6);
  CHECK(csv[0] == "dataset,method,pe,q0,q,seconds");
  CHECK(csv[1] == "a,gmc,0.500000,0.600000,0.700000,1.000");
  CHECK(csv[2] == "a,l1,NA,NA,NA,0.500");
  CHECK(csv[4] == "Average,gmc,0.375000,0.350000,0.500000,2.000");
  CHECK(csv[5] == "Average,l1,NA,NA,NA,0.500");

  const std::string table = report_table(mixed);
  CHECK(table.find("# seconds") == 0);
  CHECK(table.find("NA") != std::string::npos);
}

TEST_CASE("job settings") {
  FusionJob job;
  apply_job_setting(job, "--in1", " a.png ");
  apply_job_setting(job, "in2", "b.png");
  apply_job_setting(job, "method", "l1");
  apply_job_setting(job, "lambda", "0.25");
  apply_job_setting(job, "gamma", "0.5");
  apply_job_setting(job, "mu", "0.3");
  apply_job_setting(job, "levels", "3");
  apply_job_setting(job, "patch", "8");
  apply_job_setting(job, "smooth_gains", "true");
  apply_job_setting(job, "iters", "50");
  apply_job_setting(job, "tol", "1e-5");
  apply_job_setting(job, "crop", "yes");
  CHECK(job.in1 == "a.png");
  CHECK(job.method == Method::L1);
  CHECK(job.solver.lambda == 0.25);
  CHECK(job.solver.gamma == 0.5);
  CHECK(*job.solver.mu == 0.3);
  CHECK(job.solver.levels == 3);
  CHECK(job.gains.patch_size == 8);
  CHECK(job.gains.smooth);
  CHECK(job.solver.max_iters == 50);
  CHECK(job.solver.tol == 1e-5);
  CHECK(job.crop);
  apply_job_setting(job, "mu", "auto");
  CHECK_FALSE(job.solver.mu);
  apply_job_setting(job, "preset", "noisy");
  CHECK(job.solver.lambda == kNoisyLambda);
  CHECK_THROWS_AS(apply_job_setting(job, "lamda", "1"), ArgumentError);
  CHECK_THROWS_AS(apply_job_setting(job, "lambda", "abc"), ArgumentError);
  CHECK_THROWS_AS(apply_job_setting(job, "iters", "1.5"), ArgumentError);
  CHECK_THROWS_AS(apply_job_setting(job, "crop", "maybe"), ArgumentError);
  CHECK_THROWS_AS(apply_job_setting(job, "method", "max"), ArgumentError);
}

TEST_CASE("job files") {
  {
    std::ofstream f(tmp_path("job.txt"));
    f << "# fusion job\n\nin1 = left.png\nin2=right.png   # trailing comment\nlambda = 0.01\nmethod = gmc\n";
  }
  FusionJob base;
  base.solver.max_iters = 77;
  FusionJob job = load_job_file(tmp_path("job.txt"), base);
  CHECK(job.in1 == "left.png");
  CHECK(job.in2 == "right.png");
  CHECK(job.solver.lambda == 0.01);
  CHECK(job.solver.max_iters == 77);
  {
    std::ofstream f(tmp_path("badjob.txt"));
    f << "in1 left.png\n";
  }
  CHECK_THROWS_AS(load_job_file(tmp_path("badjob.txt")), ArgumentError);
  CHECK_THROWS_AS(load_job_file(tmp_path("missing_job.txt")), IoError);
}

TEST_CASE("file pipeline end to end") {
  Image gt = synthetic_scene(64, 64, 10);
  SynthPair p = synth_pair(gt, 2.0, 2.0);
  save_image(tmp_path("p1.png"), p.y1, 16);
  save_image(tmp_path("p2.png"), p.y2, 16);
  FusionJob job;
  job.in1 = tmp_path("p1.png");
  job.in2 = tmp_path("p2.png");
  job.out = tmp_path("fused.png");
  job.metrics_csv = tmp_path("fused.csv");
  PipelineOutput out = fuse_pipeline(job);
  CHECK(out.row.dataset == "p1");
  CHECK(out.row.method == "gmc");
  REQUIRE(out.row.metrics);
  Raster r = load_image(job.out);
  CHECK(r.bit_depth == 16);
  CHECK(r.width() == 64);
  CHECK(psnr(gt, r.channels[0]) > psnr(gt, p.y1));
  const auto csv = lines(slurp(*job.metrics_csv));
  REQUIRE(csv.size() == 3);
  CHECK(csv[1].rfind("p1,gmc,", 0) == 0);
  CHECK(csv[2].rfind("Average,gmc,", 0) == 0);

  // Determinism: same job, same bytes (timing column aside).
  const std::string first = slurp(job.out);
  job.dataset = "again";
  fuse_pipeline(job);
  CHECK(slurp(job.out) == first);
  const auto csv2 = lines(slurp(*job.metrics_csv));
  auto strip = [](const std::string& l) { return l.substr(l.find(','), l.rfind(',') - l.find(',')); };
  CHECK(strip(csv2[1]) == strip(csv[1]));
}

TEST_CASE("file pipeline with color and mismatched sizes") {
  Image gt = synthetic_scene(48, 40, 11);
  SynthPair p = synth_pair(gt, 1.5, 1.5);
  Raster color;
  color.channels = {p.y1, p.y1, p.y1};
  for (double& v : color.channels[0].pixels()) v = std::min(1.0, v * 1.1);
  save_image(tmp_path("c1.ppm"), color);
  save_image(tmp_path("g2.pgm"), p.y2, 8);
  FusionJob job;
  job.in1 = tmp_path("c1.ppm");
  job.in2 = tmp_path("g2.pgm");
  job.out = tmp_path("cfused.png");
  fuse_pipeline(job);
  Raster r = load_image(job.out);
  CHECK(r.is_color());
  CHECK(r.width() == 48);
  CHECK_FALSE(fuse_pipeline(job).row.metrics.has_value());

  save_image(tmp_path("small.pgm"), crop(p.y2, 40, 36), 8);
  job.in2 = tmp_path("small.pgm");
  CHECK_THROWS_AS(fuse_pipeline(job), DimensionError);
  job.crop = true;
  job.out = tmp_path("cropped.pgm");
  PipelineOutput o = fuse_pipeline(job);
  CHECK(o.outcome.fused.width() == 40);
  CHECK(o.outcome.fused.height() == 36);
  job.in2.clear();
  CHECK_THROWS_AS(fuse_pipeline(job), ArgumentError);
}
