#include "gmcfuse/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "gmcfuse/errors.hpp"

namespace gmcfuse {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string key) {
  key = trim(key);
  while (!key.empty() && key.front() == '-') key.erase(key.begin());
  std::replace(key.begin(), key.end(), '_', '-');
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return key;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("setting '" + key + "': expected a number, got '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("setting '" + key + "': expected an integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "1" || v == "true" || v == "yes" || v == "on" || v.empty()) return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ArgumentError("setting '" + key + "': expected a boolean, got '" + value + "'");
}

Image average(const Image& a, const Image& b) {
  Image out(a.width(), a.height());
  for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] = 0.5 * (a.pixels()[i] + b.pixels()[i]);
  return out;
}

std::string format_cell(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "gmc") return Method::Gmc;
  if (name == "l1") return Method::L1;
  if (name == "wavelet-wa") return Method::WaveletWa;
  throw ArgumentError("unknown method '" + name + "' (expected gmc, l1 or wavelet-wa)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Gmc: return "gmc";
    case Method::L1: return "l1";
    case Method::WaveletWa: return "wavelet-wa";
  }
  return "?";
}

Image baseline_wavelet_wa(const Image& y1, const Image& y2, int levels) {
  if (!y1.same_shape(y2)) throw DimensionError("wavelet-wa: source images differ in size");
  WaveletPyramid p1 = dwt2_forward(y1, levels);
  const WaveletPyramid p2 = dwt2_forward(y2, levels);
  auto c1 = p1.coefficients();
  const auto c2 = p2.coefficients();
  for (std::size_t i = 0; i < c1.size(); ++i) c1[i] = 0.5 * (c1[i] + c2[i]);
  return dwt2_inverse(p1);
}

FusionOutcome fuse_images(const Image& y1, const Image& y2, const FusionOptions& options) {
  if (!y1.same_shape(y2)) throw DimensionError("source images differ in size");
  y1.check_finite();
  y2.check_finite();
  const int levels =
      options.solver.levels < 0 ? default_levels(y1.width(), y1.height()) : options.solver.levels;
  check_levels(y1.width(), y1.height(), levels);

  FusionOutcome out;
  out.levels = levels;
  if (options.method == Method::WaveletWa) {
    const auto t0 = Clock::now();
    out.fused = baseline_wavelet_wa(y1, y2, levels);
    out.seconds = elapsed(t0);
    clamp_unit(out.fused);
    return out;
  }

  GainMap gains = build_gain_map(y1, y2, options.gains);
  const int pw = padded_extent(y1.width(), levels);
  const int ph = padded_extent(y1.height(), levels);
  const ForwardOp op1(pad_symmetric(gains.beta1, pw, ph), levels, options.psf1);
  const ForwardOp op2(pad_symmetric(gains.beta2, pw, ph), levels, options.psf2);

  SolverConfig cfg = options.solver;
  cfg.levels = levels;
  if (options.method == Method::L1) cfg.gamma = 0.0;

  const auto t0 = Clock::now();
  FusionResult result = solve(pad_symmetric(y1, pw, ph), pad_symmetric(y2, pw, ph), op1, op2, cfg);
  out.seconds = elapsed(t0);
  out.fused = crop(result.fused, y1.width(), y1.height());
  out.gains = std::move(gains);
  out.solver = std::move(result);
  return out;
}

SynthPair synth_pair(const Image& ground_truth, double sigma_left, double sigma_right,
                     const SynthOptions& options) {
  if (sigma_left < 0.0 || sigma_right < 0.0) throw ArgumentError("blur sigmas must be >= 0");
  Psf psf1 = Psf::gaussian(sigma_left);
  Psf psf2 = Psf::gaussian(sigma_right);
  const Image blur1 = conv2_apply(ground_truth, psf1);
  const Image blur2 = conv2_apply(ground_truth, psf2);

  const int w = ground_truth.width();
  const int h = ground_truth.height();
  const double center = 0.5 * w;
  const double half_seam = 0.5 * std::max(options.seam, 0);
  // Weight of the blurred image in y1: 1 on the left, 0 on the right.
  std::vector<double> left_weight(static_cast<std::size_t>(w));
  for (int x = 0; x < w; ++x) {
    const double pos = x + 0.5;
    if (half_seam == 0.0) {
      left_weight[x] = pos < center ? 1.0 : 0.0;
    } else {
      left_weight[x] = std::clamp((center + half_seam - pos) / (2.0 * half_seam), 0.0, 1.0);
    }
  }

  Image y1(w, h);
  Image y2(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double a = left_weight[x];
      const double g = ground_truth(x, y);
      y1(x, y) = g + a * (blur1(x, y) - g);
      y2(x, y) = g + (1.0 - a) * (blur2(x, y) - g);
    }
  }
  if (options.noise_sigma > 0.0) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> noise(0.0, options.noise_sigma);
    for (double& v : y1.pixels()) v += noise(rng);
    for (double& v : y2.pixels()) v += noise(rng);
  }
  return {std::move(y1), std::move(y2), std::move(psf1), std::move(psf2)};
}

Image synthetic_scene(int width, int height, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Image img(width, height);
  const double gx = unit(rng) - 0.5;
  const double gy = unit(rng) - 0.5;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      img(x, y) = 0.5 + 0.2 * (gx * x / width + gy * y / height);
    }
  }
  const int shapes = 6 + static_cast<int>(unit(rng) * 6);
  for (int s = 0; s < shapes; ++s) {
    const double cx = unit(rng) * width;
    const double cy = unit(rng) * height;
    const double rx = (0.05 + 0.2 * unit(rng)) * width;
    const double ry = (0.05 + 0.2 * unit(rng)) * height;
    const double level = unit(rng) - 0.5;
    const bool disc = unit(rng) < 0.5;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = (x - cx) / rx;
        const double dy = (y - cy) / ry;
        const bool inside = disc ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (inside) img(x, y) += 0.5 * level;
      }
    }
  }
  // A patch of fine stripes so both halves carry high-frequency detail.
  const double period = 4.0 + 4.0 * unit(rng);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if ((y * 4 / height) % 2 == 1 && (x * 8 / width) % 3 == 1) {
        img(x, y) += 0.12 * std::sin(2.0 * 3.14159265358979 * x / period);
      }
    }
  }
  for (double& v : img.pixels()) v = std::clamp(v, 0.05, 0.95);
  return img;
}

void apply_job_setting(FusionJob& job, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = normalize_key(raw_key);
  const std::string value = trim(raw_value);
  if (key == "in1") {
    job.in1 = value;
  } else if (key == "in2") {
    job.in2 = value;
  } else if (key == "psf1") {
    job.psf1 = value;
  } else if (key == "psf2") {
    job.psf2 = value;
  } else if (key == "method") {
    job.method = parse_method(value);
  } else if (key == "lambda") {
    job.solver.lambda = parse_double(key, value);
  } else if (key == "gamma") {
    job.solver.gamma = parse_double(key, value);
  } else if (key == "mu") {
    if (value == "auto") {
      job.solver.mu.reset();
    } else {
      job.solver.mu = parse_double(key, value);
    }
  } else if (key == "levels") {
    job.solver.levels = value == "auto" ? -1 : parse_int(key, value);
  } else if (key == "patch") {
    job.gains.patch_size = parse_int(key, value);
  } else if (key == "smooth-gains") {
    job.gains.smooth = parse_bool(key, value);
  } else if (key == "iters") {
    job.solver.max_iters = parse_int(key, value);
  } else if (key == "tol") {
    job.solver.tol = parse_double(key, value);
  } else if (key == "out") {
    job.out = value;
  } else if (key == "metrics") {
    job.metrics_csv = value;
  } else if (key == "crop") {
    job.crop = parse_bool(key, value);
  } else if (key == "dataset") {
    job.dataset = value;
  } else if (key == "preset") {
    if (value == "clean") {
      job.solver.lambda = kCleanLambda;
    } else if (value == "noisy") {
      job.solver.lambda = kNoisyLambda;
    } else {
      throw ArgumentError("unknown preset '" + value + "' (expected clean or noisy)");
    }
  } else {
    throw ArgumentError("unknown job setting '" + raw_key + "'");
  }
}

FusionJob load_job_file(const std::string& path, FusionJob base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open job file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_job_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

PipelineOutput fuse_pipeline(const FusionJob& job) {
  if (job.in1.empty() || job.in2.empty()) throw ArgumentError("two input images are required");
  Raster r1 = load_image(job.in1);
  Raster r2 = load_image(job.in2);
  if (r1.width() != r2.width() || r1.height() != r2.height()) {
    if (!job.crop) {
      throw DimensionError("input sizes differ (" + std::to_string(r1.width()) + "x" +
                           std::to_string(r1.height()) + " vs " + std::to_string(r2.width()) + "x" +
                           std::to_string(r2.height()) + "); pass crop to center-crop");
    }
    const int w = std::min(r1.width(), r2.width());
    const int h = std::min(r1.height(), r2.height());
    for (auto* r : {&r1, &r2}) {
      for (Image& c : r->channels) c = center_crop(c, w, h);
    }
  }

  std::optional<Image> cb;
  std::optional<Image> cr;
  Image y1;
  Image y2;
  auto split = [](const Raster& r) {
    return rgb_to_ycbcr(ColorImage{r.channels[0], r.channels[1], r.channels[2]});
  };
  if (r1.is_color() && r2.is_color()) {
    YCbCr a = split(r1);
    YCbCr b = split(r2);
    cb = average(a.cb, b.cb);
    cr = average(a.cr, b.cr);
    y1 = std::move(a.y);
    y2 = std::move(b.y);
  } else if (r1.is_color() || r2.is_color()) {
    YCbCr c = split(r1.is_color() ? r1 : r2);
    cb = std::move(c.cb);
    cr = std::move(c.cr);
    y1 = r1.is_color() ? c.y : r1.channels.front();
    y2 = r2.is_color() ? c.y : r2.channels.front();
  } else {
    y1 = r1.channels.front();
    y2 = r2.channels.front();
  }

  FusionOptions options;
  options.method = job.method;
  options.solver = job.solver;
  options.gains = job.gains;
  if (job.psf1) options.psf1 = load_psf(*job.psf1);
  if (job.psf2) options.psf2 = load_psf(*job.psf2);

  PipelineOutput result;
  result.outcome = fuse_images(y1, y2, options);

  if (!job.out.empty()) {
    Raster out;
    out.bit_depth = std::max(r1.bit_depth, r2.bit_depth);
    if (cb) {
      ColorImage rgb = ycbcr_to_rgb(result.outcome.fused, *cb, *cr);
      out.channels = {std::move(rgb.r), std::move(rgb.g), std::move(rgb.b)};
    } else {
      out.channels = {result.outcome.fused};
    }
    save_image(job.out, out);
  }

  result.row.dataset = job.dataset.empty() ? std::filesystem::path(job.in1).stem().string() : job.dataset;
  result.row.method = method_name(job.method);
  result.row.seconds = result.outcome.seconds;
  if (job.metrics_csv) {
    result.row.metrics = evaluate_metrics(y1, y2, result.outcome.fused);
    const ReportRow rows[] = {result.row};
    write_report(*job.metrics_csv, rows);
  }
  return result;
}

std::vector<ReportRow> summarize(std::span<const ReportRow> rows) {
  std::vector<ReportRow> out(rows.begin(), rows.end());
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ReportRow*>> by_method;
  for (const ReportRow& r : rows) {
    if (!by_method.count(r.method)) order.push_back(r.method);
    by_method[r.method].push_back(&r);
  }
  for (const std::string& m : order) {
    const auto& group = by_method[m];
    ReportRow avg;
    avg.dataset = "Average";
    avg.method = m;
    MetricsReport sum;
    int with_metrics = 0;
    for (const ReportRow* r : group) {
      avg.seconds += r->seconds;
      if (r->metrics) {
        sum.pe += r->metrics->pe;
        sum.q0 += r->metrics->q0;
        sum.q += r->metrics->q;
        sum.window = r->metrics->window;
        ++with_metrics;
      }
    }
    avg.seconds /= static_cast<double>(group.size());
    if (with_metrics > 0) {
      sum.pe /= with_metrics;
      sum.q0 /= with_metrics;
      sum.q /= with_metrics;
      avg.metrics = sum;
    }
    out.push_back(std::move(avg));
  }
  return out;
}

std::string report_csv(std::span<const ReportRow> rows) {
  std::ostringstream os;
  os << "dataset,method,pe,q0,q,seconds\n";
  for (const ReportRow& r : summarize(rows)) {
    os << r.dataset << ',' << r.method << ',';
    if (r.metrics) {
      os << format_cell(r.metrics->pe, "%.6f") << ',' << format_cell(r.metrics->q0, "%.6f") << ','
         << format_cell(r.metrics->q, "%.6f");
    } else {
      os << "NA,NA,NA";
    }
    os << ',' << format_cell(r.seconds, "%.3f") << '\n';
  }
  return os.str();
}

std::string report_table(std::span<const ReportRow> rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %-12s %8s %8s %8s %10s\n", "dataset", "method", "Pe", "Q0",
                "Q", "seconds");
  os << "# seconds: solver wall-clock time only (gain estimation and metrics excluded)\n" << line;
  for (const ReportRow& r : summarize(rows)) {
    if (r.metrics) {
      std::snprintf(line, sizeof line, "%-16s %-12s %8.4f %8.4f %8.4f %10.2f\n", r.dataset.c_str(),
                    r.method.c_str(), r.metrics->pe, r.metrics->q0, r.metrics->q, r.seconds);
    } else {
      std::snprintf(line, sizeof line, "%-16s %-12s %8s %8s %8s %10.2f\n", r.dataset.c_str(),
                    r.method.c_str(), "NA", "NA", "NA", r.seconds);
    }
    os << line;
  }
  return os.str();
}

void write_report(const std::string& csv_path, std::span<const ReportRow> rows) {
  std::ofstream out(csv_path);
  if (!out) throw IoError("cannot write report '" + csv_path + "'");
  out << report_csv(rows);
  if (!out) throw IoError("write failed for '" + csv_path + "'");
}

}  // namespace gmcfuse
