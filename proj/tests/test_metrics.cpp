#include "doctest.h"

#include <cmath>
#include <random>

#include "gmcfuse/errors.hpp"
#include "gmcfuse/metrics.hpp"
#include "gmcfuse/operators.hpp"
#include "oracles.hpp"

using namespace gmcfuse;

namespace {

// Product form of the universal quality index (non-degenerate windows only).
double direct_q(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double vx = 0, vy = 0, c = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
    c += (x[i] - mx) * (y[i] - my);
  }
  vx /= n - 1;
  vy /= n - 1;
  c /= n - 1;
  const double sx = std::sqrt(vx);
  const double sy = std::sqrt(vy);
  return (c / (sx * sy)) * (2 * mx * my / (mx * mx + my * my)) * (2 * sx * sy / (vx + vy));
}

std::vector<double> window_of(const Image& img, int x0, int y0, int n) {
  std::vector<double> v;
  for (int y = y0; y < y0 + n; ++y) {
    for (int x = x0; x < x0 + n; ++x) v.push_back(img(x, y));
  }
  return v;
}

Image edge_image(int w, int h, std::mt19937_64& rng) {
  Image img(w, h, 0.2);
  std::uniform_int_distribution<int> px(0, w - 1);
  std::uniform_int_distribution<int> py(0, h - 1);
  for (int r = 0; r < 6; ++r) {
    const int x0 = px(rng), y0 = py(rng), x1 = px(rng), y1 = py(rng);
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) {
      for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) img(x, y) = 0.2 + 0.1 * r;
    }
  }
  return img;
}

Image plus(const Image& a, double c) {
  Image out = a;
  for (double& v : out.pixels()) v += c;
  return out;
}

}  // namespace

TEST_CASE("quality index examples") {
  std::mt19937_64 rng(1);
  std::vector<double> x(64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : x) v = u(rng);
  double m = 0;
  for (double v : x) m += v;
  m /= 64;
  for (double& v : x) v += 0.5 - m;  // mean exactly 0.5
  std::vector<double> y = x;
  for (double& v : y) v += 0.5;
  CHECK(quality_index(x.data(), x.data(), 64) == 1.0);
  CHECK(quality_index(x.data(), y.data(), 64) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(quality_index(x.data(), y.data(), 64) == doctest::Approx(direct_q(x, y)).epsilon(1e-12));

  const std::vector<double> c1(16, 0.3);
  const std::vector<double> c2(16, 0.6);
  CHECK(quality_index(c1.data(), c1.data(), 16) == 1.0);
  CHECK(quality_index(c1.data(), c2.data(), 16) == 0.0);
  CHECK(quality_index(c1.data(), x.data(), 16) == 0.0);
  const std::vector<double> zero(16, 0.0);
  std::vector<double> zm(16);
  for (int i = 0; i < 16; ++i) zm[i] = i % 2 ? 1.0 : -1.0;
  CHECK(std::isfinite(quality_index(zero.data(), zm.data(), 16)));
  CHECK_THROWS_AS(quality_index(x.data(), y.data(), 1), ArgumentError);
}

TEST_CASE("q0 and piella match a per-window oracle") {
  std::mt19937_64 rng(2);
  Image a = oracle::random_image(14, 12, rng, 0.1, 0.9);
  Image b = oracle::random_image(14, 12, rng, 0.1, 0.9);
  Image f = oracle::random_image(14, 12, rng, 0.1, 0.9);
  for (int n : {4, 8}) {
    double q0 = 0, q = 0;
    int count = 0;
    for (int y0 = 0; y0 + n <= 12; ++y0) {
      for (int x0 = 0; x0 + n <= 14; ++x0) {
        const auto wa = window_of(a, x0, y0, n);
        const auto wb = window_of(b, x0, y0, n);
        const auto wf = window_of(f, x0, y0, n);
        const double qa = direct_q(wa, wf);
        const double qb = direct_q(wb, wf);
        double va = 0, vb = 0, ma = 0, mb = 0;
        for (std::size_t i = 0; i < wa.size(); ++i) {
          ma += wa[i];
          mb += wb[i];
        }
        ma /= wa.size();
        mb /= wb.size();
        for (std::size_t i = 0; i < wa.size(); ++i) {
          va += (wa[i] - ma) * (wa[i] - ma);
          vb += (wb[i] - mb) * (wb[i] - mb);
        }
        q0 += 0.5 * (qa + qb);
        q += (va * qa + vb * qb) / (va + vb);
        ++count;
      }
    }
    CHECK(q0_fusion(a, b, f, n) == doctest::Approx(q0 / count).epsilon(1e-12));
    CHECK(piella_q(a, b, f, n) == doctest::Approx(q / count).epsilon(1e-12));
  }
}

TEST_CASE("identical triples score one") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    Image a = oracle::random_image(32, 24, rng);
    CHECK(q0_fusion(a, a, a) == 1.0);
    CHECK(piella_q(a, a, a) == 1.0);
    CHECK(std::abs(petrovic_pe(a, a, a) - 0.975) <= 0.01);
  }
  CHECK(edge_preservation(1.0, 1.0) == doctest::Approx(0.97477).epsilon(1e-4));
}

TEST_CASE("piella reductions") {
  std::mt19937_64 rng(4);
  Image a = oracle::random_image(20, 20, rng);
  Image b = plus(a, 0.1);  // equal saliency in every window
  Image f = oracle::random_image(20, 20, rng);
  CHECK(piella_q(a, b, f) == doctest::Approx(q0_fusion(a, b, f)).epsilon(1e-12));
  CHECK(piella_q(a, Image(20, 20, 0.4), a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("independent noise scores near zero") {
  std::mt19937_64 rng(5);
  Image a = oracle::random_image(256, 256, rng);
  Image f = oracle::random_image(256, 256, rng);
  CHECK(std::abs(q0_fusion(a, a, f)) < 0.1);
  CHECK(std::abs(piella_q(a, a, f)) < 0.1);
}

TEST_CASE("edge preservation examples") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 5; ++t) {
    Image a = edge_image(64, 64, rng);
    Image b = conv2_apply(a, Psf::gaussian(1.0));
    CHECK(petrovic_pe(a, b, Image(64, 64, 0.5)) < 0.1);
    const double pe = petrovic_pe(a, b, a);
    CHECK(pe >= 0.0);
    CHECK(pe <= metric_constants::gamma_g * metric_constants::gamma_a);
    CHECK(petrovic_pe(a, b, a) == doctest::Approx(petrovic_pe(b, a, a)).epsilon(1e-14));
  }
  Image a = edge_image(32, 32, rng);
  CHECK(petrovic_pe(a, a, a) == doctest::Approx(edge_preservation(1.0, 1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(petrovic_pe(Image(2, 5), Image(2, 5), Image(2, 5)), ArgumentError);
}

TEST_CASE("metrics are total on constant images") {
  Image c(16, 16, 0.5);
  Image d(16, 16, 0.2);
  Image z(16, 16, 0.0);
  std::mt19937_64 rng(7);
  Image r = oracle::random_image(16, 16, rng);
  for (const Image* f : {&c, &d, &z, &r}) {
    for (const Image* a : {&c, &z}) {
      MetricsReport m = evaluate_metrics(*a, d, *f);
      CHECK(std::isfinite(m.pe));
      CHECK(std::isfinite(m.q0));
      CHECK(std::isfinite(m.q));
      CHECK(m.pe >= 0.0);
      CHECK(m.pe <= 1.0);
    }
  }
  CHECK(q0_fusion(c, c, c) == 1.0);
  CHECK(piella_q(z, z, z) == 1.0);
  CHECK(petrovic_pe(c, c, c) == doctest::Approx(edge_preservation(1.0, 1.0)));
  CHECK(petrovic_pe(c, c, r) == 0.0);
}

TEST_CASE("symmetry under swapping equal sources") {
  std::mt19937_64 rng(8);
  Image a = oracle::random_image(24, 24, rng);
  Image f = oracle::random_image(24, 24, rng);
  MetricsReport m1 = evaluate_metrics(a, a, f);
  MetricsReport m2 = evaluate_metrics(a, a, f);
  CHECK(m1.pe == m2.pe);
  Image b = plus(a, 0.05);
  CHECK(q0_fusion(a, b, f) == doctest::Approx(q0_fusion(b, a, f)).epsilon(1e-13));
  CHECK(piella_q(a, b, f) == doctest::Approx(piella_q(b, a, f)).epsilon(1e-13));
  CHECK(petrovic_pe(a, b, f) == doctest::Approx(petrovic_pe(b, a, f)).epsilon(1e-13));
}

TEST_CASE("q0 falls as noise is mixed in") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 5; ++t) {
    Image a = oracle::random_image(64, 64, rng);
    Image noise = oracle::random_image(64, 64, rng);
    double prev = 2.0;
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      Image f(64, 64);
      for (std::size_t i = 0; i < f.size(); ++i) f.pixels()[i] = (1 - s) * a.pixels()[i] + s * noise.pixels()[i];
      const double q = q0_fusion(a, a, f);
      CHECK(q <= prev + 1e-12);
      prev = q;
    }
  }
}

TEST_CASE("metric argument checks and PSNR") {
  CHECK_THROWS_AS(q0_fusion(Image(8, 8), Image(8, 9), Image(8, 8)), DimensionError);
  CHECK_THROWS_AS(piella_q(Image(8, 8), Image(8, 8), Image(8, 8), 9), ArgumentError);
  CHECK_THROWS_AS(q0_fusion(Image(8, 8), Image(8, 8), Image(8, 8), 1), ArgumentError);
  Image a(10, 10, 0.5);
  Image b(10, 10, 0.6);
  CHECK(psnr(a, b) == doctest::Approx(20.0));
  CHECK(std::isinf(psnr(a, a)));
  CHECK_THROWS_AS(psnr(a, Image(9, 10)), DimensionError);
}
