#include "doctest.h"

#include <cmath>
#include <random>

#include "gmcfuse/errors.hpp"
#include "gmcfuse/wavelet.hpp"
#include "oracles.hpp"

using namespace gmcfuse;

TEST_CASE("constant 2x2 block") {
  WaveletPyramid p = dwt2_forward(Image(2, 2, 1.0), 1);
  CHECK(p.band(1, Band::LL)(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(p.band(1, Band::HL)(0, 0)) < 1e-15);
  CHECK(std::abs(p.band(1, Band::LH)(0, 0)) < 1e-15);
  CHECK(std::abs(p.band(1, Band::HH)(0, 0)) < 1e-15);
}

TEST_CASE("impulse at the origin spreads 0.5 into every band") {
  Image img(2, 2, 0.0);
  img(0, 0) = 1.0;
  WaveletPyramid p = dwt2_forward(img, 1);
  for (Band b : {Band::LL, Band::HL, Band::LH, Band::HH}) {
    CHECK(p.band(1, b)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("band orientation") {
  // Vertical edge: horizontal high-pass lands in HL.
  Image v(2, 2, std::vector<double>{1, 0, 1, 0});
  WaveletPyramid pv = dwt2_forward(v, 1);
  CHECK(pv.band(1, Band::HL)(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(pv.band(1, Band::LH)(0, 0)) < 1e-15);
  Image h(2, 2, std::vector<double>{1, 1, 0, 0});
  WaveletPyramid ph = dwt2_forward(h, 1);
  CHECK(ph.band(1, Band::LH)(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(ph.band(1, Band::HL)(0, 0)) < 1e-15);
}

TEST_CASE("analysis matches the dense Haar matrix") {
  std::mt19937_64 rng(1);
  for (auto [w, h, l] : {std::tuple{8, 4, 2}, std::tuple{8, 8, 3}, std::tuple{4, 8, 1}, std::tuple{6, 6, 0}}) {
    Image img = oracle::random_image(w, h, rng);
    WaveletPyramid p = haar_analyze(img, l);
    Eigen::VectorXd expect = oracle::haar_analysis_matrix(w, h, l) * oracle::as_vector(img.pixels());
    CHECK(oracle::max_abs_diff(p.coefficients(), std::span<const double>(expect.data(), expect.size())) < 1e-13);
  }
}

TEST_CASE("band dimensions halve per level and count matches padded area") {
  WaveletPyramid p = dwt2_forward(Image(40, 24, 0.3), 3);
  CHECK(p.padded_width() == 40);
  CHECK(p.padded_height() == 24);
  CHECK(p.size() == 40u * 24u);
  for (int l = 1; l <= 3; ++l) {
    Image b = p.band(l, Band::HH);
    CHECK(b.width() == 40 >> l);
    CHECK(b.height() == 24 >> l);
  }
  CHECK(p.top_approx().width() == 5);
  CHECK(p.top_approx().height() == 3);
  CHECK_THROWS_AS(p.band(2, Band::LL), ArgumentError);
  CHECK_THROWS_AS(p.band(4, Band::HL), ArgumentError);
}

TEST_CASE("perfect reconstruction, levels 1-5") {
  std::mt19937_64 rng(2);
  for (int l = 1; l <= 5; ++l) {
    Image img = oracle::random_image(128, 128, rng);
    Image back = dwt2_inverse(dwt2_forward(img, l));
    CHECK(oracle::max_abs_diff(back.pixels(), img.pixels()) < 1e-10);
  }
  for (auto [w, h] : {std::pair{31, 47}, std::pair{33, 17}, std::pair{65, 64}}) {
    for (int l = 1; l <= 4; ++l) {
      Image img = oracle::random_image(w, h, rng);
      WaveletPyramid p = dwt2_forward(img, l);
      CHECK(p.padded_width() % (1 << l) == 0);
      CHECK(p.original_width() == w);
      Image back = dwt2_inverse(p);
      REQUIRE(back.same_shape(img));
      CHECK(oracle::max_abs_diff(back.pixels(), img.pixels()) < 1e-10);
    }
  }
}

TEST_CASE("Parseval on divisible images") {
  std::mt19937_64 rng(3);
  Image img = oracle::random_image(64, 64, rng);
  for (int l = 1; l <= 5; ++l) {
    WaveletPyramid p = dwt2_forward(img, l);
    CHECK(std::abs(norm2(p) - norm2(img)) / norm2(img) < 1e-10);
  }
}

TEST_CASE("linearity") {
  std::mt19937_64 rng(4);
  Image a = oracle::random_image(32, 16, rng);
  Image b = oracle::random_image(32, 16, rng);
  const double al = 0.7;
  const double be = -1.3;
  Image c(32, 16);
  for (std::size_t i = 0; i < c.size(); ++i) c.pixels()[i] = al * a.pixels()[i] + be * b.pixels()[i];
  WaveletPyramid pa = dwt2_forward(a, 3);
  WaveletPyramid pb = dwt2_forward(b, 3);
  WaveletPyramid pc = dwt2_forward(c, 3);
  double err = 0.0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    err = std::max(err, std::abs(pc.coefficients()[i] - al * pa.coefficients()[i] - be * pb.coefficients()[i]));
  }
  CHECK(err < 1e-10);
}

TEST_CASE("synthesis is the adjoint of analysis") {
  std::mt19937_64 rng(5);
  for (int l = 0; l <= 4; ++l) {
    WaveletPyramid a = oracle::random_pyramid(l, 48, 32, rng);
    Image b = oracle::random_image(48, 32, rng, -1.0, 1.0);
    const double lhs = dot(haar_synthesize(a), b);
    const double rhs = dot(a, haar_analyze(b, l));
    CHECK(std::abs(lhs - rhs) / (norm2(a) * norm2(b)) < 1e-10);
  }
}

TEST_CASE("approximation-only pyramid synthesizes a constant") {
  WaveletPyramid p = WaveletPyramid::zeros(2, 8, 8, 8, 8);
  // LL at level L of a constant c image equals c * 2^L.
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) p.coefficients()[static_cast<std::size_t>(y * 8 + x)] = 0.3 * 4.0;
  }
  Image img = dwt2_inverse(p);
  for (double v : img.pixels()) CHECK(v == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("levels = 0 is the identity") {
  std::mt19937_64 rng(6);
  Image img = oracle::random_image(5, 3, rng);
  WaveletPyramid p = dwt2_forward(img, 0);
  CHECK(std::vector<double>(p.coefficients().begin(), p.coefficients().end()) == img.data());
  CHECK(dwt2_inverse(p).data() == img.data());
}

TEST_CASE("level validation") {
  CHECK_NOTHROW(check_levels(17, 17, 5));
  CHECK_NOTHROW(check_levels(16, 16, 4));
  CHECK_THROWS_AS(check_levels(16, 16, 5), ArgumentError);
  CHECK_THROWS_AS(check_levels(16, 16, -1), ArgumentError);
  CHECK_THROWS_AS(dwt2_forward(Image(3, 3), 3), ArgumentError);
  CHECK_THROWS_AS(haar_analyze(Image(6, 8), 2), StructureError);
  CHECK(default_levels(512, 512) == 4);
  CHECK(default_levels(64, 64) == 4);
  CHECK(default_levels(32, 128) == 3);
  CHECK(default_levels(4, 4) == 1);
}

TEST_CASE("pyramid structure validation") {
  CHECK_THROWS_AS(WaveletPyramid(2, 6, 8, 6, 8, std::vector<double>(48)), StructureError);
  CHECK_THROWS_AS(WaveletPyramid(1, 4, 4, 4, 4, std::vector<double>(15)), StructureError);
  CHECK_THROWS_AS(WaveletPyramid(1, 4, 4, 5, 4, std::vector<double>(16)), StructureError);
  WaveletPyramid a = WaveletPyramid::zeros(1, 4, 4, 4, 4);
  WaveletPyramid b = WaveletPyramid::zeros(2, 4, 4, 4, 4);
  CHECK_FALSE(a.same_structure(b));
  CHECK(a.same_structure(WaveletPyramid::zeros_like(a)));
}
