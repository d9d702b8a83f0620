#include "gphmm/gabor_bank.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gphmm/error.hpp"
#include "test_util.hpp"

using namespace gphmm;
using gphmm::testing::random_image;

namespace {

double max_abs(const ComplexGrid& g) {
  double m = 0.0;
  for (const auto& v : g.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(GaborParams, OrientationAndWaveNumber) {
  GaborParams p;
  EXPECT_DOUBLE_EQ(p.orientation(2), std::numbers::pi / 4.0);
  EXPECT_DOUBLE_EQ(p.wave_number(0), std::numbers::pi / 2.0);
  EXPECT_NEAR(p.wave_number(2), std::numbers::pi / 4.0, 1e-15);
}

TEST(GaborParams, RejectsInvalid) {
  GaborParams p;
  p.sigma = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.f = 1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.n_orients = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(MakeKernel, RejectsBadArguments) {
  GaborParams p;
  EXPECT_THROW(make_kernel(p, 0, 0, 32), InvalidArgument);
  EXPECT_THROW(make_kernel(p, 0, 0, 1), InvalidArgument);
  EXPECT_THROW(make_kernel(p, 8, 0, 33), InvalidArgument);
  EXPECT_THROW(make_kernel(p, -1, 0, 33), InvalidArgument);
  EXPECT_THROW(make_kernel(p, 0, 5, 33), InvalidArgument);
}

TEST(MakeKernel, CenterValueAnalytic) {
  GaborParams p;
  p.dc = DcCorrection::Analytic;
  const auto k = make_kernel(p, 0, 0, 33);
  const double s2 = p.sigma * p.sigma;
  const double expected = 0.0625 * (1.0 - std::exp(-s2 / 2.0));
  EXPECT_NEAR(k.at(0, 0).real(), expected, 1e-15);
  EXPECT_EQ(k.at(0, 0).imag(), 0.0);
}

TEST(MakeKernel, CenterIsRealForEveryKernel) {
  const GaborBank bank(GaborParams{}, 33);
  for (const auto& k : bank) EXPECT_EQ(k.at(0, 0).imag(), 0.0);
}

TEST(MakeKernel, MatchesClosedFormEverywhere) {
  GaborParams p;
  p.dc = DcCorrection::Analytic;
  const int mu = 3, nu = 2;
  const auto k = make_kernel(p, mu, nu, 15);
  const double kn = p.wave_number(nu);
  const double phi = std::numbers::pi * mu / 8.0;
  const double s2 = p.sigma * p.sigma;
  for (int dy = -7; dy <= 7; ++dy) {
    for (int dx = -7; dx <= 7; ++dx) {
      const double z2 = dx * dx + dy * dy;
      const Complex expect = kn * kn / s2 * std::exp(-kn * kn * z2 / (2 * s2)) *
                             (std::exp(Complex(0, kn * (std::cos(phi) * dx + std::sin(phi) * dy))) -
                              std::exp(-s2 / 2));
      EXPECT_NEAR(std::abs(k.at(dx, dy) - expect), 0.0, 1e-14) << dx << "," << dy;
    }
  }
}

TEST(MakeBank, DefaultHasFortyKernelsNuMajor) {
  const GaborBank bank(GaborParams{}, 33);
  ASSERT_EQ(bank.size(), 40u);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    EXPECT_EQ(bank[i].nu(), static_cast<int>(i / 8));
    EXPECT_EQ(bank[i].mu(), static_cast<int>(i % 8));
  }
}

TEST(MakeBank, DegenerateBankIsSingleKernel) {
  GaborParams p;
  p.n_scales = 1;
  p.n_orients = 1;
  const GaborBank bank(p, 33);
  ASSERT_EQ(bank.size(), 1u);
  EXPECT_EQ(bank[0].values(), make_kernel(p, 0, 0, 33).values());
}

TEST(MakeBank, DcFreeAt65) {
  const GaborBank bank(GaborParams{}, 65);
  for (const auto& k : bank) EXPECT_LT(std::abs(k.sum()) / k.l1_mass(), 1e-3);
}

TEST(MakeBank, DcFreeAtDefaultSize) {
  const GaborBank bank(GaborParams{}, 33);
  for (const auto& k : bank) EXPECT_LT(std::abs(k.sum()) / k.l1_mass(), 1e-12);
}

TEST(MakeBank, AnalyticCorrectionIsNotDcFreeWhenTruncated) {
  GaborParams p;
  p.dc = DcCorrection::Analytic;
  const auto k = make_kernel(p, 0, 4, 33);
  EXPECT_GT(std::abs(k.sum()) / k.l1_mass(), 1e-3);
}

TEST(Convolve, RejectsImageSmallerThanKernel) {
  const auto k = make_kernel(GaborParams{}, 0, 0, 33);
  EXPECT_THROW(convolve(Image(32, 40, 1.0), k), InvalidArgument);
  EXPECT_THROW(convolve(Image(40, 32, 1.0), k, ConvolutionMethod::Separable), InvalidArgument);
}

TEST(Convolve, ConstantImageIsAnnihilated) {
  const GaborBank bank(GaborParams{}, 33);
  const double c = 137.0;
  const Image img(92, 112, c);
  for (const auto& k : bank) {
    const auto out = convolve(img, k, ConvolutionMethod::Direct);
    EXPECT_LT(max_abs(out), 1e-6 * c * k.l1_mass());
  }
}

TEST(Convolve, ImpulseReproducesKernel) {
  const auto k = make_kernel(GaborParams{}, 3, 1, 9);
  Image img(21, 21, 0.0);
  img(10, 10) = 1.0;
  for (auto method : {ConvolutionMethod::Direct, ConvolutionMethod::Separable}) {
    const auto out = convolve(img, k, method);
    for (int dy = -4; dy <= 4; ++dy) {
      for (int dx = -4; dx <= 4; ++dx) {
        // out(c + d) = K(d): the true convolution of an impulse.
        EXPECT_NEAR(std::abs(out(10 + dx, 10 + dy) - k.at(dx, dy)), 0.0, 1e-15);
      }
    }
    EXPECT_EQ(std::abs(out(0, 0)), 0.0);
  }
}

TEST(Convolve, Linear) {
  const auto k = make_kernel(GaborParams{}, 5, 2, 33);
  const auto a = random_image(40, 44, 1);
  const auto b = random_image(40, 44, 2);
  Image mix(40, 44);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = 2.5 * a.values()[i] - 0.75 * b.values()[i];
  const auto ra = convolve(a, k), rb = convolve(b, k), rm = convolve(mix, k);
  for (std::size_t i = 0; i < rm.size(); ++i) {
    const Complex expect = 2.5 * ra.values()[i] - 0.75 * rb.values()[i];
    EXPECT_NEAR(std::abs(rm.values()[i] - expect), 0.0, 1e-9 * (1.0 + std::abs(expect)));
  }
}

TEST(Convolve, SeparableMatchesDirect) {
  const GaborBank bank(GaborParams{}, 33);
  const auto img = random_image(48, 52, 7);
  for (const auto& k : bank) {
    const auto d = convolve(img, k, ConvolutionMethod::Direct);
    const auto s = convolve(img, k, ConvolutionMethod::Separable);
    const double scale = max_abs(d);
    for (std::size_t i = 0; i < d.size(); ++i) {
      ASSERT_LE(std::abs(d.values()[i] - s.values()[i]), 1e-6 * scale);
    }
  }
}

TEST(Convolve, ReflectBoundaryMatchesExplicitPadding) {
  const auto k = make_kernel(GaborParams{}, 1, 0, 5);
  const auto img = random_image(7, 6, 3);
  const auto out = convolve(img, k);
  auto refl = [](long i, long n) { return i < 0 ? -i : (i >= n ? 2 * (n - 1) - i : i); };
  Complex expect{};
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      expect += k.at(dx, dy) * img(refl(0 - dx, 7), refl(0 - dy, 6));
    }
  }
  EXPECT_NEAR(std::abs(out(0, 0) - expect), 0.0, 1e-12);
}

TEST(Fuse, ZeroImageGivesZero) {
  const GaborBank bank(GaborParams{}, 33);
  const auto gf = fuse(Image(40, 40, 0.0), bank);
  for (double v : gf.pixels.values()) EXPECT_EQ(v, 0.0);
}

TEST(Fuse, SingleKernelEqualsItsL1Magnitude) {
  GaborParams p;
  p.n_scales = 1;
  p.n_orients = 1;
  const GaborBank bank(p, 33);
  const auto img = random_image(40, 40, 4);
  const auto gf = fuse(img, bank, {MagnitudeMode::L1, ConvolutionMethod::Direct});
  const auto m = magnitude(convolve(img, bank[0], ConvolutionMethod::Direct), MagnitudeMode::L1);
  EXPECT_EQ(gf.pixels, m);
}

TEST(Fuse, NonNegativeAndSameSize) {
  const GaborBank bank(GaborParams{}, 33);
  const auto gf = fuse(random_image(92, 112, 5), bank);
  EXPECT_EQ(gf.width(), 92u);
  EXPECT_EQ(gf.height(), 112u);
  for (double v : gf.pixels.values()) EXPECT_GE(v, 0.0);
}

TEST(Fuse, ConstantOffsetLeavesInteriorUnchanged) {
  const GaborBank bank(GaborParams{}, 33);
  const auto img = random_image(92, 112, 6);
  Image shifted = img;
  for (auto& v : shifted.values()) v += 50.0;
  const auto a = fuse(img, bank), b = fuse(shifted, bank);
  const std::size_t r = 16;
  for (std::size_t y = r; y + r < 112; ++y) {
    for (std::size_t x = r; x + r < 92; ++x) {
      ASSERT_LE(gphmm::testing::rel_diff(a(x, y), b(x, y)), 1e-6);
    }
  }
}

TEST(Fuse, PositivelyHomogeneous) {
  const GaborBank bank(GaborParams{}, 33);
  const auto img = random_image(60, 64, 8);
  const auto base = fuse(img, bank);
  for (double c : {2.0, 0.25}) {
    Image scaled = img;
    for (auto& v : scaled.values()) v *= c;
    const auto s = fuse(scaled, bank);
    for (std::size_t i = 0; i < s.pixels.size(); ++i) EXPECT_EQ(s.pixels.values()[i], c * base.pixels.values()[i]);
  }
  Image scaled = img;
  for (auto& v : scaled.values()) v *= 3.7;
  const auto s = fuse(scaled, bank);
  for (std::size_t i = 0; i < s.pixels.size(); ++i) {
    EXPECT_LE(gphmm::testing::rel_diff(s.pixels.values()[i], 3.7 * base.pixels.values()[i]), 1e-12);
  }
}

TEST(Fuse, ModulusNeverExceedsL1) {
  const GaborBank bank(GaborParams{}, 33);
  const auto img = random_image(40, 40, 9);
  const auto l1 = fuse(img, bank, {MagnitudeMode::L1});
  const auto mod = fuse(img, bank, {MagnitudeMode::Modulus});
  for (std::size_t i = 0; i < l1.pixels.size(); ++i) {
    EXPECT_LE(mod.pixels.values()[i], l1.pixels.values()[i] * (1 + 1e-12));
  }
}
