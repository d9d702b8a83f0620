#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "gphmm/grid.hpp"

namespace gphmm {

using Complex = std::complex<double>;
using ComplexGrid = Grid<Complex>;

/// How the constant term that removes the kernel's DC response is computed.
///
/// `Analytic` subtracts exp(-sigma^2 / 2), which is exact only on an infinite
/// support. `Discrete` subtracts the ratio sum(G * e^{ik.z}) / sum(G) over the
/// actual (truncated) support so the kernel sums to zero.
enum class DcCorrection { Discrete, Analytic };

/// Per-pixel magnitude of a complex response.
enum class MagnitudeMode { L1, Modulus };

/// Convolution back-end. Both produce the same result within rounding.
enum class ConvolutionMethod { Direct, Separable };

struct GaborParams {
  double sigma = 2.0 * std::numbers::pi;
  double k_max = std::numbers::pi / 2.0;
  double f = std::numbers::sqrt2;
  int n_scales = 5;
  int n_orients = 8;
  DcCorrection dc = DcCorrection::Discrete;

  void validate() const;

  /// k_nu = k_max / f^nu.
  double wave_number(int nu) const;
  /// phi_mu = pi * mu / n_orients.
  double orientation(int mu) const;
};

/// Square complex kernel of odd side, centered on the middle element.
///
/// The kernel is stored densely and also as its rank-2 separable form
///   K(x, y) = amplitude * (wave_x[x] * wave_y[y] - dc_term * envelope[x] * envelope[y])
/// which the separable convolution path uses.
class ComplexKernel {
public:
  ComplexKernel() = default;

  int width() const { return size_; }
  int height() const { return size_; }
  int radius() const { return size_ / 2; }
  int mu() const { return mu_; }
  int nu() const { return nu_; }

  /// Value at offset (dx, dy) from the center, dx, dy in [-radius, radius].
  Complex at(int dx, int dy) const {
    return values_[static_cast<std::size_t>((dy + radius()) * size_ + (dx + radius()))];
  }
  const std::vector<Complex>& values() const { return values_; }

  Complex sum() const;
  /// Sum over elements of |Re| + |Im|.
  double l1_mass() const;

  double amplitude() const { return amplitude_; }
  double dc_term() const { return dc_term_; }
  const std::vector<Complex>& wave_x() const { return wave_x_; }
  const std::vector<Complex>& wave_y() const { return wave_y_; }
  const std::vector<double>& envelope() const { return envelope_; }

  friend ComplexKernel make_kernel(const GaborParams&, int, int, int);

private:
  int size_ = 0;
  int mu_ = 0;
  int nu_ = 0;
  double amplitude_ = 0.0;
  double dc_term_ = 0.0;
  std::vector<Complex> values_;
  std::vector<Complex> wave_x_;
  std::vector<Complex> wave_y_;
  std::vector<double> envelope_;
};

/// Gabor wavelet of orientation `mu` and scale `nu` sampled on a size x size grid.
ComplexKernel make_kernel(const GaborParams& params, int mu, int nu, int size);

/// The full bank, ordered scale-major: index = nu * n_orients + mu.
class GaborBank {
public:
  GaborBank(const GaborParams& params, int size);

  const GaborParams& params() const { return params_; }
  int kernel_size() const { return size_; }
  std::size_t size() const { return kernels_.size(); }
  const ComplexKernel& operator[](std::size_t i) const { return kernels_[i]; }
  const ComplexKernel& kernel(int mu, int nu) const {
    return kernels_[static_cast<std::size_t>(nu * params_.n_orients + mu)];
  }
  auto begin() const { return kernels_.begin(); }
  auto end() const { return kernels_.end(); }

private:
  GaborParams params_;
  int size_;
  std::vector<ComplexKernel> kernels_;
};

inline GaborBank make_bank(const GaborParams& params, int size) { return GaborBank(params, size); }

/// Fused Gabor magnitude image: per-pixel sum of response magnitudes over the bank.
struct FeatureImage {
  Image pixels;

  std::size_t width() const { return pixels.width(); }
  std::size_t height() const { return pixels.height(); }
  double operator()(std::size_t x, std::size_t y) const { return pixels(x, y); }
  bool operator==(const FeatureImage&) const = default;
};

/// Same-size 2D convolution with reflect-101 boundary handling:
///   out(x, y) = sum_{dx, dy} K(dx, dy) * I(x - dx, y - dy).
ComplexGrid convolve(const Image& image, const ComplexKernel& kernel,
                     ConvolutionMethod method = ConvolutionMethod::Direct);

struct FuseOptions {
  MagnitudeMode magnitude = MagnitudeMode::L1;
  ConvolutionMethod method = ConvolutionMethod::Separable;
};

/// Adds the magnitude of every bank response pixelwise. Responses are
/// accumulated in bank order, so the result does not depend on scheduling.
FeatureImage fuse(const Image& image, const GaborBank& bank, const FuseOptions& options = {});

/// Magnitude of each pixel of a single response.
Image magnitude(const ComplexGrid& response, MagnitudeMode mode);

}  // namespace gphmm
