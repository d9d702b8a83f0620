#include "gphmm/gabor_bank.hpp"

#include <cmath>
#include <string>

namespace gphmm {

namespace {

// Reflect-101 index mapping (the edge sample is not repeated).
std::size_t reflect(long i, long n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return static_cast<std::size_t>(i);
}

void check_fits(const Image& image, const ComplexKernel& kernel) {
  if (kernel.width() <= 0) throw InvalidArgument("convolve: empty kernel");
  if (image.width() < static_cast<std::size_t>(kernel.width()) ||
      image.height() < static_cast<std::size_t>(kernel.height())) {
    throw InvalidArgument("convolve: image (" + std::to_string(image.width()) + "x" +
                          std::to_string(image.height()) + ") is smaller than the kernel (" +
                          std::to_string(kernel.width()) + "x" + std::to_string(kernel.height()) +
                          ")");
  }
}

ComplexGrid convolve_direct(const Image& image, const ComplexKernel& kernel) {
  const long w = static_cast<long>(image.width());
  const long h = static_cast<long>(image.height());
  const int r = kernel.radius();
  ComplexGrid out(image.width(), image.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double re = 0.0;
      double im = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const auto src = image.row(reflect(y - dy, h));
        for (int dx = -r; dx <= r; ++dx) {
          const double v = src[reflect(x - dx, w)];
          const Complex k = kernel.at(dx, dy);
          re += k.real() * v;
          im += k.imag() * v;
        }
      }
      out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = {re, im};
    }
  }
  return out;
}

ComplexGrid convolve_separable(const Image& image, const ComplexKernel& kernel) {
  const long w = static_cast<long>(image.width());
  const long h = static_cast<long>(image.height());
  const int r = kernel.radius();
  const long ph = h + 2 * r;
  const auto& wx = kernel.wave_x();
  const auto& wy = kernel.wave_y();
  const auto& env = kernel.envelope();

  // Horizontal pass over every padded row: rows yy correspond to y = yy - r.
  Grid<Complex> wave_rows(image.width(), static_cast<std::size_t>(ph));
  Grid<double> env_rows(image.width(), static_cast<std::size_t>(ph));
  for (long yy = 0; yy < ph; ++yy) {
    const auto src = image.row(reflect(yy - r, h));
    for (long x = 0; x < w; ++x) {
      Complex acc_w{};
      double acc_e = 0.0;
      for (int dx = -r; dx <= r; ++dx) {
        const double v = src[reflect(x - dx, w)];
        acc_w += wx[static_cast<std::size_t>(dx + r)] * v;
        acc_e += env[static_cast<std::size_t>(dx + r)] * v;
      }
      wave_rows(static_cast<std::size_t>(x), static_cast<std::size_t>(yy)) = acc_w;
      env_rows(static_cast<std::size_t>(x), static_cast<std::size_t>(yy)) = acc_e;
    }
  }

  ComplexGrid out(image.width(), image.height());
  const double amp = kernel.amplitude();
  const double dc = kernel.dc_term();
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      Complex acc_w{};
      double acc_e = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const auto yy = static_cast<std::size_t>(y - dy + r);
        acc_w += wy[static_cast<std::size_t>(dy + r)] * wave_rows(static_cast<std::size_t>(x), yy);
        acc_e += env[static_cast<std::size_t>(dy + r)] * env_rows(static_cast<std::size_t>(x), yy);
      }
      out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = amp * (acc_w - dc * acc_e);
    }
  }
  return out;
}

}  // namespace

void GaborParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("gabor: sigma must be > 0");
  if (!(k_max > 0.0) || !std::isfinite(k_max)) throw InvalidArgument("gabor: k_max must be > 0");
  if (!(f > 1.0) || !std::isfinite(f)) throw InvalidArgument("gabor: f must be > 1");
  if (n_scales < 1) throw InvalidArgument("gabor: n_scales must be >= 1");
  if (n_orients < 1) throw InvalidArgument("gabor: n_orients must be >= 1");
}

double GaborParams::wave_number(int nu) const { return k_max / std::pow(f, nu); }

double GaborParams::orientation(int mu) const {
  return std::numbers::pi * static_cast<double>(mu) / static_cast<double>(n_orients);
}

Complex ComplexKernel::sum() const {
  Complex s{};
  for (const auto& v : values_) s += v;
  return s;
}

double ComplexKernel::l1_mass() const {
  double s = 0.0;
  for (const auto& v : values_) s += std::abs(v.real()) + std::abs(v.imag());
  return s;
}

ComplexKernel make_kernel(const GaborParams& params, int mu, int nu, int size) {
  params.validate();
  if (mu < 0 || mu >= params.n_orients) {
    throw InvalidArgument("make_kernel: mu=" + std::to_string(mu) + " outside [0, " +
                          std::to_string(params.n_orients) + ")");
  }
  if (nu < 0 || nu >= params.n_scales) {
    throw InvalidArgument("make_kernel: nu=" + std::to_string(nu) + " outside [0, " +
                          std::to_string(params.n_scales) + ")");
  }
  if (size < 3 || size % 2 == 0) {
    throw InvalidArgument("make_kernel: size must be odd and >= 3, got " + std::to_string(size));
  }

  const double k = params.wave_number(nu);
  const double phi = params.orientation(mu);
  const double kx = k * std::cos(phi);
  const double ky = k * std::sin(phi);
  const double s2 = params.sigma * params.sigma;
  const int r = size / 2;

  ComplexKernel kernel;
  kernel.size_ = size;
  kernel.mu_ = mu;
  kernel.nu_ = nu;
  kernel.amplitude_ = k * k / s2;
  kernel.envelope_.resize(static_cast<std::size_t>(size));
  kernel.wave_x_.resize(static_cast<std::size_t>(size));
  kernel.wave_y_.resize(static_cast<std::size_t>(size));
  for (int d = -r; d <= r; ++d) {
    const auto i = static_cast<std::size_t>(d + r);
    const double g = std::exp(-k * k * d * d / (2.0 * s2));
    kernel.envelope_[i] = g;
    kernel.wave_x_[i] = g * std::polar(1.0, kx * d);
    kernel.wave_y_[i] = g * std::polar(1.0, ky * d);
  }

  if (params.dc == DcCorrection::Analytic) {
    kernel.dc_term_ = std::exp(-s2 / 2.0);
  } else {
    // The support is symmetric, so the sine parts cancel and the ratio is real.
    Complex sx{}, sy{};
    double se = 0.0;
    for (std::size_t i = 0; i < kernel.envelope_.size(); ++i) {
      sx += kernel.wave_x_[i];
      sy += kernel.wave_y_[i];
      se += kernel.envelope_[i];
    }
    kernel.dc_term_ = (sx * sy).real() / (se * se);
  }

  kernel.values_.resize(static_cast<std::size_t>(size) * static_cast<std::size_t>(size));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double z2 = static_cast<double>(dx * dx + dy * dy);
      const double env = kernel.amplitude_ * std::exp(-k * k * z2 / (2.0 * s2));
      const Complex carrier = std::polar(1.0, kx * dx + ky * dy) - kernel.dc_term_;
      kernel.values_[static_cast<std::size_t>((dy + r) * size + (dx + r))] = env * carrier;
    }
  }
  return kernel;
}

GaborBank::GaborBank(const GaborParams& params, int size) : params_(params), size_(size) {
  params_.validate();
  kernels_.reserve(static_cast<std::size_t>(params_.n_scales * params_.n_orients));
  for (int nu = 0; nu < params_.n_scales; ++nu) {
    for (int mu = 0; mu < params_.n_orients; ++mu) {
      kernels_.push_back(make_kernel(params_, mu, nu, size));
    }
  }
}

ComplexGrid convolve(const Image& image, const ComplexKernel& kernel, ConvolutionMethod method) {
  check_fits(image, kernel);
  return method == ConvolutionMethod::Direct ? convolve_direct(image, kernel)
                                             : convolve_separable(image, kernel);
}

Image magnitude(const ComplexGrid& response, MagnitudeMode mode) {
  Image out(response.width(), response.height());
  auto dst = out.values();
  const auto src = response.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = mode == MagnitudeMode::L1 ? std::abs(src[i].real()) + std::abs(src[i].imag())
                                       : std::abs(src[i]);
  }
  return out;
}

FeatureImage fuse(const Image& image, const GaborBank& bank, const FuseOptions& options) {
  FeatureImage out{Image(image.width(), image.height(), 0.0)};
  auto acc = out.pixels.values();
  for (const auto& kernel : bank) {
    const auto response = convolve(image, kernel, options.method);
    const auto src = response.values();
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] += options.magnitude == MagnitudeMode::L1
                    ? std::abs(src[i].real()) + std::abs(src[i].imag())
                    : std::abs(src[i]);
    }
  }
  return out;
}

}  // namespace gphmm
