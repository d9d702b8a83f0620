#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "gphmm/classify.hpp"
#include "gphmm/evaluate.hpp"
#include "gphmm/gabor_bank.hpp"
#include "gphmm/image_io.hpp"
#include "gphmm/sampling.hpp"

namespace gphmm {

inline constexpr int kConfigVersion = 1;

struct GaborConfig {
  GaborParams params;
  int kernel_size = 33;
  MagnitudeMode magnitude = MagnitudeMode::L1;
  ConvolutionMethod method = ConvolutionMethod::Separable;
};

struct SamplingConfig {
  std::size_t block_k = 16;
  std::size_t overlap_p = 12;
  std::size_t strip_h = 16;
  ScanMode scan = ScanMode::Serpentine;
};

struct FeatureConfig {
  /// Fallback multiplier for blocks without informative pixels; 0 = block side.
  double fallback_scale = 0.0;
};

enum class HmmMode {
  Shared,    // one model for all classes, images represented by Viterbi paths
  PerClass,  // one model per class, maximum-likelihood decision
};

struct HmmConfig {
  std::size_t n_states = 7;
  std::size_t max_iters = 100;
  double tol = 1e-4;
  double var_floor_rel = 1e-6;
  HmmMode mode = HmmMode::Shared;
};

struct ClassifyConfig {
  DistanceMeasure measure = DistanceMeasure::Mahalanobis;
  CovarianceMode covariance = CovarianceMode::Diagonal;
  double ridge = 1e-3;
  double var_floor = kPathVarianceFloor;
};

struct EvalConfig {
  /// tau = tau_scale * percentile of training self-class distances, unless `tau` is set.
  double tau_percentile = 100.0;
  double tau_scale = 1.0;
  std::optional<double> tau;
  NegativeRule negative_rule = NegativeRule::AnyClass;
};

/// Every tunable of a run. Persisted as JSON; see README for the schema.
struct RunConfig {
  ImageSize image;
  GaborConfig gabor;
  SamplingConfig sampling;
  FeatureConfig features;
  HmmConfig hmm;
  ClassifyConfig classify;
  EvalConfig eval;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument when a value violates a consuming module's preconditions.
  void validate() const;
};

std::string_view to_string(ScanMode m);
ScanMode parse_scan_mode(std::string_view name);
std::string_view to_string(HmmMode m);
HmmMode parse_hmm_mode(std::string_view name);

/// Canonical JSON text (sorted keys, 2-space indent, trailing newline).
std::string config_to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(std::string_view text, const std::string& name = "config");
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& config);

/// Stable hash of every parameter that shapes observation sequences
/// (image size, Gabor, sampling and feature settings).
std::uint64_t feature_fingerprint(const RunConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace gphmm
