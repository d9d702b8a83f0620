#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gphmm/phmm.hpp"

namespace gphmm {

enum class DistanceMeasure { L1, L2, Mahalanobis, Cosine };

std::string_view to_string(DistanceMeasure m);
DistanceMeasure parse_distance_measure(std::string_view name);

enum class CovarianceMode { Diagonal, FullRidge };

std::string_view to_string(CovarianceMode m);
CovarianceMode parse_covariance_mode(std::string_view name);

/// Default floor applied to the pooled per-component variance.
inline constexpr double kPathVarianceFloor = 1e-6;

/// Distance between two equal-length vectors; smaller always means more similar.
///
///   L1           sum |x_t - y_t|
///   L2           (x - y)^t (x - y)
///   Mahalanobis  sum (x_t - y_t)^2 / var_t       (diagonal covariance)
///   Cosine       -x^t y / (|x| |y|)
double distance(std::span<const double> x, std::span<const double> y, DistanceMeasure measure,
                std::span<const double> pooled_var = {});

/// A decoded path embedded as a real vector.
std::vector<double> to_real(const PathVector& path);

struct ClassModel {
  std::string class_id;
  std::vector<double> mean_path;
  std::size_t n_train = 0;
  bool operator==(const ClassModel&) const = default;
};

struct ClassPaths {
  std::string class_id;
  std::vector<std::vector<double>> paths;
};

struct FitOptions {
  DistanceMeasure measure = DistanceMeasure::Mahalanobis;
  CovarianceMode covariance = CovarianceMode::Diagonal;
  double var_floor = kPathVarianceFloor;
  /// Added to the diagonal of the full covariance in FullRidge mode.
  double ridge = 1e-3;
};

struct Classification {
  std::size_t index = 0;
  std::string class_id;
  std::vector<double> scores;  // one per class, same order as ClassifierState::classes()
  double best_score() const { return scores[index]; }
};

/// Nearest-mean classifier over decoded paths.
class ClassifierState {
public:
  /// Assembles a state from stored parts; `covariance` is required (T x T,
  /// row-major) only in FullRidge mode.
  ClassifierState(std::vector<ClassModel> classes, std::vector<double> pooled_var,
                  DistanceMeasure measure, CovarianceMode covariance_mode = CovarianceMode::Diagonal,
                  std::vector<double> covariance = {}, double ridge = 0.0);

  const std::vector<ClassModel>& classes() const { return classes_; }
  const std::vector<double>& pooled_var() const { return pooled_var_; }
  DistanceMeasure measure() const { return measure_; }
  CovarianceMode covariance_mode() const { return covariance_mode_; }
  const std::vector<double>& covariance() const { return covariance_; }
  double ridge() const { return ridge_; }
  std::size_t path_length() const { return pooled_var_.size(); }

  /// Distance from `path` to the mean of class `k` under this state's measure.
  double score(std::span<const double> path, std::size_t k) const;
  /// Same with an explicit measure (used for reports comparing measures).
  double score(std::span<const double> path, std::size_t k, DistanceMeasure measure) const;

  ClassifierState with_measure(DistanceMeasure measure) const;

private:
  double full_mahalanobis(std::span<const double> x, std::span<const double> y) const;

  std::vector<ClassModel> classes_;
  std::vector<double> pooled_var_;
  DistanceMeasure measure_;
  CovarianceMode covariance_mode_;
  std::vector<double> covariance_;
  double ridge_;
  std::vector<double> cholesky_;  // lower factor of covariance + ridge * I
};

ClassifierState fit(std::span<const ClassPaths> classes, const FitOptions& options = {});

/// Nearest class mean; ties go to the smallest class index.
Classification classify(std::span<const double> path, const ClassifierState& state);
Classification classify(const PathVector& path, const ClassifierState& state);

}  // namespace gphmm
