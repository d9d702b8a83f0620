#include "gphmm/classify.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "gphmm/error.hpp"

namespace gphmm {

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InvalidArgument("distance: length mismatch (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
}

}  // namespace

std::string_view to_string(DistanceMeasure m) {
  switch (m) {
    case DistanceMeasure::L1: return "l1";
    case DistanceMeasure::L2: return "l2";
    case DistanceMeasure::Mahalanobis: return "mahalanobis";
    case DistanceMeasure::Cosine: return "cosine";
  }
  return "unknown";
}

DistanceMeasure parse_distance_measure(std::string_view name) {
  if (name == "l1") return DistanceMeasure::L1;
  if (name == "l2") return DistanceMeasure::L2;
  if (name == "mahalanobis") return DistanceMeasure::Mahalanobis;
  if (name == "cosine") return DistanceMeasure::Cosine;
  throw InvalidArgument("unknown distance measure '" + std::string(name) +
                        "' (expected l1, l2, mahalanobis or cosine)");
}

std::string_view to_string(CovarianceMode m) {
  return m == CovarianceMode::Diagonal ? "diagonal" : "full_ridge";
}

CovarianceMode parse_covariance_mode(std::string_view name) {
  if (name == "diagonal") return CovarianceMode::Diagonal;
  if (name == "full_ridge") return CovarianceMode::FullRidge;
  throw InvalidArgument("unknown covariance mode '" + std::string(name) +
                        "' (expected diagonal or full_ridge)");
}

double distance(std::span<const double> x, std::span<const double> y, DistanceMeasure measure,
                std::span<const double> pooled_var) {
  check_lengths(x, y);
  double acc = 0.0;
  switch (measure) {
    case DistanceMeasure::L1:
      for (std::size_t t = 0; t < x.size(); ++t) acc += std::abs(x[t] - y[t]);
      return acc;
    case DistanceMeasure::L2:
      for (std::size_t t = 0; t < x.size(); ++t) acc += (x[t] - y[t]) * (x[t] - y[t]);
      return acc;
    case DistanceMeasure::Mahalanobis:
      if (pooled_var.size() != x.size()) {
        throw InvalidArgument("distance: Mahalanobis needs a pooled variance of matching length");
      }
      for (std::size_t t = 0; t < x.size(); ++t) {
        acc += (x[t] - y[t]) * (x[t] - y[t]) / pooled_var[t];
      }
      return acc;
    case DistanceMeasure::Cosine: {
      double xx = 0.0, yy = 0.0;
      for (std::size_t t = 0; t < x.size(); ++t) {
        acc += x[t] * y[t];
        xx += x[t] * x[t];
        yy += y[t] * y[t];
      }
      if (xx == 0.0 || yy == 0.0) throw InvalidArgument("distance: cosine of a zero vector");
      return -acc / (std::sqrt(xx) * std::sqrt(yy));
    }
  }
  throw InvalidArgument("distance: unknown measure");
}

std::vector<double> to_real(const PathVector& path) {
  return {path.states.begin(), path.states.end()};
}

ClassifierState::ClassifierState(std::vector<ClassModel> classes, std::vector<double> pooled_var,
                                 DistanceMeasure measure, CovarianceMode covariance_mode,
                                 std::vector<double> covariance, double ridge)
    : classes_(std::move(classes)),
      pooled_var_(std::move(pooled_var)),
      measure_(measure),
      covariance_mode_(covariance_mode),
      covariance_(std::move(covariance)),
      ridge_(ridge) {
  if (classes_.empty()) throw InvalidArgument("ClassifierState: no classes");
  const std::size_t len = pooled_var_.size();
  for (const auto& c : classes_) {
    if (c.mean_path.size() != len) {
      throw InvalidArgument("ClassifierState: class '" + c.class_id +
                            "' mean path length differs from the pooled variance length");
    }
  }
  for (double v : pooled_var_) {
    if (!(v > 0.0)) throw InvalidArgument("ClassifierState: pooled variance must be positive");
  }
  if (covariance_mode_ == CovarianceMode::FullRidge) {
    if (covariance_.size() != len * len) {
      throw InvalidArgument("ClassifierState: full covariance must be T x T");
    }
    if (!(ridge_ > 0.0)) throw InvalidArgument("ClassifierState: ridge must be positive");
    const auto n = static_cast<Eigen::Index>(len);
    Eigen::MatrixXd m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                       Eigen::RowMajor>>(covariance_.data(), n, n);
    m.diagonal().array() += ridge_;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
      throw NumericError("ClassifierState: covariance + ridge is not positive definite");
    }
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> lower = llt.matrixL();
    cholesky_.assign(lower.data(), lower.data() + lower.size());
  }
}

double ClassifierState::full_mahalanobis(std::span<const double> x,
                                         std::span<const double> y) const {
  // Solve L z = (x - y) by forward substitution; the distance is |z|^2.
  const std::size_t n = x.size();
  std::vector<double> z(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i] - y[i];
    for (std::size_t j = 0; j < i; ++j) s -= cholesky_[i * n + j] * z[j];
    z[i] = s / cholesky_[i * n + i];
    acc += z[i] * z[i];
  }
  return acc;
}

double ClassifierState::score(std::span<const double> path, std::size_t k) const {
  return score(path, k, measure_);
}

double ClassifierState::score(std::span<const double> path, std::size_t k,
                              DistanceMeasure measure) const {
  if (path.size() != path_length()) {
    throw InvalidArgument("classify: path length " + std::to_string(path.size()) +
                          " differs from the trained length " + std::to_string(path_length()));
  }
  const auto& mean = classes_.at(k).mean_path;
  if (measure == DistanceMeasure::Mahalanobis && covariance_mode_ == CovarianceMode::FullRidge) {
    return full_mahalanobis(path, mean);
  }
  return distance(path, mean, measure, pooled_var_);
}

ClassifierState ClassifierState::with_measure(DistanceMeasure measure) const {
  ClassifierState copy = *this;
  copy.measure_ = measure;
  return copy;
}

ClassifierState fit(std::span<const ClassPaths> classes, const FitOptions& options) {
  if (classes.empty()) throw InvalidArgument("fit: no classes");
  if (!(options.var_floor > 0.0)) throw InvalidArgument("fit: variance floor must be positive");
  std::size_t len = 0;
  bool have_len = false;
  std::size_t total = 0;
  for (const auto& c : classes) {
    if (c.paths.empty()) throw InvalidArgument("fit: class '" + c.class_id + "' has no paths");
    for (const auto& p : c.paths) {
      if (!have_len) {
        len = p.size();
        have_len = true;
      }
      if (p.size() != len) {
        throw InvalidArgument("fit: class '" + c.class_id + "' has a path of length " +
                              std::to_string(p.size()) + ", expected " + std::to_string(len));
      }
      ++total;
    }
  }
  if (len == 0) throw InvalidArgument("fit: paths are empty");

  std::vector<ClassModel> models;
  models.reserve(classes.size());
  std::vector<double> grand(len, 0.0);
  for (const auto& c : classes) {
    ClassModel m{c.class_id, std::vector<double>(len, 0.0), c.paths.size()};
    for (const auto& p : c.paths) {
      for (std::size_t t = 0; t < len; ++t) {
        m.mean_path[t] += p[t];
        grand[t] += p[t];
      }
    }
    for (double& v : m.mean_path) v /= static_cast<double>(c.paths.size());
    models.push_back(std::move(m));
  }
  for (double& v : grand) v /= static_cast<double>(total);

  std::vector<double> var(len, 0.0);
  std::vector<double> cov;
  if (options.covariance == CovarianceMode::FullRidge) cov.assign(len * len, 0.0);
  for (const auto& c : classes) {
    for (const auto& p : c.paths) {
      for (std::size_t t = 0; t < len; ++t) {
        const double d = p[t] - grand[t];
        var[t] += d * d;
        if (!cov.empty()) {
          for (std::size_t u = 0; u < len; ++u) cov[t * len + u] += d * (p[u] - grand[u]);
        }
      }
    }
  }
  for (double& v : var) v = std::max(v / static_cast<double>(total), options.var_floor);
  for (double& v : cov) v /= static_cast<double>(total);

  return ClassifierState(std::move(models), std::move(var), options.measure, options.covariance,
                         std::move(cov), options.covariance == CovarianceMode::FullRidge ? options.ridge : 0.0);
}

Classification classify(std::span<const double> path, const ClassifierState& state) {
  Classification out;
  out.scores.reserve(state.classes().size());
  for (std::size_t k = 0; k < state.classes().size(); ++k) {
    out.scores.push_back(state.score(path, k));
    if (out.scores[k] < out.scores[out.index]) out.index = k;
  }
  out.class_id = state.classes()[out.index].class_id;
  return out;
}

Classification classify(const PathVector& path, const ClassifierState& state) {
  const auto real = to_real(path);
  return classify(real, state);
}

}  // namespace gphmm
