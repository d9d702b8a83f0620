#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gphmm/classify.hpp"
#include "gphmm/config.hpp"
#include "gphmm/evaluate.hpp"
#include "gphmm/phmm.hpp"

namespace gphmm {

inline constexpr int kModelVersion = 1;
inline constexpr int kClassifierVersion = 1;
inline constexpr int kReportVersion = 1;

/// Trained models: a single shared HMM, or one HMM per class.
struct ModelBundle {
  HmmMode mode = HmmMode::Shared;
  std::uint64_t fingerprint = 0;
  CyclicHMM shared;
  std::vector<std::pair<std::string, CyclicHMM>> per_class;
};

/// Shared-mode file:
///   {version, kind: "shared", n_states, trans (row-major), emit_mean, emit_var,
///    init, var_floor, fingerprint}
/// Per-class file: {version, kind: "per_class", fingerprint, classes: [{class_id, model}]}.
std::string encode_models(const ModelBundle& models);
/// When `expected_fingerprint` is given, a mismatch throws DataError.
ModelBundle decode_models(std::string_view text, const std::string& name,
                          std::optional<std::uint64_t> expected_fingerprint = std::nullopt);
void save_models(const std::filesystem::path& path, const ModelBundle& models);
ModelBundle load_models(const std::filesystem::path& path,
                        std::optional<std::uint64_t> expected_fingerprint = std::nullopt);

/// Classifier file: {version, fingerprint, model_digest, measure, covariance,
/// ridge, pooled_var, covariance_matrix?, classes: [{class_id, n_train, mean_path}]}.
/// `model_digest` is the FNV-1a hash of the model file it was fitted against.
std::string encode_classifier(const ClassifierState& state, std::uint64_t fingerprint,
                              std::uint64_t model_digest);
ClassifierState decode_classifier(std::string_view text, const std::string& name,
                                  std::optional<std::uint64_t> expected_fingerprint = std::nullopt,
                                  std::optional<std::uint64_t> expected_model_digest = std::nullopt);
void save_classifier(const std::filesystem::path& path, const ClassifierState& state,
                     std::uint64_t fingerprint, std::uint64_t model_digest);
ClassifierState load_classifier(const std::filesystem::path& path,
                                std::optional<std::uint64_t> expected_fingerprint = std::nullopt,
                                std::optional<std::uint64_t> expected_model_digest = std::nullopt);

/// Evaluation report as JSON; absent ratios are null. Echoes the run config.
std::string encode_report(const EvalReport& report, const RunConfig& config);

/// Per-probe audit CSV: id,role,class,predicted,best_score,decision.
std::string encode_probe_csv(const EvalReport& report);

/// Sensitivity/specificity at each threshold: tau,tp,fp,fn,tn,sensitivity,specificity.
std::string encode_tau_sweep_csv(const EvalReport& report, std::span<const double> taus,
                                 NegativeRule rule);

}  // namespace gphmm
