#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gphmm/artifacts.hpp"
#include "gphmm/config.hpp"
#include "gphmm/features.hpp"
#include "gphmm/gabor_bank.hpp"
#include "gphmm/manifest.hpp"
#include "gphmm/sampling.hpp"

namespace gphmm {

/// Everything derived from a RunConfig that is reused across images.
class FeatureExtractor {
public:
  explicit FeatureExtractor(const RunConfig& config);

  const RunConfig& config() const { return config_; }
  const GaborBank& bank() const { return bank_; }
  const SamplingPlan& plan() const { return plan_; }
  const std::vector<std::size_t>& order() const { return order_; }
  std::uint64_t fingerprint() const { return fingerprint_; }

  FeatureImage feature_image(const Image& image) const;
  ObservationSequence sequence(const FeatureImage& gf, std::string source_id = {}) const;
  ObservationSequence sequence_for_file(const std::filesystem::path& path) const;

private:
  RunConfig config_;
  GaborBank bank_;
  SamplingPlan plan_;
  std::vector<std::size_t> order_;
  std::uint64_t fingerprint_;
};

/// Training outputs: the HMM(s) and, in shared mode, the nearest-mean classifier.
struct TrainedSystem {
  ModelBundle models;
  std::optional<ClassifierState> classifier;
  std::vector<std::string> class_ids;
  /// Distance of every training image to its own class (the tau calibration set).
  std::vector<double> self_scores;
  std::vector<std::string> warnings;
};

struct LabeledSequence {
  ObservationSequence sequence;
  std::size_t class_index = 0;
};

/// Trains on labeled sequences according to `config.hmm.mode`.
TrainedSystem train_system(const std::vector<LabeledSequence>& train,
                           std::vector<std::string> class_ids, const RunConfig& config,
                           std::uint64_t fingerprint);

/// Scores of one sequence against every class (smaller = closer).
std::vector<double> score_sequence(const TrainedSystem& system, const ObservationSequence& seq);

/// Resolves tau from the config and the training self-scores.
double resolve_tau(const TrainedSystem& system, const RunConfig& config);

struct PipelineArtifacts {
  std::vector<ObservationSequence> sequences;  // manifest order
  TrainedSystem system;
  EvalReport report;
  std::string report_json;
};

/// Full protocol: extract every manifest image, train on the train entries,
/// score every probe and tally decisions at the calibrated tau. When
/// `out_dir` is set the model, classifier, report, probe audit CSV, tau
/// sweep CSV and sequences are written there. Stage failures are rethrown
/// with the stage name and the input id.
PipelineArtifacts run_pipeline(const Manifest& manifest, const RunConfig& config,
                               const std::optional<std::filesystem::path>& out_dir = std::nullopt);

inline EvalReport run_protocol(const Manifest& manifest, const RunConfig& config) {
  return run_pipeline(manifest, config).report;
}

}  // namespace gphmm
