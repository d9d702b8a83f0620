#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gphmm {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Exact non-negative rational num / den with den > 0.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  /// Percentage rounded half-up to `decimals` places using integer arithmetic.
  std::string percent(int decimals = 2) const;
  /// Percentage truncated toward zero to `decimals` places.
  std::string percent_truncated(int decimals = 2) const;
  bool operator==(const Ratio&) const = default;
};

/// A ratio whose denominator is zero is absent, never zero.
struct Metrics {
  std::optional<Ratio> sensitivity;
  std::optional<Ratio> specificity;
  std::optional<Ratio> fpr;
  std::optional<Ratio> fnr;
  std::optional<Ratio> accuracy;
  /// (sensitivity + specificity) / 2, present when both are.
  std::optional<Ratio> balanced_accuracy;
};

Metrics compute_metrics(const ConfusionCounts& counts);

enum class ProbeRole { Train, Positive, Negative };

std::string_view to_string(ProbeRole role);
ProbeRole parse_probe_role(std::string_view name);

/// How a negative probe is accepted (and so counted as a false positive).
enum class NegativeRule {
  AnyClass,      // some class mean lies within tau
  ClaimedClass,  // the class the probe is listed under lies within tau
};

std::string_view to_string(NegativeRule rule);
NegativeRule parse_negative_rule(std::string_view name);

/// Scores of one probe against every class, as produced by the classifier.
struct ProbeOutcome {
  std::string id;
  ProbeRole role = ProbeRole::Positive;
  /// Index of the class the probe belongs to (positive) or is listed under (negative).
  std::size_t class_index = 0;
  std::vector<double> scores;

  std::size_t best() const;
};

enum class Decision { TruePositive, FalseNegative, FalsePositive, TrueNegative };

std::string_view to_string(Decision d);

/// Accept/reject decision for one probe at threshold tau:
/// a positive probe is TP iff its best class is its own class and that score is <= tau;
/// a negative probe is FP iff the rule finds a class score <= tau.
Decision decide(const ProbeOutcome& probe, double tau, NegativeRule rule = NegativeRule::AnyClass);

ConfusionCounts tally(std::span<const ProbeOutcome> probes, double tau,
                      NegativeRule rule = NegativeRule::AnyClass);

/// Nearest-rank percentile of `distances` (percentile in (0, 100]; 100 = max).
double calibrate_tau(std::span<const double> distances, double percentile = 100.0);

/// Fraction of positive probes whose best class is their own, regardless of tau.
std::optional<Ratio> rank1_accuracy(std::span<const ProbeOutcome> probes);

struct EvalReport {
  ConfusionCounts counts;
  Metrics metrics;
  std::optional<Ratio> rank1;
  double tau = 0.0;
  std::vector<std::string> class_ids;
  std::map<std::string, ConfusionCounts> per_class;
  std::vector<ProbeOutcome> probes;
  std::vector<Decision> decisions;
};

EvalReport build_report(std::vector<std::string> class_ids, std::vector<ProbeOutcome> probes,
                        double tau, NegativeRule rule);

/// Plain-text confusion table with the derived rates, in the layout
/// Positive/Negative x Positive/Negative followed by the metric lines.
std::string render_table(const EvalReport& report, std::string_view title = "test");

}  // namespace gphmm
