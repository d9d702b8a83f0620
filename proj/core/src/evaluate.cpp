#include "gphmm/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "gphmm/error.hpp"

namespace gphmm {

namespace {

using u128 = unsigned __int128;

std::string format_fixed(u128 scaled, int decimals) {
  std::string digits;
  do {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(scaled % 10)));
    scaled /= 10;
  } while (scaled > 0);
  if (decimals <= 0) return digits;
  while (digits.size() <= static_cast<std::size_t>(decimals)) digits.insert(digits.begin(), '0');
  digits.insert(digits.end() - decimals, '.');
  return digits;
}

u128 pow10(int n) {
  u128 p = 1;
  for (int i = 0; i < n; ++i) p *= 10;
  return p;
}

std::optional<Ratio> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return Ratio{num, den};
}

std::string pct(const std::optional<Ratio>& r) { return r ? r->percent(2) + "%" : "n/a"; }

}  // namespace

std::string Ratio::percent(int decimals) const {
  const u128 scaled = static_cast<u128>(num) * 100 * pow10(decimals);
  u128 q = scaled / den;
  if (2 * (scaled % den) >= den) ++q;
  return format_fixed(q, decimals);
}

std::string Ratio::percent_truncated(int decimals) const {
  const u128 scaled = static_cast<u128>(num) * 100 * pow10(decimals);
  return format_fixed(scaled / den, decimals);
}

Metrics compute_metrics(const ConfusionCounts& c) {
  Metrics m;
  m.sensitivity = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.fp + c.tn);
  m.fpr = ratio(c.fp, c.fp + c.tn);
  m.fnr = ratio(c.fn, c.tp + c.fn);
  m.accuracy = ratio(c.tp + c.tn, c.total());
  if (m.sensitivity && m.specificity) {
    const std::uint64_t pos = c.tp + c.fn;
    const std::uint64_t neg = c.fp + c.tn;
    m.balanced_accuracy = Ratio{c.tp * neg + c.tn * pos, 2 * pos * neg};
  }
  return m;
}

std::string_view to_string(ProbeRole role) {
  switch (role) {
    case ProbeRole::Train: return "train";
    case ProbeRole::Positive: return "probe_pos";
    case ProbeRole::Negative: return "probe_neg";
  }
  return "unknown";
}

ProbeRole parse_probe_role(std::string_view name) {
  if (name == "train") return ProbeRole::Train;
  if (name == "probe_pos") return ProbeRole::Positive;
  if (name == "probe_neg") return ProbeRole::Negative;
  throw DataError("unknown role '" + std::string(name) + "' (expected train, probe_pos or probe_neg)");
}

std::string_view to_string(NegativeRule rule) {
  return rule == NegativeRule::AnyClass ? "any_class" : "claimed_class";
}

NegativeRule parse_negative_rule(std::string_view name) {
  if (name == "any_class") return NegativeRule::AnyClass;
  if (name == "claimed_class") return NegativeRule::ClaimedClass;
  throw InvalidArgument("unknown negative rule '" + std::string(name) +
                        "' (expected any_class or claimed_class)");
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::TruePositive: return "TP";
    case Decision::FalseNegative: return "FN";
    case Decision::FalsePositive: return "FP";
    case Decision::TrueNegative: return "TN";
  }
  return "?";
}

std::size_t ProbeOutcome::best() const {
  if (scores.empty()) throw InvalidArgument("probe '" + id + "' has no scores");
  std::size_t k = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] < scores[k]) k = i;
  }
  return k;
}

Decision decide(const ProbeOutcome& probe, double tau, NegativeRule rule) {
  if (probe.class_index >= probe.scores.size()) {
    throw InvalidArgument("probe '" + probe.id + "' refers to an unknown class");
  }
  if (probe.role == ProbeRole::Positive) {
    const std::size_t k = probe.best();
    return k == probe.class_index && probe.scores[k] <= tau ? Decision::TruePositive
                                                            : Decision::FalseNegative;
  }
  if (probe.role == ProbeRole::Negative) {
    const bool accepted = rule == NegativeRule::AnyClass
                              ? probe.scores[probe.best()] <= tau
                              : probe.scores[probe.class_index] <= tau;
    return accepted ? Decision::FalsePositive : Decision::TrueNegative;
  }
  throw InvalidArgument("probe '" + probe.id + "' is a training entry");
}

namespace {

void count(ConfusionCounts& c, Decision d) {
  switch (d) {
    case Decision::TruePositive: ++c.tp; break;
    case Decision::FalseNegative: ++c.fn; break;
    case Decision::FalsePositive: ++c.fp; break;
    case Decision::TrueNegative: ++c.tn; break;
  }
}

}  // namespace

ConfusionCounts tally(std::span<const ProbeOutcome> probes, double tau, NegativeRule rule) {
  ConfusionCounts c;
  for (const auto& p : probes) count(c, decide(p, tau, rule));
  return c;
}

double calibrate_tau(std::span<const double> distances, double percentile) {
  if (distances.empty()) throw InvalidArgument("calibrate_tau: no training distances");
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw InvalidArgument("calibrate_tau: percentile must lie in (0, 100]");
  }
  std::vector<double> sorted(distances.begin(), distances.end());
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

std::optional<Ratio> rank1_accuracy(std::span<const ProbeOutcome> probes) {
  std::uint64_t hit = 0, total = 0;
  for (const auto& p : probes) {
    if (p.role != ProbeRole::Positive) continue;
    ++total;
    if (p.best() == p.class_index) ++hit;
  }
  return ratio(hit, total);
}

EvalReport build_report(std::vector<std::string> class_ids, std::vector<ProbeOutcome> probes,
                        double tau, NegativeRule rule) {
  EvalReport report;
  report.tau = tau;
  report.class_ids = std::move(class_ids);
  for (const auto& id : report.class_ids) report.per_class[id];
  report.decisions.reserve(probes.size());
  for (const auto& p : probes) {
    const Decision d = decide(p, tau, rule);
    report.decisions.push_back(d);
    count(report.counts, d);
    count(report.per_class[report.class_ids.at(p.class_index)], d);
  }
  report.metrics = compute_metrics(report.counts);
  report.rank1 = rank1_accuracy(probes);
  report.probes = std::move(probes);
  return report;
}

std::string render_table(const EvalReport& report, std::string_view title) {
  const auto& c = report.counts;
  const auto& m = report.metrics;
  std::ostringstream os;
  const int w = 22;
  os << "Total no. of classes=" << report.class_ids.size() << ", probes=" << c.total()
     << ", tau=" << std::setprecision(10) << report.tau << "\n";
  os << std::left << std::setw(w) << "" << std::setw(w) << "Positive" << std::setw(w) << "Negative"
     << "\n";
  os << std::setw(w) << (std::string(title) + " Positive") << std::setw(w)
     << ("(TP) = " + std::to_string(c.tp)) << std::setw(w) << ("(FP) = " + std::to_string(c.fp))
     << "\n";
  os << std::setw(w) << (std::string(title) + " Negative") << std::setw(w)
     << ("(FN) = " + std::to_string(c.fn)) << std::setw(w) << ("(TN) = " + std::to_string(c.tn))
     << "\n";
  os << "Sensitivity = TP / (TP + FN) = " << pct(m.sensitivity) << "\n";
  os << "Specificity = TN / (FP + TN) = " << pct(m.specificity) << "\n";
  os << "False positive rate = FP / (FP + TN) = " << pct(m.fpr) << "\n";
  os << "False negative rate = FN / (TP + FN) = " << pct(m.fnr) << "\n";
  os << "Accuracy = (TP + TN) / (TP + TN + FP + FN) = " << pct(m.accuracy) << "\n";
  os << "Rank-1 identification = " << pct(report.rank1) << "\n";
  return os.str();
}

}  // namespace gphmm
