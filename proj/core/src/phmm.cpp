#include "gphmm/phmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "gphmm/error.hpp"

namespace gphmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kStochasticTol = 1e-9;
constexpr double kMinOccupancy = 1e-10;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

struct PooledStats {
  double mean = 0.0;
  double var = 0.0;
  std::size_t count = 0;
};

PooledStats pooled_stats(std::span<const SequenceView> sequences) {
  PooledStats s;
  double sum = 0.0;
  for (const auto& seq : sequences) {
    for (double o : seq) sum += o;
    s.count += seq.size();
  }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (const auto& seq : sequences) {
    for (double o : seq) ss += (o - s.mean) * (o - s.mean);
  }
  s.var = ss / static_cast<double>(s.count);
  return s;
}

std::vector<double> log_matrix(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), safe_log);
  return out;
}

// Per-sequence log emission table, row-major [t * n + i].
std::vector<double> emission_table(const CyclicHMM& hmm, SequenceView seq) {
  const std::size_t n = hmm.n_states();
  std::vector<double> b(seq.size() * n);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    for (std::size_t i = 0; i < n; ++i) b[t * n + i] = hmm.log_emission(i, seq[t]);
  }
  return b;
}

std::vector<double> forward_table(const CyclicHMM& hmm, const std::vector<double>& log_a,
                                  const std::vector<double>& log_b, std::size_t len) {
  const std::size_t n = hmm.n_states();
  std::vector<double> alpha(len * n, kNegInf);
  for (std::size_t i = 0; i < n; ++i) alpha[i] = safe_log(hmm.init()[i]) + log_b[i];
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = kNegInf;
      for (std::size_t i = 0; i < n; ++i) {
        if (log_a[i * n + j] == kNegInf) continue;
        acc = log_add(acc, alpha[(t - 1) * n + i] + log_a[i * n + j]);
      }
      alpha[t * n + j] = acc == kNegInf ? kNegInf : acc + log_b[t * n + j];
    }
  }
  return alpha;
}

std::vector<double> backward_table(std::size_t n, const std::vector<double>& log_a,
                                   const std::vector<double>& log_b, std::size_t len) {
  std::vector<double> beta(len * n, kNegInf);
  for (std::size_t i = 0; i < n; ++i) beta[(len - 1) * n + i] = 0.0;
  for (std::size_t t = len - 1; t-- > 0;) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = kNegInf;
      for (std::size_t j = 0; j < n; ++j) {
        if (log_a[i * n + j] == kNegInf) continue;
        acc = log_add(acc, log_a[i * n + j] + log_b[(t + 1) * n + j] + beta[(t + 1) * n + j]);
      }
      beta[t * n + i] = acc;
    }
  }
  return beta;
}

double total_from_alpha(const std::vector<double>& alpha, std::size_t n, std::size_t len) {
  double ll = kNegInf;
  for (std::size_t i = 0; i < n; ++i) ll = log_add(ll, alpha[(len - 1) * n + i]);
  return ll;
}

// Expected sufficient statistics accumulated over all training sequences.
struct Accumulator {
  explicit Accumulator(const CyclicHMM& hmm)
      : n(hmm.n_states()),
        shift(hmm.emit_mean()),
        init(n, 0.0),
        xi(n * n, 0.0),
        occ(n, 0.0),
        s1(n, 0.0),
        s2(n, 0.0) {}

  std::size_t n;
  std::vector<double> shift;  // emission sums are taken around the current means
  std::vector<double> init;
  std::vector<double> xi;
  std::vector<double> occ;
  std::vector<double> s1;
  std::vector<double> s2;
  double log_likelihood = 0.0;
  std::size_t n_sequences = 0;
};

void accumulate(const CyclicHMM& hmm, const std::vector<double>& log_a, SequenceView seq,
                Accumulator& acc) {
  const std::size_t n = hmm.n_states();
  const std::size_t len = seq.size();
  const auto log_b = emission_table(hmm, seq);
  const auto alpha = forward_table(hmm, log_a, log_b, len);
  const auto beta = backward_table(n, log_a, log_b, len);
  const double ll = total_from_alpha(alpha, n, len);
  if (!std::isfinite(ll)) throw NumericError("baum_welch: sequence has zero likelihood under the model");
  acc.log_likelihood += ll;
  ++acc.n_sequences;

  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double g = std::exp(alpha[t * n + i] + beta[t * n + i] - ll);
      if (t == 0) acc.init[i] += g;
      const double d = seq[t] - acc.shift[i];
      acc.occ[i] += g;
      acc.s1[i] += g * d;
      acc.s2[i] += g * d * d;
    }
    if (t + 1 == len) break;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (log_a[i * n + j] == kNegInf) continue;
        acc.xi[i * n + j] += std::exp(alpha[t * n + i] + log_a[i * n + j] +
                                      log_b[(t + 1) * n + j] + beta[(t + 1) * n + j] - ll);
      }
    }
  }
}

Accumulator expectation(const CyclicHMM& hmm, std::span<const SequenceView> sequences) {
  Accumulator acc(hmm);
  const auto log_a = log_matrix(hmm.transitions());
  for (const auto& seq : sequences) accumulate(hmm, log_a, seq, acc);
  return acc;
}

CyclicHMM maximization(const CyclicHMM& hmm, const Accumulator& acc, const PooledStats& pooled,
                       std::mt19937_64& rng, std::span<const SequenceView> sequences,
                       std::size_t iteration, std::vector<std::string>& warnings) {
  const std::size_t n = hmm.n_states();
  const double floor = hmm.var_floor();

  std::vector<double> init(n);
  // Normalised by the sum rather than the sequence count so rounding cannot push it past 1.
  double init_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) init_total += acc.init[i];
  for (std::size_t i = 0; i < n; ++i) init[i] = acc.init[i] / init_total;

  std::vector<double> trans(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += acc.xi[i * n + j];
    for (std::size_t j = 0; j < n; ++j) {
      if (!CyclicHMM::allowed(n, i, j)) continue;
      trans[i * n + j] = row > 0.0 ? acc.xi[i * n + j] / row : hmm.trans(i, j);
    }
  }

  std::vector<double> mean(n), var(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (acc.occ[i] < kMinOccupancy) {
      // Re-seed from the pooled data: a random observation as the mean, the pooled variance.
      std::uniform_int_distribution<std::size_t> pick(0, pooled.count - 1);
      std::size_t k = pick(rng);
      double value = pooled.mean;
      for (const auto& seq : sequences) {
        if (k < seq.size()) {
          value = seq[k];
          break;
        }
        k -= seq.size();
      }
      mean[i] = value;
      var[i] = std::max(pooled.var, floor);
      warnings.push_back("baum_welch: iteration " + std::to_string(iteration) + ": state " +
                         std::to_string(i) + " lost all posterior mass; re-seeded its emission");
      continue;
    }
    const double d = acc.s1[i] / acc.occ[i];
    mean[i] = acc.shift[i] + d;
    var[i] = std::max(acc.s2[i] / acc.occ[i] - d * d, floor);
  }
  return CyclicHMM(n, std::move(trans), std::move(mean), std::move(var), std::move(init), floor);
}

void check_sequence(SequenceView seq, const char* where) {
  if (seq.empty()) throw InvalidArgument(std::string(where) + ": empty observation sequence");
}

}  // namespace

CyclicHMM::CyclicHMM(std::size_t n_states, std::vector<double> trans, std::vector<double> emit_mean,
                     std::vector<double> emit_var, std::vector<double> init, double var_floor)
    : n_(n_states),
      trans_(std::move(trans)),
      mean_(std::move(emit_mean)),
      var_(std::move(emit_var)),
      init_(std::move(init)),
      var_floor_(var_floor) {
  if (n_ == 0) throw InvalidArgument("CyclicHMM: n_states must be >= 1");
  if (trans_.size() != n_ * n_ || mean_.size() != n_ || var_.size() != n_ || init_.size() != n_) {
    throw InvalidArgument("CyclicHMM: parameter sizes do not match n_states");
  }
  if (!(var_floor_ > 0.0) || !std::isfinite(var_floor_)) {
    throw InvalidArgument("CyclicHMM: variance floor must be positive");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      const double a = trans_[i * n_ + j];
      if (!(a >= 0.0 && a <= 1.0)) {
        throw InvalidArgument("CyclicHMM: transition probability outside [0, 1]");
      }
      if (!allowed(n_, i, j) && a != 0.0) {
        throw InvalidArgument("CyclicHMM: transition " + std::to_string(i) + "->" +
                              std::to_string(j) + " violates the cyclic mask");
      }
      row += a;
    }
    if (std::abs(row - 1.0) > kStochasticTol) {
      throw InvalidArgument("CyclicHMM: transition row " + std::to_string(i) + " sums to " +
                            std::to_string(row));
    }
    if (!std::isfinite(mean_[i])) throw InvalidArgument("CyclicHMM: non-finite emission mean");
    if (!(var_[i] >= var_floor_) || !std::isfinite(var_[i])) {
      throw InvalidArgument("CyclicHMM: emission variance below the floor");
    }
  }
  double total = 0.0;
  for (double p : init_) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("CyclicHMM: init probability outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > kStochasticTol) {
    throw InvalidArgument("CyclicHMM: initial distribution does not sum to 1");
  }
}

double CyclicHMM::log_emission(std::size_t i, double o) const {
  const double d = o - mean_[i];
  return -0.5 * (std::log(2.0 * std::numbers::pi * var_[i]) + d * d / var_[i]);
}

CyclicHMM init_model(std::size_t n_states, std::span<const SequenceView> sequences,
                     const InitOptions& options) {
  if (n_states == 0) throw InvalidArgument("init_model: n_states must be >= 1");
  if (sequences.empty()) throw InvalidArgument("init_model: no training sequences");
  for (const auto& seq : sequences) {
    if (seq.size() < n_states) {
      throw InvalidArgument("init_model: sequence of length " + std::to_string(seq.size()) +
                            " is shorter than n_states = " + std::to_string(n_states));
    }
  }
  const auto pooled = pooled_stats(sequences);
  const double floor = pooled.var > 0.0 ? options.var_floor_rel * pooled.var : options.var_floor_rel;

  const std::size_t n = n_states;
  std::vector<double> trans(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (n == 1) {
      trans[0] = 1.0;
    } else {
      trans[i * n + i] = 0.5;
      trans[i * n + (i + 1) % n] = 0.5;
    }
  }
  std::vector<double> init(n, 0.0);
  init[0] = 1.0;

  // Chunk c of a length-T sequence covers [c*T/N, (c+1)*T/N).
  std::vector<double> sum(n, 0.0), count(n, 0.0);
  for (const auto& seq : sequences) {
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t lo = c * seq.size() / n;
      const std::size_t hi = (c + 1) * seq.size() / n;
      for (std::size_t t = lo; t < hi; ++t) sum[c] += seq[t];
      count[c] += static_cast<double>(hi - lo);
    }
  }
  std::vector<double> mean(n), var(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) mean[c] = sum[c] / count[c];
  for (const auto& seq : sequences) {
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t lo = c * seq.size() / n;
      const std::size_t hi = (c + 1) * seq.size() / n;
      for (std::size_t t = lo; t < hi; ++t) var[c] += (seq[t] - mean[c]) * (seq[t] - mean[c]);
    }
  }
  for (std::size_t c = 0; c < n; ++c) var[c] = std::max(var[c] / count[c], floor);

  return CyclicHMM(n, std::move(trans), std::move(mean), std::move(var), std::move(init), floor);
}

double forward_log_likelihood(const CyclicHMM& hmm, SequenceView seq) {
  check_sequence(seq, "forward_log_likelihood");
  const auto log_b = emission_table(hmm, seq);
  const auto alpha = forward_table(hmm, log_matrix(hmm.transitions()), log_b, seq.size());
  return total_from_alpha(alpha, hmm.n_states(), seq.size());
}

BaumWelchResult baum_welch(const CyclicHMM& hmm, std::span<const SequenceView> sequences,
                           const BaumWelchOptions& options) {
  if (sequences.empty()) throw InvalidArgument("baum_welch: no training sequences");
  for (const auto& seq : sequences) check_sequence(seq, "baum_welch");

  const auto pooled = pooled_stats(sequences);
  std::mt19937_64 rng(options.seed);

  BaumWelchResult result;
  result.model = hmm;
  auto acc = expectation(result.model, sequences);
  result.log_likelihood.push_back(acc.log_likelihood);

  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    result.model = maximization(result.model, acc, pooled, rng, sequences, it, result.warnings);
    const double previous = acc.log_likelihood;
    acc = expectation(result.model, sequences);
    result.log_likelihood.push_back(acc.log_likelihood);
    result.iterations = it;
    if (options.on_iteration) options.on_iteration(it, result.model, acc.log_likelihood);
    if (acc.log_likelihood - previous < options.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

PathVector viterbi(const CyclicHMM& hmm, SequenceView seq) {
  check_sequence(seq, "viterbi");
  const std::size_t n = hmm.n_states();
  const std::size_t len = seq.size();
  const auto log_a = log_matrix(hmm.transitions());
  const auto log_b = emission_table(hmm, seq);

  std::vector<double> delta(n);
  std::vector<double> next(n);
  std::vector<std::size_t> back(len * n, 0);
  for (std::size_t i = 0; i < n; ++i) delta[i] = safe_log(hmm.init()[i]) + log_b[i];
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = delta[i] + log_a[i * n + j];
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      next[j] = best + log_b[t * n + j];
      back[t * n + j] = arg;
    }
    std::swap(delta, next);
  }

  std::size_t state = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (delta[i] > delta[state]) state = i;
  }
  if (delta[state] == kNegInf || std::isnan(delta[state])) {
    throw NumericError("viterbi: no path has non-zero probability");
  }
  PathVector path;
  path.states.resize(len);
  for (std::size_t t = len; t-- > 0;) {
    path.states[t] = state;
    if (t > 0) state = back[t * n + state];
  }
  return path;
}

double path_log_probability(const CyclicHMM& hmm, std::span<const std::size_t> path,
                            SequenceView seq) {
  if (path.size() != seq.size() || seq.empty()) {
    throw InvalidArgument("path_log_probability: path and sequence lengths differ");
  }
  double lp = safe_log(hmm.init()[path[0]]) + hmm.log_emission(path[0], seq[0]);
  for (std::size_t t = 1; t < seq.size(); ++t) {
    lp += safe_log(hmm.trans(path[t - 1], path[t])) + hmm.log_emission(path[t], seq[t]);
  }
  return lp;
}

}  // namespace gphmm
