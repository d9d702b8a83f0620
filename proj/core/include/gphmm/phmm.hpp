#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gphmm {

using SequenceView = std::span<const double>;

/// Hidden Markov model with a cyclic transition topology and one Gaussian
/// emission per state.
///
/// State i may only stay in i or advance to (i + 1) mod N. Every other entry
/// of the transition matrix is exactly zero and stays zero under training.
class CyclicHMM {
public:
  CyclicHMM() = default;
  /// Throws InvalidArgument when any invariant is violated.
  CyclicHMM(std::size_t n_states, std::vector<double> trans, std::vector<double> emit_mean,
            std::vector<double> emit_var, std::vector<double> init, double var_floor);

  std::size_t n_states() const { return n_; }
  double trans(std::size_t i, std::size_t j) const { return trans_[i * n_ + j]; }
  const std::vector<double>& transitions() const { return trans_; }
  const std::vector<double>& emit_mean() const { return mean_; }
  const std::vector<double>& emit_var() const { return var_; }
  const std::vector<double>& init() const { return init_; }
  double var_floor() const { return var_floor_; }

  /// True when the cyclic mask permits i -> j among `n` states.
  static bool allowed(std::size_t n, std::size_t i, std::size_t j) {
    return j == i || j == (i + 1) % n;
  }

  /// Log density of observation `o` under state `i`.
  double log_emission(std::size_t i, double o) const;

  bool operator==(const CyclicHMM&) const = default;

private:
  std::size_t n_ = 0;
  std::vector<double> trans_;
  std::vector<double> mean_;
  std::vector<double> var_;
  std::vector<double> init_;
  double var_floor_ = 0.0;
};

/// Most probable state sequence for one observation sequence.
struct PathVector {
  std::vector<std::size_t> states;

  std::size_t size() const { return states.size(); }
  bool operator==(const PathVector&) const = default;
};

struct InitOptions {
  /// The variance floor is this fraction of the pooled data variance.
  double var_floor_rel = 1e-6;
};

/// Starting model: transitions uniform over the mask, init = [1, 0, ..., 0],
/// emissions from N equal contiguous chunks of every sequence.
CyclicHMM init_model(std::size_t n_states, std::span<const SequenceView> sequences,
                     const InitOptions& options = {});

/// log P(seq | hmm), computed in log space.
double forward_log_likelihood(const CyclicHMM& hmm, SequenceView seq);

struct BaumWelchOptions {
  std::size_t max_iters = 100;
  /// Stop once the total log-likelihood improves by less than this.
  double tol = 1e-4;
  /// Seed for re-seeding states that lose all posterior mass.
  std::uint64_t seed = 0;
  /// Called after every re-estimation with (iteration, model, total log-likelihood).
  std::function<void(std::size_t, const CyclicHMM&, double)> on_iteration;
};

struct BaumWelchResult {
  CyclicHMM model;
  /// Total training log-likelihood of the initial model followed by one entry per iteration.
  std::vector<double> log_likelihood;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

BaumWelchResult baum_welch(const CyclicHMM& hmm, std::span<const SequenceView> sequences,
                           const BaumWelchOptions& options = {});

/// Viterbi decoding; ties resolve toward the lower state index.
PathVector viterbi(const CyclicHMM& hmm, SequenceView seq);

/// Joint log-probability log P(path, seq | hmm); -inf for paths the model forbids.
double path_log_probability(const CyclicHMM& hmm, std::span<const std::size_t> path,
                            SequenceView seq);

}  // namespace gphmm
