#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gphmm/phmm.hpp"

namespace gphmm::testing {

// Independent reference: plain probabilities, every masked path enumerated.
inline double normal_pdf(double x, double m, double v) {
  return std::exp(-(x - m) * (x - m) / (2 * v)) / std::sqrt(2 * std::numbers::pi * v);
}

struct Enumerated {
  double total = 0.0;
  double best = -1.0;
  double second = -1.0;
  std::vector<std::size_t> argmax;
};

inline Enumerated enumerate(const CyclicHMM& m, const std::vector<double>& obs) {
  const std::size_t n = m.n_states(), len = obs.size();
  std::size_t count = 1;
  for (std::size_t t = 0; t < len; ++t) count *= n;
  Enumerated e;
  std::vector<std::size_t> path(len);
  for (std::size_t code = 0; code < count; ++code) {
    std::size_t c = code;
    for (std::size_t t = len; t-- > 0;) {
      path[t] = c % n;
      c /= n;
    }
    double p = m.init()[path[0]] * normal_pdf(obs[0], m.emit_mean()[path[0]], m.emit_var()[path[0]]);
    for (std::size_t t = 1; t < len; ++t) {
      p *= m.trans(path[t - 1], path[t]) *
           normal_pdf(obs[t], m.emit_mean()[path[t]], m.emit_var()[path[t]]);
    }
    e.total += p;
    if (p > e.best) {
      e.second = e.best;
      e.best = p;
      e.argmax = path;
    } else if (p > e.second) {
      e.second = p;
    }
  }
  return e;
}

inline CyclicHMM random_model(std::size_t n, std::mt19937_64& rng, bool random_init = true) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::uniform_real_distribution<double> mu(-3.0, 3.0);
  std::uniform_real_distribution<double> var(0.3, 2.0);
  std::vector<double> trans(n * n, 0.0), mean(n), v(n), init(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (n == 1) {
      trans[0] = 1.0;
    } else {
      const double stay = u(rng);
      trans[i * n + i] = stay;
      trans[i * n + (i + 1) % n] = 1.0 - stay;
    }
    mean[i] = mu(rng);
    v[i] = var(rng);
  }
  if (random_init) {
    double s = 0.0;
    for (auto& p : init) s += (p = u(rng));
    for (auto& p : init) p /= s;
  } else {
    init[0] = 1.0;
  }
  return CyclicHMM(n, trans, mean, v, init, 1e-6);
}

inline std::vector<double> random_obs(std::size_t len, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 2.0);
  std::vector<double> o(len);
  for (auto& x : o) x = d(rng);
  return o;
}

}  // namespace gphmm::testing
