#include "symforest/diagnostics.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace symforest {

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased sample variance
  std::size_t n = 0;
};

Moments moments(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  Moments m;
  m.n = end - begin;
  for (std::size_t i = begin; i < end; ++i) m.mean += x[i];
  m.mean /= static_cast<double>(m.n);
  if (m.n > 1) {
    for (std::size_t i = begin; i < end; ++i) {
      const double d = x[i] - m.mean;
      m.var += d * d;
    }
    m.var /= static_cast<double>(m.n - 1);
  }
  return m;
}

}  // namespace

double geweke_z(const std::vector<double>& chain, double first_frac, double last_frac) {
  const std::size_t n = chain.size();
  if (n < 20) throw std::invalid_argument("geweke_z requires a chain of length >= 20");
  if (!(first_frac > 0.0 && last_frac > 0.0 && first_frac + last_frac <= 1.0))
    throw std::invalid_argument("invalid window fractions");
  const std::size_t n_a = static_cast<std::size_t>(first_frac * static_cast<double>(n));
  const std::size_t n_b = static_cast<std::size_t>(last_frac * static_cast<double>(n));
  if (n_a < 2 || n_b < 2) throw std::invalid_argument("windows too small");
  const Moments a = moments(chain, 0, n_a);
  const Moments b = moments(chain, n - n_b, n);
  const double denom2 = a.var / static_cast<double>(a.n) + b.var / static_cast<double>(b.n);
  if (denom2 <= 0.0) throw std::domain_error("geweke_z undefined: zero variance in both windows");
  return (a.mean - b.mean) / std::sqrt(denom2);
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw std::invalid_argument("gelman_rubin requires at least 2 chains");
  const std::size_t n = chains[0].size();
  if (n < 10) throw std::invalid_argument("gelman_rubin requires chains of length >= 10");
  for (const auto& chain : chains)
    if (chain.size() != n) throw std::invalid_argument("chains must have equal length");

  double w = 0.0;
  double grand = 0.0;
  std::vector<double> means(m);
  for (std::size_t j = 0; j < m; ++j) {
    const Moments mo = moments(chains[j], 0, n);
    means[j] = mo.mean;
    w += mo.var;
    grand += mo.mean;
  }
  w /= static_cast<double>(m);
  grand /= static_cast<double>(m);
  if (w <= 0.0) throw std::domain_error("gelman_rubin undefined: zero within-chain variance");

  double b = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double d = means[j] - grand;
    b += d * d;
  }
  b *= static_cast<double>(n) / static_cast<double>(m - 1);

  const double nd = static_cast<double>(n);
  const double var_hat = (nd - 1.0) / nd * w + b / nd;
  return std::sqrt(var_hat / w);
}

}  // namespace symforest
