#pragma once

// MCMC convergence diagnostics over scalar chain functionals.

#include <vector>

namespace symforest {

// Z = (m_A - m_B) / sqrt(s_A^2/n_A + s_B^2/n_B) over the first
// first_frac and last last_frac windows, plain sample variances.
// Requires length >= 20; throws std::domain_error when both windows
// have zero variance.
double geweke_z(const std::vector<double>& chain, double first_frac = 0.1,
                double last_frac = 0.5);

// R_hat = sqrt(((n-1)/n W + B/n) / W) over m >= 2 equal-length chains;
// approaches 1 from above for well-mixed chains. Throws
// std::domain_error when W = 0.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

}  // namespace symforest
