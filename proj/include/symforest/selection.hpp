#pragma once

// Occam's-window ranking of visited forests by joint-marginal-posterior
// value, with point estimates for the selected models.

#include <optional>
#include <string>
#include <vector>

#include "symforest/conjugate.hpp"
#include "symforest/sampler.hpp"

namespace symforest {

struct RankedEntry {
  int rank = 0;
  std::vector<std::string> expressions;  // per-tree canonical strings
  double log_jmp = 0.0;                  // fresh recomputation, not the trace value
  Eigen::VectorXd beta_hat;              // K tree coefficients (posterior mean)
  double intercept = 0.0;
  double rmse = 0.0;
  std::optional<int> mged;               // present when a truth expression is given
  double log_marg_lik = 0.0;             // diagnostic column
  int first_chain = 0;
  int first_iter = 0;
};

struct RankedModels {
  std::vector<RankedEntry> entries;
  int r = 0;
};

// Deduplicates visited forests by the ordered tuple of per-tree
// canonical strings, sorts by recomputed log-JMP descending (ties by
// first visit, earlier chain then earlier iteration), keeps the top r,
// and attaches beta_hat = mu*, in-sample RMSE, and optionally the
// minimum edit distance to a ground-truth expression.
RankedModels rank_models(const std::vector<ChainTrace>& traces, const Dataset& data,
                         const HyperParams& hyper, int r,
                         const std::optional<SymbolicTree>& truth = std::nullopt);

struct FittedValues {
  Eigen::VectorXd y_hat;
  Eigen::VectorXd beta_hat;  // length K+1 including the intercept
};

// y_hat = T(X) mu* with mu* from the conjugate update; degenerate
// forests raise DegenerateForestError.
FittedValues fitted_values(const std::vector<SymbolicTree>& trees, const Dataset& data,
                           const ForestHyper& hyper);

}  // namespace symforest
