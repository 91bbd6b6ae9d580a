#pragma once

// Expression design matrices, Normal-Inverse-Gamma posterior updates,
// the analytic log joint-marginal-posterior of a forest, and conjugate
// full-conditional draws.

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "symforest/expr.hpp"
#include "symforest/prior.hpp"

namespace symforest {

struct Dataset {
  Eigen::MatrixXd X;  // n x p
  Eigen::VectorXd y;  // n
  std::vector<std::string> feature_names;  // optional, size p when present
  std::string target_name = "y";

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
  void validate() const;
};

struct NIGParams {
  double nu = 1.0;
  double lambda = 1.0;
  Eigen::VectorXd mu;     // length K+1 (intercept first)
  Eigen::MatrixXd Sigma;  // (K+1) x (K+1), positive definite
};

// mu = (mu_intercept, mu_coef, ..., mu_coef), Sigma = I.
NIGParams default_nig(int K, double nu = 1.0, double lambda = 1.0, double mu_intercept = 0.0,
                      double mu_coef = 1.0);

struct ConjugateSummary {
  double nu_star = 0.0;
  double lambda_star = 0.0;
  Eigen::VectorXd mu_star;
  Eigen::MatrixXd Sigma_star;
  double log_det_Sigma_star = 0.0;
};

// Thrown when the posterior precision is not positive definite after a
// one-shot jitter retry or lambda_star fails to stay positive; the
// sampler treats it as a -inf posterior.
class DegenerateForestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sigma* = (Sigma^-1 + T'T)^-1 and mu* = Sigma*(Sigma^-1 mu + T'y) via
// Cholesky solves; nu* = nu + n; lambda* through the stabler
// lambda + (y - T mu*)'y + (mu - mu*)' Sigma^-1 mu form.
ConjugateSummary nig_update(const NIGParams& prior, const Eigen::MatrixXd& T,
                            const Eigen::VectorXd& y);

struct DesignResult {
  Eigen::MatrixXd T;  // n x (K+1); column 0 is the intercept
  bool all_finite = true;
};

DesignResult design_matrix(const std::vector<SymbolicTree>& trees, const OperatorSet& ops,
                           const Eigen::MatrixXd& X);

struct ForestHyper {
  OperatorSet ops;
  SplitRule rule;
  int max_depth = 6;
  bool include_root_split_factor = true;
  Eigen::VectorXd conc_op;  // Dirichlet concentrations, length |O|
  Eigen::VectorXd conc_ft;  // length p
  NIGParams nig;            // dimension K+1
};

ForestHyper default_forest_hyper(const OperatorSet& ops, int p, int K);

// Per-tree contribution to the log-JMP: log B(conc_op + xi) +
// log B(conc_ft + rho) + depth structure factors.
double log_tree_marginal_part(const TreeSummary& summary, const ForestHyper& hyper);

// First three terms of the log-JMP; also the (unnormalized) log
// marginal likelihood used as a diagnostic ranking column.
double log_model_part(const ConjugateSummary& summary);

struct ForestEval {
  Eigen::MatrixXd design;
  bool finite = false;                      // design finite and update nondegenerate
  std::optional<ConjugateSummary> summary;  // present when finite
  std::vector<double> tree_parts;           // per-tree log marginal parts
  double log_jmp = -std::numeric_limits<double>::infinity();
  double log_marg_lik = -std::numeric_limits<double>::infinity();
};

ForestEval evaluate_forest(const std::vector<SymbolicTree>& trees, const Dataset& data,
                           const ForestHyper& hyper);

// log-JMP of a forest: -inf for non-finite design columns or degenerate
// updates, otherwise log_model_part + sum of per-tree marginal parts.
double log_jmp_ensemble(const std::vector<SymbolicTree>& trees, const Dataset& data,
                        const ForestHyper& hyper);

struct WeightPair {
  Eigen::VectorXd op;
  Eigen::VectorXd ft;
};

// w_op ~ Dir(conc_op + xi), w_ft ~ Dir(conc_ft + rho).
WeightPair sample_weights_full_conditional(Rng& rng, const TreeSummary& summary,
                                           const Eigen::VectorXd& conc_op,
                                           const Eigen::VectorXd& conc_ft);

struct ModelParams {
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
};

// sigma2 ~ IG(nu*/2, lambda*/2), then beta ~ N(mu*, sigma2 Sigma*).
ModelParams sample_model_params_full_conditional(Rng& rng, const ConjugateSummary& summary);

}  // namespace symforest
