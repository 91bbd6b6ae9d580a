#include "symforest/conjugate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace symforest {

void Dataset::validate() const {
  if (X.rows() < 1 || X.cols() < 1) throw std::invalid_argument("dataset requires n >= 1, p >= 1");
  if (y.size() != X.rows()) throw std::invalid_argument("response length mismatch");
  if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("dataset entries must be finite");
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != X.cols())
    throw std::invalid_argument("feature_names length mismatch");
}

NIGParams default_nig(int K, double nu, double lambda, double mu_intercept, double mu_coef) {
  NIGParams nig;
  nig.nu = nu;
  nig.lambda = lambda;
  nig.mu = Eigen::VectorXd::Constant(K + 1, mu_coef);
  nig.mu[0] = mu_intercept;
  nig.Sigma = Eigen::MatrixXd::Identity(K + 1, K + 1);
  return nig;
}

namespace {

void validate_nig(const NIGParams& prior) {
  if (!(prior.nu > 0.0) || !(prior.lambda > 0.0))
    throw std::invalid_argument("nu and lambda must be positive");
  if (prior.Sigma.rows() != prior.Sigma.cols() || prior.Sigma.rows() != prior.mu.size())
    throw std::invalid_argument("NIG dimension mismatch");
}

}  // namespace

ConjugateSummary nig_update(const NIGParams& prior, const Eigen::MatrixXd& T,
                            const Eigen::VectorXd& y) {
  validate_nig(prior);
  const Eigen::Index d = prior.mu.size();
  if (T.cols() != d) throw std::invalid_argument("design width mismatch");
  if (T.rows() != y.size()) throw std::invalid_argument("design/response mismatch");

  Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.Sigma);
  if (prior_llt.info() != Eigen::Success)
    throw std::invalid_argument("prior Sigma is not positive definite");
  const Eigen::MatrixXd prior_precision = prior_llt.solve(Eigen::MatrixXd::Identity(d, d));

  Eigen::MatrixXd precision = prior_precision + T.transpose() * T;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    // Duplicated trees produce near-collinear columns routinely; retry
    // once with a trace-scaled jitter before giving up.
    const double jitter = 1e-10 * precision.trace() / static_cast<double>(d);
    precision.diagonal().array() += jitter;
    llt.compute(precision);
    if (llt.info() != Eigen::Success)
      throw DegenerateForestError("posterior precision not positive definite");
  }

  ConjugateSummary out;
  out.nu_star = prior.nu + static_cast<double>(T.rows());
  out.Sigma_star = llt.solve(Eigen::MatrixXd::Identity(d, d));
  out.Sigma_star = ((out.Sigma_star + out.Sigma_star.transpose()) / 2.0).eval();
  out.log_det_Sigma_star = -2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  out.mu_star = llt.solve(prior_precision * prior.mu + T.transpose() * y);
  out.lambda_star = prior.lambda + (y - T * out.mu_star).dot(y) +
                    (prior.mu - out.mu_star).dot(prior_precision * prior.mu);
  if (!(out.lambda_star > 0.0) || !std::isfinite(out.lambda_star))
    throw DegenerateForestError("nonpositive lambda*");
  return out;
}

DesignResult design_matrix(const std::vector<SymbolicTree>& trees, const OperatorSet& ops,
                           const Eigen::MatrixXd& X) {
  DesignResult out;
  const Eigen::Index n = X.rows();
  out.T.resize(n, static_cast<Eigen::Index>(trees.size()) + 1);
  out.T.col(0).setOnes();
  for (std::size_t j = 0; j < trees.size(); ++j) {
    const bool finite =
        evaluate_column(trees[j], ops, X, out.T.col(static_cast<Eigen::Index>(j) + 1));
    out.all_finite = out.all_finite && finite;
  }
  return out;
}

ForestHyper default_forest_hyper(const OperatorSet& ops, int p, int K) {
  ForestHyper hyper;
  hyper.ops = ops;
  hyper.rule = SplitRule{};
  hyper.conc_op = Eigen::VectorXd::Constant(ops.size(), 1.0 / ops.size());
  hyper.conc_ft = Eigen::VectorXd::Constant(p, 1.0 / p);
  hyper.nig = default_nig(K);
  return hyper;
}

double log_tree_marginal_part(const TreeSummary& summary, const ForestHyper& hyper) {
  double lp = log_dirichlet_multinomial(hyper.conc_op, summary.op_counts) +
              log_dirichlet_multinomial(hyper.conc_ft, summary.feature_counts);
  const int start_depth = hyper.include_root_split_factor ? 0 : 1;
  for (int m = start_depth; m < static_cast<int>(summary.nonterminals_at_depth.size()); ++m) {
    const double pm = effective_split_probability(hyper.rule, m, hyper.max_depth);
    if (summary.nonterminals_at_depth[m] > 0) lp += summary.nonterminals_at_depth[m] * std::log(pm);
    if (summary.terminals_at_depth[m] > 0) lp += summary.terminals_at_depth[m] * std::log1p(-pm);
  }
  return lp;
}

double log_model_part(const ConjugateSummary& summary) {
  return 0.5 * summary.log_det_Sigma_star + std::lgamma(summary.nu_star / 2.0) -
         (summary.nu_star / 2.0) * std::log(summary.lambda_star / 2.0);
}

ForestEval evaluate_forest(const std::vector<SymbolicTree>& trees, const Dataset& data,
                           const ForestHyper& hyper) {
  ForestEval eval;
  DesignResult design = design_matrix(trees, hyper.ops, data.X);
  eval.design = std::move(design.T);
  eval.tree_parts.reserve(trees.size());
  for (const auto& tree : trees)
    eval.tree_parts.push_back(log_tree_marginal_part(
        summarize(tree, hyper.ops, static_cast<int>(data.p())), hyper));
  if (!design.all_finite) return eval;
  try {
    ConjugateSummary summary = nig_update(hyper.nig, eval.design, data.y);
    eval.log_marg_lik = log_model_part(summary);
    eval.log_jmp = eval.log_marg_lik;
    for (double part : eval.tree_parts) eval.log_jmp += part;
    eval.summary = std::move(summary);
    eval.finite = std::isfinite(eval.log_jmp);
    if (!eval.finite) eval.log_jmp = -std::numeric_limits<double>::infinity();
  } catch (const DegenerateForestError&) {
    eval.log_jmp = -std::numeric_limits<double>::infinity();
  }
  return eval;
}

double log_jmp_ensemble(const std::vector<SymbolicTree>& trees, const Dataset& data,
                        const ForestHyper& hyper) {
  return evaluate_forest(trees, data, hyper).log_jmp;
}

WeightPair sample_weights_full_conditional(Rng& rng, const TreeSummary& summary,
                                           const Eigen::VectorXd& conc_op,
                                           const Eigen::VectorXd& conc_ft) {
  validate_concentrations(conc_op);
  validate_concentrations(conc_ft);
  if (conc_op.size() != static_cast<Eigen::Index>(summary.op_counts.size()) ||
      conc_ft.size() != static_cast<Eigen::Index>(summary.feature_counts.size()))
    throw std::invalid_argument("concentration length mismatch");
  WeightPair out;
  Eigen::VectorXd a_op = conc_op;
  for (std::size_t i = 0; i < summary.op_counts.size(); ++i)
    a_op[static_cast<Eigen::Index>(i)] += summary.op_counts[i];
  Eigen::VectorXd a_ft = conc_ft;
  for (std::size_t i = 0; i < summary.feature_counts.size(); ++i)
    a_ft[static_cast<Eigen::Index>(i)] += summary.feature_counts[i];
  out.op = sample_dirichlet(rng, a_op);
  out.ft = sample_dirichlet(rng, a_ft);
  return out;
}

ModelParams sample_model_params_full_conditional(Rng& rng, const ConjugateSummary& summary) {
  ModelParams out;
  // 1/X with X ~ Gamma(nu*/2, scale 2/lambda*) gives IG(nu*/2, lambda*/2).
  std::gamma_distribution<double> gamma(summary.nu_star / 2.0, 2.0 / summary.lambda_star);
  out.sigma2 = 1.0 / gamma(rng);
  Eigen::LLT<Eigen::MatrixXd> llt(summary.Sigma_star);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("Sigma* must be positive definite");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(summary.mu_star.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  const Eigen::VectorXd scaled = llt.matrixL() * z;
  out.beta = summary.mu_star + std::sqrt(out.sigma2) * scaled;
  return out;
}

}  // namespace symforest
