#include "symforest/prior.hpp"

#include <cmath>
#include <stdexcept>

namespace symforest {

double split_probability(const SplitRule& rule, int m) {
  if (m < 0) throw std::invalid_argument("depth must be >= 0");
  if (!(rule.alpha > 0.0 && rule.alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  if (rule.delta0 < 0.0) throw std::invalid_argument("delta0 must be >= 0");
  return rule.alpha * std::pow(1.0 + m, -rule.delta0);
}

double effective_split_probability(const SplitRule& rule, int m, int max_depth) {
  if (m >= max_depth) return 0.0;
  return split_probability(rule, m);
}

void validate_simplex(const Eigen::VectorXd& w, double tol) {
  if (w.size() == 0) throw std::invalid_argument("empty weight vector");
  if ((w.array() < 0.0).any()) throw std::invalid_argument("negative weight");
  if (std::abs(w.sum() - 1.0) > tol) throw std::invalid_argument("weights must sum to 1");
}

void validate_concentrations(const Eigen::VectorXd& a) {
  if (a.size() == 0) throw std::domain_error("empty concentration vector");
  if (!(a.array() > 0.0).all()) throw std::domain_error("concentrations must be positive");
}

namespace {

struct PriorAccumulator {
  const OperatorSet& ops;
  const Eigen::VectorXd& w_op;
  const Eigen::VectorXd& w_ft;
  const SplitRule& rule;
  int max_depth;
  double log_prob = 0.0;

  void visit(const TreeNode* node, int m) {
    const double pm = effective_split_probability(rule, m, max_depth);
    if (node->kind == TreeNode::Kind::terminal) {
      log_prob += std::log1p(-pm);
      log_prob += std::log(w_ft[node->feature - 1]);
      return;
    }
    log_prob += std::log(pm);
    log_prob += std::log(w_op[ops.flat_index(node->kind == TreeNode::Kind::binary, node->op)]);
    visit(node->left.get(), m + 1);
    if (node->kind == TreeNode::Kind::binary) visit(node->right.get(), m + 1);
  }
};

}  // namespace

double subtree_log_prob(const SymbolicTree& tree, const OperatorSet& ops,
                        const Eigen::VectorXd& w_op, const Eigen::VectorXd& w_ft,
                        const SplitRule& rule, int max_depth, int root_depth) {
  if (root_depth < 0 || root_depth > max_depth)
    throw std::invalid_argument("root_depth outside [0, max_depth]");
  PriorAccumulator acc{ops, w_op, w_ft, rule, max_depth};
  acc.visit(tree.root().get(), root_depth);
  return acc.log_prob;
}

double log_tree_prior(const SymbolicTree& tree, const OperatorSet& ops,
                      const Eigen::VectorXd& w_op, const Eigen::VectorXd& w_ft,
                      const SplitRule& rule, int max_depth, bool include_root_split_factor) {
  if (w_op.size() != ops.size()) throw std::invalid_argument("w_op length mismatch");
  double lp = subtree_log_prob(tree, ops, w_op, w_ft, rule, max_depth, 0);
  if (!include_root_split_factor) {
    const double p0 = effective_split_probability(rule, 0, max_depth);
    lp -= tree.root()->kind == TreeNode::Kind::terminal ? std::log1p(-p0) : std::log(p0);
  }
  return lp;
}

int sample_categorical(Rng& rng, const Eigen::VectorXd& weights) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double cum = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum) return static_cast<int>(i);
  }
  // u landed in the rounding slack past the last positive weight
  for (Eigen::Index i = weights.size() - 1; i >= 0; --i)
    if (weights[i] > 0.0) return static_cast<int>(i);
  throw std::invalid_argument("all-zero weight vector");
}

namespace {

SymbolicTree sample_node(Rng& rng, const OperatorSet& ops, const Eigen::VectorXd& w_op,
                         const Eigen::VectorXd& w_ft, const SplitRule& rule, int max_depth,
                         int m) {
  const double pm = effective_split_probability(rule, m, max_depth);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < pm) {
    const int flat = sample_categorical(rng, w_op);
    const int nu = static_cast<int>(ops.unary().size());
    if (flat < nu) {
      SymbolicTree child = sample_node(rng, ops, w_op, w_ft, rule, max_depth, m + 1);
      return make_unary(flat, child);
    }
    SymbolicTree left = sample_node(rng, ops, w_op, w_ft, rule, max_depth, m + 1);
    SymbolicTree right = sample_node(rng, ops, w_op, w_ft, rule, max_depth, m + 1);
    return make_binary(flat - nu, left, right);
  }
  return make_terminal(sample_categorical(rng, w_ft) + 1);
}

}  // namespace

SymbolicTree sample_tree_from_prior(Rng& rng, const OperatorSet& ops, const Eigen::VectorXd& w_op,
                                    const Eigen::VectorXd& w_ft, const SplitRule& rule,
                                    int max_depth, int root_depth) {
  if (w_op.size() != ops.size()) throw std::invalid_argument("w_op length mismatch");
  validate_simplex(w_op, 1e-9);
  validate_simplex(w_ft, 1e-9);
  return sample_node(rng, ops, w_op, w_ft, rule, max_depth, root_depth);
}

double log_multivariate_beta(const Eigen::VectorXd& a) {
  validate_concentrations(a);
  double sum = 0.0, lg = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    lg += std::lgamma(a[i]);
    sum += a[i];
  }
  return lg - std::lgamma(sum);
}

double log_dirichlet_multinomial(const Eigen::VectorXd& concentrations,
                                 const std::vector<int>& counts) {
  validate_concentrations(concentrations);
  if (static_cast<Eigen::Index>(counts.size()) != concentrations.size())
    throw std::invalid_argument("counts length mismatch");
  Eigen::VectorXd a = concentrations;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw std::domain_error("counts must be nonnegative");
    a[static_cast<Eigen::Index>(i)] += counts[i];
  }
  return log_multivariate_beta(a);
}

Eigen::VectorXd sample_dirichlet(Rng& rng, const Eigen::VectorXd& concentrations) {
  validate_concentrations(concentrations);
  Eigen::VectorXd draws(concentrations.size());
  for (Eigen::Index i = 0; i < concentrations.size(); ++i) {
    std::gamma_distribution<double> gamma(concentrations[i], 1.0);
    draws[i] = gamma(rng);
  }
  const double total = draws.sum();
  if (total <= 0.0) {
    // Tiny concentrations can underflow every gamma draw; fall back to
    // the largest component rather than returning NaN.
    Eigen::Index imax;
    concentrations.maxCoeff(&imax);
    draws.setZero();
    draws[imax] = 1.0;
    return draws;
  }
  return draws / total;
}

}  // namespace symforest
