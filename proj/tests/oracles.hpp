#pragma once

// Test-side oracles, independent of the library's computation paths:
// quadrature-based marginalization, textbook NIG densities, a dense
// linear-algebra route for the conjugate update, and a breadth-first
// edit-script search for small tree edit distances.

#include <Eigen/Dense>

#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "symforest/conjugate.hpp"
#include "symforest/expr.hpp"

namespace oracles {

inline double log_inverse_gamma_pdf(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

inline double log_mvn_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                          const Eigen::MatrixXd& cov) {
  const Eigen::Index d = x.size();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
  const double logdet = std::log(std::abs(lu.determinant()));
  const Eigen::VectorXd diff = x - mean;
  const double quad = diff.dot(lu.solve(diff));
  return -0.5 * (d * std::log(2.0 * M_PI) + logdet + quad);
}

inline double log_nig_pdf(const Eigen::VectorXd& beta, double sigma2,
                          const symforest::NIGParams& params) {
  return log_mvn_pdf(beta, params.mu, sigma2 * params.Sigma) +
         log_inverse_gamma_pdf(sigma2, params.nu / 2.0, params.lambda / 2.0);
}

inline double log_gaussian_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& T,
                                      const Eigen::VectorXd& beta, double sigma2) {
  const Eigen::Index n = y.size();
  const double rss = (y - T * beta).squaredNorm();
  return -0.5 * (n * std::log(2.0 * M_PI * sigma2) + rss / sigma2);
}

// Adaptive Simpson on [a, b] with absolute tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 0) {
  const double c = (a + b) / 2.0;
  const double fa = f(a), fb = f(b), fc = f(c);
  const double s = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
  const double lc = (a + c) / 2.0, rc = (c + b) / 2.0;
  const double flc = f(lc), frc = f(rc);
  const double sl = (c - a) / 6.0 * (fa + 4.0 * flc + fc);
  const double sr = (b - c) / 6.0 * (fc + 4.0 * frc + fb);
  if (depth > 40 || std::abs(sl + sr - s) < 15.0 * tol) return sl + sr + (sl + sr - s) / 15.0;
  return adaptive_simpson(f, a, c, tol / 2.0, depth + 1) +
         adaptive_simpson(f, c, b, tol / 2.0, depth + 1);
}

// log of integral_0^inf IG(s; nu/2, lambda/2) N_n(y; T mu, s (I + T Sigma T'))
// ds, i.e. the model evidence with beta integrated in closed form and
// sigma^2 by quadrature on the log scale.
inline double log_model_evidence_quadrature(const Eigen::VectorXd& y, const Eigen::MatrixXd& T,
                                            const symforest::NIGParams& params) {
  const Eigen::Index n = y.size();
  const Eigen::MatrixXd M =
      Eigen::MatrixXd::Identity(n, n) + T * params.Sigma * T.transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  const double logdet_M = std::log(std::abs(lu.determinant()));
  const Eigen::VectorXd resid = y - T * params.mu;
  const double quad = resid.dot(lu.solve(resid));

  auto log_integrand = [&](double t) {
    const double s = std::exp(t);
    double lp = log_inverse_gamma_pdf(s, params.nu / 2.0, params.lambda / 2.0);
    lp += -0.5 * (n * std::log(2.0 * M_PI * s) + logdet_M + quad / s);
    return lp + t;  // Jacobian of s = exp(t)
  };

  // Locate the peak on a coarse grid, then integrate a shifted
  // exponential over a generous window.
  double t_max = 0.0, best = -std::numeric_limits<double>::infinity();
  for (double t = std::log(1e-10); t <= std::log(1e10); t += 0.05) {
    const double v = log_integrand(t);
    if (v > best) {
      best = v;
      t_max = t;
    }
  }
  auto f = [&](double t) {
    const double v = log_integrand(t) - best;
    return v < -80.0 ? 0.0 : std::exp(v);
  };
  const double integral = adaptive_simpson(f, t_max - 60.0, t_max + 60.0, 1e-12);
  return best + std::log(integral);
}

// Conjugate update through generic dense inversion, no Cholesky.
struct DenseNIG {
  double nu_star, lambda_star;
  Eigen::VectorXd mu_star;
  Eigen::MatrixXd Sigma_star;
};

inline DenseNIG dense_nig_oracle(const symforest::NIGParams& prior, const Eigen::MatrixXd& T,
                                 const Eigen::VectorXd& y) {
  DenseNIG out;
  const Eigen::MatrixXd prior_inv = prior.Sigma.fullPivLu().inverse();
  out.Sigma_star = (prior_inv + T.transpose() * T).fullPivLu().inverse();
  out.mu_star = out.Sigma_star * (prior_inv * prior.mu + T.transpose() * y);
  out.nu_star = prior.nu + static_cast<double>(T.rows());
  out.lambda_star = prior.lambda + y.dot(y) + prior.mu.dot(prior_inv * prior.mu) -
                    out.mu_star.dot(out.Sigma_star.fullPivLu().solve(out.mu_star));
  return out;
}

// --- generic ordered labeled trees for the edit-distance oracle -------

struct GenericTree {
  std::string label;
  std::vector<GenericTree> children;

  bool operator==(const GenericTree& other) const {
    return label == other.label && children == other.children;
  }
};

inline GenericTree project(const symforest::TreeNode* node, const symforest::OperatorSet& ops) {
  GenericTree out;
  switch (node->kind) {
    case symforest::TreeNode::Kind::terminal:
      out.label = "x" + std::to_string(node->feature);
      break;
    case symforest::TreeNode::Kind::unary:
      out.label = ops.unary()[node->op].name;
      out.children.push_back(project(node->left.get(), ops));
      break;
    case symforest::TreeNode::Kind::binary:
      out.label = ops.binary()[node->op].name;
      out.children.push_back(project(node->left.get(), ops));
      out.children.push_back(project(node->right.get(), ops));
      break;
  }
  return out;
}

inline std::string serialize(const GenericTree& t) {
  std::string s = t.label + "(";
  for (const auto& c : t.children) s += serialize(c) + ",";
  return s + ")";
}

inline void collect_labels(const GenericTree& t, std::set<std::string>* labels) {
  labels->insert(t.label);
  for (const auto& c : t.children) collect_labels(c, labels);
}

inline int node_count(const GenericTree& t) {
  int n = 1;
  for (const auto& c : t.children) n += node_count(c);
  return n;
}

// All trees one edit away from t, using relabels/inserts drawn from the
// given label alphabet. Deletion of an inner node splices its children
// into the parent; insertion adopts a contiguous span of children.
inline std::vector<GenericTree> single_edits(const GenericTree& t,
                                             const std::set<std::string>& labels) {
  std::vector<GenericTree> out;

  std::function<void(const GenericTree&, const std::function<GenericTree(GenericTree)>&)> visit =
      [&](const GenericTree& node, const std::function<GenericTree(GenericTree)>& rebuild) {
        // relabel this node
        for (const auto& label : labels) {
          if (label == node.label) continue;
          GenericTree g = node;
          g.label = label;
          out.push_back(rebuild(g));
        }
        // delete a child (its children move up, preserving order)
        for (std::size_t i = 0; i < node.children.size(); ++i) {
          GenericTree g = node;
          GenericTree removed = g.children[static_cast<long>(i)];
          g.children.erase(g.children.begin() + static_cast<long>(i));
          g.children.insert(g.children.begin() + static_cast<long>(i), removed.children.begin(),
                            removed.children.end());
          out.push_back(rebuild(g));
        }
        // insert a node adopting children [i, j)
        for (std::size_t i = 0; i <= node.children.size(); ++i) {
          for (std::size_t j = i; j <= node.children.size(); ++j) {
            for (const auto& label : labels) {
              GenericTree inserted;
              inserted.label = label;
              inserted.children.assign(node.children.begin() + static_cast<long>(i),
                                       node.children.begin() + static_cast<long>(j));
              GenericTree g = node;
              g.children.erase(g.children.begin() + static_cast<long>(i),
                               g.children.begin() + static_cast<long>(j));
              g.children.insert(g.children.begin() + static_cast<long>(i), inserted);
              out.push_back(rebuild(g));
            }
          }
        }
        // recurse
        for (std::size_t i = 0; i < node.children.size(); ++i) {
          auto child_rebuild = [&, i](GenericTree child) {
            GenericTree g = node;
            g.children[static_cast<long>(i)] = std::move(child);
            return rebuild(g);
          };
          visit(node.children[static_cast<long>(i)], child_rebuild);
        }
      };

  visit(t, [](GenericTree g) { return g; });

  // a new root adopting the whole tree
  for (const auto& label : labels) {
    GenericTree g;
    g.label = label;
    g.children.push_back(t);
    out.push_back(g);
  }
  // delete the root when it has exactly one child
  if (t.children.size() == 1) out.push_back(t.children[0]);
  return out;
}

// BFS over edit scripts of length <= max_edits; returns the exact
// distance when within range, -1 otherwise.
inline int bfs_edit_distance(const GenericTree& a, const GenericTree& b, int max_edits,
                             std::size_t state_cap = 2000000) {
  if (a == b) return 0;
  std::set<std::string> labels;
  collect_labels(a, &labels);
  collect_labels(b, &labels);
  const std::string target = serialize(b);

  std::set<std::string> seen{serialize(a)};
  std::deque<GenericTree> frontier{a};
  for (int dist = 1; dist <= max_edits; ++dist) {
    std::deque<GenericTree> next;
    for (const auto& tree : frontier) {
      for (auto& edited : single_edits(tree, labels)) {
        std::string key = serialize(edited);
        if (key == target) return dist;
        if (seen.size() >= state_cap) return -2;  // oracle gave up
        if (seen.insert(std::move(key)).second) next.push_back(std::move(edited));
      }
    }
    frontier = std::move(next);
  }
  return -1;
}

}  // namespace oracles
