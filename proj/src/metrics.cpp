#include "symforest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace symforest {

double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() == 0) throw std::invalid_argument("rmse of empty vectors");
  if (y.size() != y_hat.size()) throw std::invalid_argument("rmse length mismatch");
  return std::sqrt((y - y_hat).squaredNorm() / static_cast<double>(y.size()));
}

namespace {

// Postorder flattening with leftmost-leaf-descendant indices and
// keyroots, the inputs of the Zhang-Shasha dynamic program.
struct FlatTree {
  std::vector<std::string> label;  // 1-based
  std::vector<int> lml;            // leftmost leaf of the subtree at i
  std::vector<int> keyroots;
  int n = 0;
};

int flatten(const TreeNode* node, const OperatorSet& ops, FlatTree* out) {
  int leftmost = 0;
  std::string label;
  switch (node->kind) {
    case TreeNode::Kind::terminal:
      label = "x" + std::to_string(node->feature);
      break;
    case TreeNode::Kind::unary:
      leftmost = flatten(node->left.get(), ops, out);
      label = ops.unary()[node->op].name;
      break;
    case TreeNode::Kind::binary:
      leftmost = flatten(node->left.get(), ops, out);
      flatten(node->right.get(), ops, out);
      label = ops.binary()[node->op].name;
      break;
  }
  out->label.push_back(std::move(label));
  out->lml.push_back(leftmost == 0 ? static_cast<int>(out->label.size()) : leftmost);
  return out->lml.back();
}

FlatTree flatten_tree(const SymbolicTree& tree, const OperatorSet& ops) {
  FlatTree out;
  out.label.reserve(16);
  flatten(tree.root().get(), ops, &out);
  out.n = static_cast<int>(out.label.size());
  // keyroots: nodes with no ancestor sharing their leftmost leaf
  std::vector<bool> seen(out.n + 1, false);
  for (int i = out.n; i >= 1; --i) {
    if (!seen[out.lml[i - 1]]) {
      out.keyroots.push_back(i);
      seen[out.lml[i - 1]] = true;
    }
  }
  std::sort(out.keyroots.begin(), out.keyroots.end());
  return out;
}

int zhang_shasha(const FlatTree& a, const FlatTree& b) {
  const int n1 = a.n, n2 = b.n;
  std::vector<std::vector<int>> td(n1 + 1, std::vector<int>(n2 + 1, 0));
  std::vector<std::vector<int>> fd(n1 + 2, std::vector<int>(n2 + 2, 0));

  auto l1 = [&](int i) { return a.lml[i - 1]; };
  auto l2 = [&](int j) { return b.lml[j - 1]; };

  for (int k1 : a.keyroots) {
    for (int k2 : b.keyroots) {
      const int i0 = l1(k1), j0 = l2(k2);
      fd[i0 - 1][j0 - 1] = 0;
      for (int i = i0; i <= k1; ++i) fd[i][j0 - 1] = fd[i - 1][j0 - 1] + 1;
      for (int j = j0; j <= k2; ++j) fd[i0 - 1][j] = fd[i0 - 1][j - 1] + 1;
      for (int i = i0; i <= k1; ++i) {
        for (int j = j0; j <= k2; ++j) {
          if (l1(i) == i0 && l2(j) == j0) {
            const int relabel = a.label[i - 1] == b.label[j - 1] ? 0 : 1;
            fd[i][j] = std::min({fd[i - 1][j] + 1, fd[i][j - 1] + 1, fd[i - 1][j - 1] + relabel});
            td[i][j] = fd[i][j];
          } else {
            fd[i][j] = std::min(
                {fd[i - 1][j] + 1, fd[i][j - 1] + 1, fd[l1(i) - 1][l2(j) - 1] + td[i][j]});
          }
        }
      }
    }
  }
  return td[n1][n2];
}

}  // namespace

int tree_edit_distance(const SymbolicTree& a, const OperatorSet& ops_a, const SymbolicTree& b,
                       const OperatorSet& ops_b) {
  FlatTree fa = flatten_tree(canonical_ordered(a, ops_a), ops_a);
  FlatTree fb = flatten_tree(canonical_ordered(b, ops_b), ops_b);
  return zhang_shasha(fa, fb);
}

int mged(const std::vector<SymbolicTree>& forest, const OperatorSet& ops,
         const SymbolicTree& truth, const OperatorSet& truth_ops) {
  if (forest.empty()) throw std::invalid_argument("mged requires at least one tree");
  int best = std::numeric_limits<int>::max();
  for (const auto& tree : forest)
    best = std::min(best, tree_edit_distance(tree, ops, truth, truth_ops));
  return best;
}

}  // namespace symforest
