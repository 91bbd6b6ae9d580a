#include "symforest/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <stdexcept>

namespace symforest {

namespace {

double op_exp(double x) { return std::exp(x); }
double op_inv(double x) { return 1.0 / x; }
double op_neg(double x) { return -x; }
double op_sin(double x) { return std::sin(x); }
double op_cos(double x) { return std::cos(x); }
double op_pow2(double x) { return x * x; }
double op_pow3(double x) { return x * x * x; }
double op_add(double a, double b) { return a + b; }
double op_mul(double a, double b) { return a * b; }

const std::vector<UnaryOp>& unary_catalog() {
  static const std::vector<UnaryOp> catalog = {
      {"exp", op_exp}, {"inv", op_inv},   {"neg", op_neg},  {"sin", op_sin},
      {"cos", op_cos}, {"pow2", op_pow2}, {"pow3", op_pow3}};
  return catalog;
}

const std::vector<BinaryOp>& binary_catalog() {
  static const std::vector<BinaryOp> catalog = {{"add", '+', true, op_add},
                                                {"mul", '*', true, op_mul}};
  return catalog;
}

}  // namespace

OperatorSet OperatorSet::standard() {
  OperatorSet set;
  set.unary_ = unary_catalog();
  set.binary_ = binary_catalog();
  return set;
}

OperatorSet OperatorSet::from_names(const std::vector<std::string>& names) {
  if (names.empty()) throw std::invalid_argument("operator set must not be empty");
  OperatorSet set;
  for (const auto& name : names) {
    if (set.unary_index(name) >= 0 || set.binary_index(name) >= 0)
      throw std::invalid_argument("duplicate operator: " + name);
    bool found = false;
    for (const auto& u : unary_catalog())
      if (u.name == name) {
        set.unary_.push_back(u);
        found = true;
        break;
      }
    if (!found)
      for (const auto& b : binary_catalog())
        if (b.name == name) {
          set.binary_.push_back(b);
          found = true;
          break;
        }
    if (!found) throw std::invalid_argument("unknown operator: " + name);
  }
  return set;
}

int OperatorSet::unary_index(std::string_view name) const {
  for (std::size_t i = 0; i < unary_.size(); ++i)
    if (unary_[i].name == name) return static_cast<int>(i);
  return -1;
}

int OperatorSet::binary_index(std::string_view name) const {
  for (std::size_t i = 0; i < binary_.size(); ++i)
    if (binary_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::string OperatorSet::flat_name(int flat) const {
  const int nu = static_cast<int>(unary_.size());
  if (flat < 0 || flat >= size()) throw std::out_of_range("operator index");
  return flat < nu ? unary_[flat].name : binary_[flat - nu].name;
}

SymbolicTree make_terminal(int feature) {
  if (feature < 1) throw std::invalid_argument("feature index must be >= 1");
  auto node = std::make_shared<TreeNode>();
  node->kind = TreeNode::Kind::terminal;
  node->feature = feature;
  return SymbolicTree(node);
}

SymbolicTree make_unary(int op, const SymbolicTree& child) {
  auto node = std::make_shared<TreeNode>();
  node->kind = TreeNode::Kind::unary;
  node->op = op;
  node->left = child.root();
  return SymbolicTree(node);
}

SymbolicTree make_binary(int op, const SymbolicTree& left, const SymbolicTree& right) {
  auto node = std::make_shared<TreeNode>();
  node->kind = TreeNode::Kind::binary;
  node->op = op;
  node->left = left.root();
  node->right = right.root();
  return SymbolicTree(node);
}

namespace {

int depth_of(const TreeNode* node) {
  if (node->kind == TreeNode::Kind::terminal) return 0;
  int d = depth_of(node->left.get());
  if (node->kind == TreeNode::Kind::binary) d = std::max(d, depth_of(node->right.get()));
  return d + 1;
}

void count_nodes(const TreeNode* node, int* nonterminals, int* terminals) {
  if (node->kind == TreeNode::Kind::terminal) {
    ++*terminals;
    return;
  }
  ++*nonterminals;
  count_nodes(node->left.get(), nonterminals, terminals);
  if (node->kind == TreeNode::Kind::binary) count_nodes(node->right.get(), nonterminals, terminals);
}

}  // namespace

int depth(const SymbolicTree& tree) { return depth_of(tree.root().get()); }

int nonterminal_count(const SymbolicTree& tree) {
  int nt = 0, t = 0;
  count_nodes(tree.root().get(), &nt, &t);
  return nt;
}

int terminal_count(const SymbolicTree& tree) {
  int nt = 0, t = 0;
  count_nodes(tree.root().get(), &nt, &t);
  return t;
}

bool structurally_equal(const SymbolicTree& a, const SymbolicTree& b) {
  struct Impl {
    static bool eq(const TreeNode* x, const TreeNode* y) {
      if (x == y) return true;
      if (x->kind != y->kind) return false;
      switch (x->kind) {
        case TreeNode::Kind::terminal:
          return x->feature == y->feature;
        case TreeNode::Kind::unary:
          return x->op == y->op && eq(x->left.get(), y->left.get());
        case TreeNode::Kind::binary:
          return x->op == y->op && eq(x->left.get(), y->left.get()) &&
                 eq(x->right.get(), y->right.get());
      }
      return false;
    }
  };
  return Impl::eq(a.root().get(), b.root().get());
}

int TreeSummary::nonterminal_total() const {
  int s = 0;
  for (int c : op_counts) s += c;
  return s;
}

int TreeSummary::terminal_total() const {
  int s = 0;
  for (int c : feature_counts) s += c;
  return s;
}

namespace {

void summarize_node(const TreeNode* node, const OperatorSet& ops, int m, TreeSummary* out) {
  if (static_cast<int>(out->nonterminals_at_depth.size()) <= m) {
    out->nonterminals_at_depth.resize(m + 1, 0);
    out->terminals_at_depth.resize(m + 1, 0);
  }
  if (node->kind == TreeNode::Kind::terminal) {
    if (node->feature < 1 || node->feature > static_cast<int>(out->feature_counts.size()))
      throw std::out_of_range("feature index exceeds p");
    ++out->feature_counts[node->feature - 1];
    ++out->terminals_at_depth[m];
    return;
  }
  ++out->op_counts[ops.flat_index(node->kind == TreeNode::Kind::binary, node->op)];
  ++out->nonterminals_at_depth[m];
  summarize_node(node->left.get(), ops, m + 1, out);
  if (node->kind == TreeNode::Kind::binary) summarize_node(node->right.get(), ops, m + 1, out);
}

}  // namespace

TreeSummary summarize(const SymbolicTree& tree, const OperatorSet& ops, int p) {
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  TreeSummary out;
  out.op_counts.assign(ops.size(), 0);
  out.feature_counts.assign(p, 0);
  summarize_node(tree.root().get(), ops, 0, &out);
  return out;
}

namespace {

// Evaluation against a matrix row by index avoids copying rows out of
// column-major storage.
double eval_node(const TreeNode* node, const OperatorSet& ops, const Eigen::MatrixXd& X,
                 Eigen::Index i) {
  switch (node->kind) {
    case TreeNode::Kind::terminal:
      if (node->feature < 1 || node->feature > X.cols())
        throw std::out_of_range("feature index exceeds p");
      return X(i, node->feature - 1);
    case TreeNode::Kind::unary:
      return ops.unary()[node->op].fn(eval_node(node->left.get(), ops, X, i));
    case TreeNode::Kind::binary:
      return ops.binary()[node->op].fn(eval_node(node->left.get(), ops, X, i),
                                       eval_node(node->right.get(), ops, X, i));
  }
  return 0.0;
}

void check_features(const TreeNode* node, Eigen::Index p) {
  if (node->kind == TreeNode::Kind::terminal) {
    if (node->feature < 1 || node->feature > p) throw std::out_of_range("feature index exceeds p");
    return;
  }
  check_features(node->left.get(), p);
  if (node->kind == TreeNode::Kind::binary) check_features(node->right.get(), p);
}

}  // namespace

double evaluate(const SymbolicTree& tree, const OperatorSet& ops,
                const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  Eigen::MatrixXd m = row;
  return eval_node(tree.root().get(), ops, m, 0);
}

bool evaluate_column_serial(const SymbolicTree& tree, const OperatorSet& ops,
                            const Eigen::MatrixXd& X, Eigen::Ref<Eigen::VectorXd> out) {
  check_features(tree.root().get(), X.cols());
  const Eigen::Index n = X.rows();
  bool finite = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = eval_node(tree.root().get(), ops, X, i);
    out[i] = v;
    finite = finite && std::isfinite(v);
  }
  return finite;
}

bool evaluate_column(const SymbolicTree& tree, const OperatorSet& ops, const Eigen::MatrixXd& X,
                     Eigen::Ref<Eigen::VectorXd> out) {
  check_features(tree.root().get(), X.cols());
  const Eigen::Index n = X.rows();
  bool finite = true;
  const TreeNode* root = tree.root().get();
#pragma omp parallel for schedule(static) reduction(&& : finite) if (n >= 4096)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = eval_node(root, ops, X, i);
    out[i] = v;
    finite = finite && std::isfinite(v);
  }
  return finite;
}

namespace {

void print_node(const TreeNode* node, const OperatorSet& ops, std::string* out) {
  switch (node->kind) {
    case TreeNode::Kind::terminal:
      *out += 'x';
      *out += std::to_string(node->feature);
      return;
    case TreeNode::Kind::unary:
      *out += ops.unary()[node->op].name;
      *out += '(';
      print_node(node->left.get(), ops, out);
      *out += ')';
      return;
    case TreeNode::Kind::binary:
      *out += '(';
      print_node(node->left.get(), ops, out);
      *out += ops.binary()[node->op].symbol;
      print_node(node->right.get(), ops, out);
      *out += ')';
      return;
  }
}

}  // namespace

std::string canonical_string(const SymbolicTree& tree, const OperatorSet& ops) {
  std::string out;
  print_node(tree.root().get(), ops, &out);
  return out;
}

namespace {

// Operands of commutative operators compare by their canonical string
// with the enclosing parentheses stripped, so exp(x1) sorts before
// (x1*x2).
NodePtr order_node(const NodePtr& node, const OperatorSet& ops, std::string* key) {
  switch (node->kind) {
    case TreeNode::Kind::terminal:
      *key = "x" + std::to_string(node->feature);
      return node;
    case TreeNode::Kind::unary: {
      std::string child_key;
      NodePtr child = order_node(node->left, ops, &child_key);
      SymbolicTree ordered_child(child);
      *key = ops.unary()[node->op].name + "(" + canonical_string(ordered_child, ops) + ")";
      if (child == node->left) return node;
      auto copy = std::make_shared<TreeNode>(*node);
      copy->left = child;
      return copy;
    }
    case TreeNode::Kind::binary: {
      std::string lkey, rkey;
      NodePtr left = order_node(node->left, ops, &lkey);
      NodePtr right = order_node(node->right, ops, &rkey);
      const BinaryOp& op = ops.binary()[node->op];
      const std::string lrender = canonical_string(SymbolicTree(left), ops);
      const std::string rrender = canonical_string(SymbolicTree(right), ops);
      bool swap = op.commutative && rkey < lkey;
      if (swap) std::swap(left, right);
      *key = swap ? rrender + op.symbol + lrender : lrender + op.symbol + rrender;
      if (!swap && left == node->left && right == node->right) return node;
      auto copy = std::make_shared<TreeNode>(*node);
      copy->left = left;
      copy->right = right;
      return copy;
    }
  }
  return node;
}

}  // namespace

SymbolicTree canonical_ordered(const SymbolicTree& tree, const OperatorSet& ops) {
  std::string repr;
  return SymbolicTree(order_node(tree.root(), ops, &repr));
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, int p, const OperatorSet& ops) : text_(text), p_(p), ops_(ops) {}

  SymbolicTree parse() {
    SymbolicTree tree = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return tree;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message + " at position " + std::to_string(pos_), pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  SymbolicTree parse_expr() {
    SymbolicTree left = parse_term();
    while (peek() == '+') {
      ++pos_;
      int op = ops_.binary_index("add");
      if (op < 0) fail("operator 'add' not in operator set");
      left = make_binary(op, left, parse_term());
    }
    return left;
  }

  SymbolicTree parse_term() {
    SymbolicTree left = parse_factor();
    while (peek() == '*') {
      ++pos_;
      int op = ops_.binary_index("mul");
      if (op < 0) fail("operator 'mul' not in operator set");
      left = make_binary(op, left, parse_factor());
    }
    return left;
  }

  SymbolicTree parse_factor() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (consume('(')) {
      SymbolicTree inner = parse_expr();
      if (!consume(')')) fail("expected ')'");
      return inner;
    }
    // IDENT or feature; a feature is 'x' followed directly by digits and
    // not followed by '(' or more letters.
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail("expected feature, function call, or '('");
    std::string_view ident = text_.substr(start, pos_ - start);

    if (ident.size() >= 2 && ident[0] == 'x' &&
        std::all_of(ident.begin() + 1, ident.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      int feature = 0;
      auto res = std::from_chars(ident.data() + 1, ident.data() + ident.size(), feature);
      if (res.ec != std::errc() || feature < 1) fail("invalid feature index");
      if (feature > p_) fail("feature index " + std::to_string(feature) + " exceeds p");
      return make_terminal(feature);
    }

    int op = ops_.unary_index(ident);
    if (op < 0) fail("unknown operator '" + std::string(ident) + "'");
    if (!consume('(')) fail("expected '(' after '" + std::string(ident) + "'");
    SymbolicTree inner = parse_expr();
    if (!consume(')')) fail("expected ')'");
    return make_unary(op, inner);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int p_;
  const OperatorSet& ops_;
};

}  // namespace

SymbolicTree parse_expression(std::string_view text, int p, const OperatorSet& ops) {
  return Parser(text, p, ops).parse();
}

}  // namespace symforest
