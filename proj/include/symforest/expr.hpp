#pragma once

// Symbolic expression trees over a configurable operator set:
// representation, evaluation, counting, canonical printing, parsing,
// and commutative canonicalization.

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace symforest {

struct UnaryOp {
  std::string name;
  double (*fn)(double);
};

struct BinaryOp {
  std::string name;
  char symbol;       // infix rendering, e.g. '+' or '*'
  bool commutative;
  double (*fn)(double, double);
};

// A subset of the known operator catalog. Identifiers are unique across
// the union of unary and binary lists; flat indices run unary first.
class OperatorSet {
 public:
  // exp, inv, neg, sin, cos, pow2, pow3 plus add, mul.
  static OperatorSet standard();
  // Builds a set from catalog names; throws std::invalid_argument on
  // unknown or duplicate names or an empty list.
  static OperatorSet from_names(const std::vector<std::string>& names);

  const std::vector<UnaryOp>& unary() const { return unary_; }
  const std::vector<BinaryOp>& binary() const { return binary_; }
  int size() const { return static_cast<int>(unary_.size() + binary_.size()); }

  int unary_index(std::string_view name) const;   // -1 if absent
  int binary_index(std::string_view name) const;  // -1 if absent
  // Flat index into [unary..., binary...] for summaries.
  int flat_index(bool is_binary, int op) const {
    return is_binary ? static_cast<int>(unary_.size()) + op : op;
  }
  std::string flat_name(int flat) const;

 private:
  std::vector<UnaryOp> unary_;
  std::vector<BinaryOp> binary_;
};

struct TreeNode;
using NodePtr = std::shared_ptr<const TreeNode>;

struct TreeNode {
  enum class Kind { terminal, unary, binary };
  Kind kind;
  int op = -1;       // index into OperatorSet::unary()/binary()
  int feature = 0;   // 1-based feature index, terminals only
  NodePtr left;      // unary child or binary left
  NodePtr right;     // binary right
};

// Immutable value type; structural sharing makes edits cheap.
class SymbolicTree {
 public:
  SymbolicTree() = default;
  explicit SymbolicTree(NodePtr root) : root_(std::move(root)) {}
  const NodePtr& root() const { return root_; }
  bool empty() const { return root_ == nullptr; }

 private:
  NodePtr root_;
};

SymbolicTree make_terminal(int feature);
SymbolicTree make_unary(int op, const SymbolicTree& child);
SymbolicTree make_binary(int op, const SymbolicTree& left, const SymbolicTree& right);

int depth(const SymbolicTree& tree);              // longest root-to-terminal path, root at 0
int nonterminal_count(const SymbolicTree& tree);  // S(T)
int terminal_count(const SymbolicTree& tree);
bool structurally_equal(const SymbolicTree& a, const SymbolicTree& b);

struct TreeSummary {
  std::vector<int> op_counts;              // per flat operator index, sums to S(T)
  std::vector<int> feature_counts;         // per feature (1-based -> index 0..p-1)
  std::vector<int> nonterminals_at_depth;  // indexed by depth m
  std::vector<int> terminals_at_depth;

  int nonterminal_total() const;
  int terminal_total() const;
};

TreeSummary summarize(const SymbolicTree& tree, const OperatorSet& ops, int p);

// Recursive evaluation at a single feature row (1-based indices into row).
// Non-finite results (inv at 0, exp overflow, ...) propagate as IEEE
// non-finite values rather than errors; an out-of-range feature index
// throws std::out_of_range.
double evaluate(const SymbolicTree& tree, const OperatorSet& ops,
                const Eigen::Ref<const Eigen::RowVectorXd>& row);

// Column evaluation over an n x p matrix. Returns true when every entry
// is finite. The default entry point parallelizes across rows with
// OpenMP for large n; evaluate_column_serial is the reference kernel and
// must produce bit-identical output.
bool evaluate_column(const SymbolicTree& tree, const OperatorSet& ops,
                     const Eigen::MatrixXd& X, Eigen::Ref<Eigen::VectorXd> out);
bool evaluate_column_serial(const SymbolicTree& tree, const OperatorSet& ops,
                            const Eigen::MatrixXd& X, Eigen::Ref<Eigen::VectorXd> out);

// Deterministic fully parenthesized infix rendering: features as x1..xp,
// unary operators as calls, binary operators infix. Operand order is
// preserved; see canonical_ordered for the commutative normal form.
std::string canonical_string(const SymbolicTree& tree, const OperatorSet& ops);

// Recursively sorts operands of commutative binary operators by the
// canonical string of each subtree. Idempotent.
SymbolicTree canonical_ordered(const SymbolicTree& tree, const OperatorSet& ops);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Grammar (whitespace-insensitive, '*' binds tighter than '+', both
// left-associative):
//   expr       := term (('+') term)*
//   term       := factor (('*') factor)*
//   factor     := feature | unary_call | '(' expr ')'
//   unary_call := IDENT '(' expr ')'
//   feature    := 'x' INTEGER>=1
// Round trip: parse_expression(canonical_string(T)) is structurally T.
SymbolicTree parse_expression(std::string_view text, int p, const OperatorSet& ops);

}  // namespace symforest
