#include "symforest/sampler.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace symforest {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void HyperParams::validate(const Dataset& data) const {
  data.validate();
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (niter < 1) throw std::invalid_argument("niter must be >= 1");
  if (!(p_grow > 0.0 && p_grow < 1.0)) throw std::invalid_argument("p_grow must be in (0,1)");
  if (forest.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (forest.conc_ft.size() != data.p())
    throw std::invalid_argument("feature concentration length does not match p");
  if (forest.conc_op.size() != forest.ops.size())
    throw std::invalid_argument("operator concentration length does not match |O|");
  if (forest.nig.mu.size() != K + 1)
    throw std::invalid_argument("NIG dimension does not match K+1");
  if (proposal_w_op.size() != forest.ops.size() || proposal_w_ft.size() != data.p())
    throw std::invalid_argument("proposal weight length mismatch");
  validate_simplex(proposal_w_op, 1e-9);
  validate_simplex(proposal_w_ft, 1e-9);
  validate_concentrations(forest.conc_op);
  validate_concentrations(forest.conc_ft);
}

HyperParams default_hyper(const OperatorSet& ops, int p, int K, int niter, std::uint64_t seed) {
  HyperParams hyper;
  hyper.forest = default_forest_hyper(ops, p, K);
  hyper.proposal_w_op = Eigen::VectorXd::Constant(ops.size(), 1.0 / ops.size());
  hyper.proposal_w_ft = Eigen::VectorXd::Constant(p, 1.0 / p);
  hyper.K = K;
  hyper.niter = niter;
  hyper.seed = seed;
  return hyper;
}

namespace {

// Rebuilds the path to the target node, sharing every untouched subtree.
// target counts terminals (want_terminal) or nonterminals in preorder;
// replacement supplies the new subtree once the target is reached.
struct NodeEditor {
  bool want_terminal;
  int remaining;
  NodePtr replacement;
  int found_depth = -1;
  NodePtr found_node;

  NodePtr rebuild(const NodePtr& node, int depth) {
    const bool is_terminal = node->kind == TreeNode::Kind::terminal;
    if (is_terminal == want_terminal) {
      if (remaining == 0) {
        --remaining;
        found_depth = depth;
        found_node = node;
        return replacement;
      }
      --remaining;
    }
    if (is_terminal) return node;
    NodePtr left = rebuild(node->left, depth + 1);
    NodePtr right = node->right;
    if (node->kind == TreeNode::Kind::binary && remaining >= 0)
      right = rebuild(node->right, depth + 1);
    if (left == node->left && right == node->right) return node;
    auto copy = std::make_shared<TreeNode>(*node);
    copy->left = left;
    copy->right = right;
    return copy;
  }
};

}  // namespace

GrowEdit grow_at(const SymbolicTree& tree, int terminal_index, const SymbolicTree& subtree) {
  if (terminal_index < 0 || terminal_index >= terminal_count(tree))
    throw std::out_of_range("terminal index");
  NodeEditor editor{true, terminal_index, subtree.root()};
  NodePtr root = editor.rebuild(tree.root(), 0);
  GrowEdit edit;
  edit.tree = SymbolicTree(root);
  edit.node_depth = editor.found_depth;
  edit.old_feature = editor.found_node->feature;
  return edit;
}

PruneEdit prune_at(const SymbolicTree& tree, int nonterminal_index, int feature) {
  if (nonterminal_index < 0 || nonterminal_index >= nonterminal_count(tree))
    throw std::out_of_range("nonterminal index");
  NodeEditor editor{false, nonterminal_index, make_terminal(feature).root()};
  NodePtr root = editor.rebuild(tree.root(), 0);
  PruneEdit edit;
  edit.tree = SymbolicTree(root);
  edit.node_depth = editor.found_depth;
  edit.removed = SymbolicTree(editor.found_node);
  return edit;
}

namespace {

double move_choice_log(const SymbolicTree& tree, const HyperParams& hyper, bool grow) {
  // PRUNE is infeasible at a bare terminal, so GROW is forced there and
  // carries no move-choice factor.
  if (nonterminal_count(tree) == 0) return grow ? 0.0 : kNegInf;
  return grow ? std::log(hyper.p_grow) : std::log1p(-hyper.p_grow);
}

double draw_log_prob(const SymbolicTree& subtree, int root_depth, const HyperParams& hyper) {
  return subtree_log_prob(subtree, hyper.forest.ops, hyper.proposal_w_op, hyper.proposal_w_ft,
                          hyper.forest.rule, hyper.forest.max_depth, root_depth);
}

}  // namespace

Proposal propose_grow(Rng& rng, const SymbolicTree& tree, const HyperParams& hyper) {
  const int n_terminals = terminal_count(tree);
  std::uniform_int_distribution<int> pick(0, n_terminals - 1);
  const int index = pick(rng);

  // Depth of the picked terminal bounds the regrow budget; at the cap
  // the drawn subtree degenerates to a feature resample.
  GrowEdit probe = grow_at(tree, index, make_terminal(1));
  SymbolicTree subtree =
      sample_tree_from_prior(rng, hyper.forest.ops, hyper.proposal_w_op, hyper.proposal_w_ft,
                             hyper.forest.rule, hyper.forest.max_depth, probe.node_depth);

  Proposal prop;
  prop.grow = true;
  prop.node_depth = probe.node_depth;
  prop.old_feature = probe.old_feature;
  prop.candidate = grow_at(tree, index, subtree).tree;
  prop.log_forward = move_choice_log(tree, hyper, true) - std::log(n_terminals) +
                     draw_log_prob(subtree, prop.node_depth, hyper);

  if (subtree.root()->kind == TreeNode::Kind::terminal) {
    // Degenerate GROW: the reverse move is the GROW that resamples the
    // original feature at the same (still terminal) node.
    prop.log_reverse = move_choice_log(prop.candidate, hyper, true) -
                       std::log(terminal_count(prop.candidate)) +
                       draw_log_prob(make_terminal(prop.old_feature), prop.node_depth, hyper);
  } else {
    prop.log_reverse = std::log1p(-hyper.p_grow) -
                       std::log(nonterminal_count(prop.candidate)) +
                       std::log(hyper.proposal_w_ft[prop.old_feature - 1]);
  }
  return prop;
}

Proposal propose_prune(Rng& rng, const SymbolicTree& tree, const HyperParams& hyper) {
  const int n_nonterminals = nonterminal_count(tree);
  if (n_nonterminals == 0)
    throw std::logic_error("PRUNE is not applicable to a bare terminal");
  std::uniform_int_distribution<int> pick(0, n_nonterminals - 1);
  const int index = pick(rng);
  const int feature = sample_categorical(rng, hyper.proposal_w_ft) + 1;

  PruneEdit edit = prune_at(tree, index, feature);
  Proposal prop;
  prop.grow = false;
  prop.node_depth = edit.node_depth;
  prop.new_feature = feature;
  prop.candidate = edit.tree;
  prop.log_forward = std::log1p(-hyper.p_grow) - std::log(n_nonterminals) +
                     std::log(hyper.proposal_w_ft[feature - 1]);
  prop.log_reverse = move_choice_log(prop.candidate, hyper, true) -
                     std::log(terminal_count(prop.candidate)) +
                     draw_log_prob(edit.removed, edit.node_depth, hyper);
  return prop;
}

namespace {

void refresh_state_caches(ChainState& state, const Dataset& data, const HyperParams& hyper) {
  ForestEval eval = evaluate_forest(state.trees, data, hyper.forest);
  state.design = std::move(eval.design);
  state.tree_parts = std::move(eval.tree_parts);
  state.log_jmp = eval.log_jmp;
  if (eval.summary) state.summary = std::move(*eval.summary);
}

}  // namespace

MoveRecord mh_tree_step(Rng& rng, ChainState& state, int j, const Dataset& data,
                        const HyperParams& hyper) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const SymbolicTree& tree = state.trees[j];
  const bool forced_grow = nonterminal_count(tree) == 0;
  const bool grow = forced_grow || unif(rng) < hyper.p_grow;
  Proposal prop = grow ? propose_grow(rng, tree, hyper) : propose_prune(rng, tree, hyper);

  MoveRecord record;
  record.tree = j;
  record.grow = grow;

  // Candidate forest differs in column j+1 of the cached design only.
  Eigen::VectorXd column(data.n());
  const bool finite = evaluate_column(prop.candidate, hyper.forest.ops, data.X, column);

  double cand_log_jmp = kNegInf;
  double cand_tree_part = 0.0;
  ConjugateSummary cand_summary;
  bool cand_valid = false;
  if (finite) {
    Eigen::MatrixXd design = state.design;
    design.col(j + 1) = column;
    try {
      cand_summary = nig_update(hyper.forest.nig, design, data.y);
      cand_tree_part = log_tree_marginal_part(
          summarize(prop.candidate, hyper.forest.ops, static_cast<int>(data.p())), hyper.forest);
      cand_log_jmp = log_model_part(cand_summary) + cand_tree_part;
      for (int l = 0; l < hyper.K; ++l)
        if (l != j) cand_log_jmp += state.tree_parts[l];
      cand_valid = std::isfinite(cand_log_jmp);
    } catch (const DegenerateForestError&) {
      cand_valid = false;
    }
  }

  if (cand_valid) {
    const double log_accept =
        cand_log_jmp - state.log_jmp + prop.log_reverse - prop.log_forward;
    if (std::log(unif(rng)) < log_accept) {
      record.accepted = true;
      state.trees[j] = prop.candidate;
      state.design.col(j + 1) = column;
      state.tree_parts[j] = cand_tree_part;
      state.summary = std::move(cand_summary);
      state.log_jmp = cand_log_jmp;
    }
  } else {
    // Pathological candidates (non-finite column or degenerate update)
    // have -inf posterior and are always rejected; still consume the
    // acceptance uniform so move accounting stays uniform.
    unif(rng);
  }
  return record;
}

std::vector<MoveRecord> gibbs_sweep(RngStreams& streams, ChainState& state, const Dataset& data,
                                    const HyperParams& hyper) {
  std::vector<MoveRecord> moves;
  moves.reserve(hyper.K);

  std::vector<int> order(hyper.K);
  for (int j = 0; j < hyper.K; ++j) order[j] = j;
  if (hyper.random_scan) {
    for (int j = hyper.K - 1; j > 0; --j) {
      std::uniform_int_distribution<int> pick(0, j);
      std::swap(order[j], order[pick(streams.moves)]);
    }
  }

  for (int j : order) moves.push_back(mh_tree_step(streams.moves, state, j, data, hyper));

  for (int j = 0; j < hyper.K; ++j) {
    TreeSummary summary = summarize(state.trees[j], hyper.forest.ops, static_cast<int>(data.p()));
    state.weights[j] =
        sample_weights_full_conditional(streams.weights, summary, hyper.forest.conc_op,
                                        hyper.forest.conc_ft);
  }

  ModelParams params = sample_model_params_full_conditional(streams.params, state.summary);
  state.beta = std::move(params.beta);
  state.sigma2 = params.sigma2;

#ifndef NDEBUG
  {
    const double fresh = log_jmp_ensemble(state.trees, data, hyper.forest);
    assert(std::isfinite(state.log_jmp) && std::abs(fresh - state.log_jmp) <
                                               1e-6 * (1.0 + std::abs(fresh)));
  }
#endif
  return moves;
}

RngStreams make_streams(std::uint64_t seed) {
  RngStreams streams;
  const auto lo = static_cast<std::uint32_t>(seed & 0xffffffffu);
  const auto hi = static_cast<std::uint32_t>(seed >> 32);
  std::seed_seq moves_seq{lo, hi, 0x6d6f7665u};
  std::seed_seq weights_seq{lo, hi, 0x77656967u};
  std::seed_seq params_seq{lo, hi, 0x70617261u};
  streams.moves.seed(moves_seq);
  streams.weights.seed(weights_seq);
  streams.params.seed(params_seq);
  return streams;
}

ChainState init_chain_state(RngStreams& streams, const Dataset& data, const HyperParams& hyper) {
  ChainState state;
  state.trees.resize(hyper.K);
  state.weights.resize(hyper.K);
  state.tree_parts.assign(hyper.K, 0.0);

  // Each tree starts as a bare terminal drawn from the proposal feature
  // weights and immediately receives one GROW; redraw the forest if the
  // initial design is pathological (e.g. an overflowing exp chain).
  const int max_attempts = 200;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (int j = 0; j < hyper.K; ++j) {
      const int feature = sample_categorical(streams.moves, hyper.proposal_w_ft) + 1;
      SymbolicTree bare = make_terminal(feature);
      SymbolicTree subtree =
          sample_tree_from_prior(streams.moves, hyper.forest.ops, hyper.proposal_w_op,
                                 hyper.proposal_w_ft, hyper.forest.rule, hyper.forest.max_depth, 0);
      state.trees[j] = grow_at(bare, 0, subtree).tree;
    }
    refresh_state_caches(state, data, hyper);
    if (std::isfinite(state.log_jmp)) break;
  }
  if (!std::isfinite(state.log_jmp))
    throw std::runtime_error("failed to initialize a nondegenerate forest");

  for (int j = 0; j < hyper.K; ++j) {
    TreeSummary summary = summarize(state.trees[j], hyper.forest.ops, static_cast<int>(data.p()));
    state.weights[j] = sample_weights_full_conditional(streams.weights, summary,
                                                       hyper.forest.conc_op, hyper.forest.conc_ft);
  }
  ModelParams params = sample_model_params_full_conditional(streams.params, state.summary);
  state.beta = std::move(params.beta);
  state.sigma2 = params.sigma2;
  return state;
}

ChainTrace run_chain(const Dataset& data, const HyperParams& hyper) {
  hyper.validate(data);
  RngStreams streams = make_streams(hyper.seed);
  ChainState state = init_chain_state(streams, data, hyper);

  ChainTrace trace;
  trace.seed = hyper.seed;
  trace.records.reserve(hyper.niter);
  for (int iter = 1; iter <= hyper.niter; ++iter) {
    std::vector<MoveRecord> moves = gibbs_sweep(streams, state, data, hyper);
    for (const MoveRecord& move : moves) {
      if (move.grow) {
        ++trace.grow_proposed;
        trace.grow_accepted += move.accepted ? 1 : 0;
      } else {
        ++trace.prune_proposed;
        trace.prune_accepted += move.accepted ? 1 : 0;
      }
    }
    IterationRecord record;
    record.iter = iter;
    record.log_jmp = state.log_jmp;
    record.trees.reserve(hyper.K);
    for (const auto& tree : state.trees)
      record.trees.push_back(canonical_string(tree, hyper.forest.ops));
    record.beta = state.beta;
    record.sigma2 = state.sigma2;
    record.moves = std::move(moves);
    trace.records.push_back(std::move(record));
  }
  return trace;
}

std::vector<ChainTrace> run_chains(const Dataset& data, const HyperParams& hyper, int chains) {
  if (chains < 1) throw std::invalid_argument("chains must be >= 1");
  std::vector<ChainTrace> traces(chains);
#pragma omp parallel for schedule(dynamic) if (chains > 1)
  for (int c = 0; c < chains; ++c) {
    HyperParams chain_hyper = hyper;
    chain_hyper.seed = hyper.seed + static_cast<std::uint64_t>(c);
    traces[c] = run_chain(data, chain_hyper);
  }
  return traces;
}

}  // namespace symforest
