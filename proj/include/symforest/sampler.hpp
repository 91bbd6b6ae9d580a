#pragma once

// Metropolis-within-partially-collapsed Gibbs sampler: MH tree updates
// with GROW/PRUNE proposals targeting the collapsed joint marginal
// posterior of the forest, followed by conjugate weight and model
// parameter draws.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "symforest/conjugate.hpp"
#include "symforest/expr.hpp"
#include "symforest/prior.hpp"

namespace symforest {

struct HyperParams {
  ForestHyper forest;            // operator set, split rule, depth cap, concentrations, NIG
  Eigen::VectorXd proposal_w_op; // defaults to the uniform prior weights
  Eigen::VectorXd proposal_w_ft;
  double p_grow = 0.5;           // in (0,1)
  int K = 2;
  int niter = 1000;
  std::uint64_t seed = 0;
  bool random_scan = false;      // trees updated in fixed index order by default

  void validate(const Dataset& data) const;
};

HyperParams default_hyper(const OperatorSet& ops, int p, int K, int niter = 1000,
                          std::uint64_t seed = 0);

// --- tree surgery -----------------------------------------------------

struct GrowEdit {
  SymbolicTree tree;   // result
  int node_depth = 0;  // depth of the replaced terminal
  int old_feature = 0; // feature it held
};
// Replaces the idx-th terminal (preorder, 0-based) with a subtree.
GrowEdit grow_at(const SymbolicTree& tree, int terminal_index, const SymbolicTree& subtree);

struct PruneEdit {
  SymbolicTree tree;     // result
  int node_depth = 0;    // depth of the collapsed nonterminal
  SymbolicTree removed;  // subtree that was rooted there
};
// Collapses the idx-th nonterminal (preorder, 0-based) to a terminal.
PruneEdit prune_at(const SymbolicTree& tree, int nonterminal_index, int feature);

// --- proposals --------------------------------------------------------
//
// Both kernels are exact transition log-probabilities, so the MH ratio
// leaves the collapsed target invariant:
//
//   GROW  T -> T*  (terminal zeta* at depth m replaced by subtree U):
//     log q = [log p_grow, or 0 when S(T) = 0 forces GROW]
//             - log|terminals(T)| + log P_draw(U at depth m)
//     where P_draw is the prior-sampler probability of U under the
//     proposal weights (subtree_log_prob).
//   PRUNE T -> T*  (nonterminal at depth m collapsed to feature f*):
//     log q = log(1 - p_grow) - log|nonterminals(T)| + log w_ft_prop(f*)
//
// The reverse kernel of a GROW is the PRUNE that removes the grown
// subtree (or, for a degenerate GROW whose drawn subtree is a bare
// terminal, the GROW that resamples the original feature); the reverse
// of a PRUNE is the GROW that regrows the removed subtree.

struct Proposal {
  SymbolicTree candidate;
  bool grow = true;
  double log_forward = 0.0;
  double log_reverse = 0.0;
  int node_depth = 0;
  int old_feature = 0;  // GROW: feature replaced
  int new_feature = 0;  // PRUNE: feature assigned
};

Proposal propose_grow(Rng& rng, const SymbolicTree& tree, const HyperParams& hyper);
Proposal propose_prune(Rng& rng, const SymbolicTree& tree, const HyperParams& hyper);

// --- chain ------------------------------------------------------------

struct ChainState {
  std::vector<SymbolicTree> trees;
  std::vector<WeightPair> weights;
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
  Eigen::MatrixXd design;          // cached n x (K+1) design of the current forest
  std::vector<double> tree_parts;  // cached per-tree log marginal parts
  ConjugateSummary summary;        // cached conjugate update of the current forest
  double log_jmp = 0.0;
};

struct RngStreams {
  Rng moves;
  Rng weights;
  Rng params;
};
// Deterministic per-purpose streams split from one seed, so adding
// diagnostics draws never perturbs tree sampling.
RngStreams make_streams(std::uint64_t seed);

struct MoveRecord {
  int tree = 0;  // 0-based
  bool grow = true;
  bool accepted = false;
};

// One MH step on tree j against the collapsed target; updates the state
// caches on acceptance and reports the move.
MoveRecord mh_tree_step(Rng& rng, ChainState& state, int j, const Dataset& data,
                        const HyperParams& hyper);

// Full sweep: (i) MH step per tree, (ii) Dirichlet weight draws per
// tree, (iii) (beta, sigma2) from the cached summary of the updated
// forest.
std::vector<MoveRecord> gibbs_sweep(RngStreams& streams, ChainState& state, const Dataset& data,
                                    const HyperParams& hyper);

struct IterationRecord {
  int iter = 0;  // 1-based
  double log_jmp = 0.0;
  std::vector<std::string> trees;  // canonical strings
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
  std::vector<MoveRecord> moves;
};

struct ChainTrace {
  std::vector<IterationRecord> records;
  std::uint64_t seed = 0;
  long grow_proposed = 0;
  long grow_accepted = 0;
  long prune_proposed = 0;
  long prune_accepted = 0;
};

ChainState init_chain_state(RngStreams& streams, const Dataset& data, const HyperParams& hyper);
ChainTrace run_chain(const Dataset& data, const HyperParams& hyper);

// Independent chains (seed, seed+1, ...) over the shared read-only
// dataset, run concurrently.
std::vector<ChainTrace> run_chains(const Dataset& data, const HyperParams& hyper, int chains);

}  // namespace symforest
