#include "symforest/selection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "symforest/metrics.hpp"

namespace symforest {

namespace {

std::string forest_key(const std::vector<std::string>& expressions) {
  std::string key;
  for (const auto& expr : expressions) {
    key += expr;
    key += '|';
  }
  return key;
}

}  // namespace

RankedModels rank_models(const std::vector<ChainTrace>& traces, const Dataset& data,
                         const HyperParams& hyper, int r,
                         const std::optional<SymbolicTree>& truth) {
  if (r <= 0) throw std::invalid_argument("r must be >= 1");
  bool any_records = false;
  for (const auto& trace : traces) any_records = any_records || !trace.records.empty();
  if (!any_records) throw std::invalid_argument("empty trace");

  struct Visited {
    std::vector<std::string> expressions;
    int first_chain;
    int first_iter;
    std::size_t order;
  };
  std::map<std::string, Visited> visited;
  for (std::size_t c = 0; c < traces.size(); ++c) {
    for (const IterationRecord& record : traces[c].records) {
      std::string key = forest_key(record.trees);
      if (!visited.count(key))
        visited.emplace(std::move(key), Visited{record.trees, static_cast<int>(c), record.iter,
                                                visited.size()});
    }
  }

  struct Scored {
    const Visited* forest;
    std::vector<SymbolicTree> trees;
    double log_jmp;
    double log_marg_lik;
  };
  std::vector<Scored> scored;
  scored.reserve(visited.size());
  for (const auto& [key, info] : visited) {
    Scored s;
    s.forest = &info;
    for (const auto& expr : info.expressions)
      s.trees.push_back(parse_expression(expr, static_cast<int>(data.p()), hyper.forest.ops));
    ForestEval eval = evaluate_forest(s.trees, data, hyper.forest);
    s.log_jmp = eval.log_jmp;
    s.log_marg_lik = eval.log_marg_lik;
    scored.push_back(std::move(s));
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.log_jmp != b.log_jmp) return a.log_jmp > b.log_jmp;
    if (a.forest->first_chain != b.forest->first_chain)
      return a.forest->first_chain < b.forest->first_chain;
    if (a.forest->first_iter != b.forest->first_iter)
      return a.forest->first_iter < b.forest->first_iter;
    return a.forest->order < b.forest->order;
  });

  RankedModels out;
  out.r = r;
  const std::size_t keep = std::min<std::size_t>(r, scored.size());
  for (std::size_t i = 0; i < keep; ++i) {
    const Scored& s = scored[i];
    RankedEntry entry;
    entry.rank = static_cast<int>(i) + 1;
    entry.expressions = s.forest->expressions;
    entry.log_jmp = s.log_jmp;
    entry.log_marg_lik = s.log_marg_lik;
    entry.first_chain = s.forest->first_chain;
    entry.first_iter = s.forest->first_iter;
    FittedValues fit = fitted_values(s.trees, data, hyper.forest);
    entry.intercept = fit.beta_hat[0];
    entry.beta_hat = fit.beta_hat.tail(fit.beta_hat.size() - 1);
    entry.rmse = rmse(data.y, fit.y_hat);
    if (truth) entry.mged = mged(s.trees, hyper.forest.ops, *truth, hyper.forest.ops);
    out.entries.push_back(std::move(entry));
  }
  return out;
}

FittedValues fitted_values(const std::vector<SymbolicTree>& trees, const Dataset& data,
                           const ForestHyper& hyper) {
  DesignResult design = design_matrix(trees, hyper.ops, data.X);
  if (!design.all_finite)
    throw DegenerateForestError("forest evaluates to non-finite values on the data");
  ConjugateSummary summary = nig_update(hyper.nig, design.T, data.y);
  FittedValues out;
  out.beta_hat = summary.mu_star;
  out.y_hat = design.T * summary.mu_star;
  return out;
}

}  // namespace symforest
