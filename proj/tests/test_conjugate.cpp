#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "symforest/conjugate.hpp"
#include "symforest/data.hpp"

using namespace symforest;

namespace {

Dataset random_dataset(Rng& rng, int n, int p, double scale = 1.0) {
  Dataset data;
  std::normal_distribution<double> normal(0.0, scale);
  data.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) data.X(i, j) = 1.0 + std::abs(normal(rng));
  data.y.resize(n);
  for (int i = 0; i < n; ++i) data.y[i] = normal(rng);
  return data;
}

}  // namespace

TEST_CASE("nig_update scalar hand case") {
  NIGParams prior;
  prior.nu = 1.0;
  prior.lambda = 1.0;
  prior.mu = Eigen::VectorXd::Zero(1);
  prior.Sigma = Eigen::MatrixXd::Identity(1, 1);

  Eigen::MatrixXd T = Eigen::MatrixXd::Ones(2, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(2);
  ConjugateSummary s = nig_update(prior, T, y);
  CHECK(s.nu_star == doctest::Approx(3.0));
  CHECK(s.Sigma_star(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(s.mu_star[0] == doctest::Approx(2.0 / 3));
  CHECK(s.lambda_star == doctest::Approx(5.0 / 3));
  CHECK(s.log_det_Sigma_star == doctest::Approx(std::log(1.0 / 3)));
}

TEST_CASE("nig_update no-data identity") {
  NIGParams prior = default_nig(2, 1.5, 2.5);
  Eigen::MatrixXd T(0, 3);
  Eigen::VectorXd y(0);
  ConjugateSummary s = nig_update(prior, T, y);
  CHECK(s.nu_star == doctest::Approx(prior.nu));
  CHECK(s.lambda_star == doctest::Approx(prior.lambda));
  CHECK(s.mu_star.isApprox(prior.mu));
  CHECK(s.Sigma_star.isApprox(prior.Sigma));
}

TEST_CASE("nig_update matches a dense linear-algebra oracle") {
  Rng rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 20, k = 3;
    Eigen::MatrixXd T(n, k + 1);
    T.col(0).setOnes();
    for (int i = 0; i < n; ++i)
      for (int j = 1; j <= k; ++j) T(i, j) = normal(rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = normal(rng);

    NIGParams prior = default_nig(k, 1.0 + rep * 0.1, 0.5 + rep * 0.2);
    // random SPD prior covariance
    Eigen::MatrixXd A(k + 1, k + 1);
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= k; ++j) A(i, j) = normal(rng);
    prior.Sigma = A * A.transpose() + Eigen::MatrixXd::Identity(k + 1, k + 1);

    ConjugateSummary s = nig_update(prior, T, y);
    oracles::DenseNIG o = oracles::dense_nig_oracle(prior, T, y);
    CHECK(s.nu_star == doctest::Approx(o.nu_star));
    CHECK(s.lambda_star == doctest::Approx(o.lambda_star).epsilon(1e-10));
    CHECK((s.mu_star - o.mu_star).norm() <= 1e-10 * (1.0 + o.mu_star.norm()));
    CHECK((s.Sigma_star - o.Sigma_star).norm() <= 1e-10 * (1.0 + o.Sigma_star.norm()));

    // textbook lambda* equals the stabilized form used internally
    const double textbook = prior.lambda + y.dot(y) +
                            prior.mu.dot(prior.Sigma.fullPivLu().solve(prior.mu)) -
                            s.mu_star.dot(s.Sigma_star.fullPivLu().solve(s.mu_star));
    CHECK(s.lambda_star == doctest::Approx(textbook).epsilon(1e-9));

    // Sigma* is symmetric
    CHECK((s.Sigma_star - s.Sigma_star.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("conjugacy identity: prior x likelihood / posterior is flat") {
  Rng rng(12);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.3, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 4 + rep % 5, k = rep % 3;
    Eigen::MatrixXd T(n, k + 1);
    T.col(0).setOnes();
    for (int i = 0; i < n; ++i)
      for (int j = 1; j <= k; ++j) T(i, j) = normal(rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = normal(rng);
    NIGParams prior = default_nig(k);

    ConjugateSummary s = nig_update(prior, T, y);
    NIGParams posterior;
    posterior.nu = s.nu_star;
    posterior.lambda = s.lambda_star;
    posterior.mu = s.mu_star;
    posterior.Sigma = s.Sigma_star;

    double first = 0.0, lo = 0.0, hi = 0.0;
    for (int point = 0; point < 5; ++point) {
      Eigen::VectorXd beta(k + 1);
      for (int j = 0; j <= k; ++j) beta[j] = normal(rng);
      const double sigma2 = unif(rng);
      const double value = oracles::log_gaussian_likelihood(y, T, beta, sigma2) +
                           oracles::log_nig_pdf(beta, sigma2, prior) -
                           oracles::log_nig_pdf(beta, sigma2, posterior);
      if (point == 0) {
        first = lo = hi = value;
      } else {
        lo = std::min(lo, value);
        hi = std::max(hi, value);
      }
    }
    CAPTURE(first);
    CHECK(hi - lo <= 1e-8);
  }
}

TEST_CASE("design_matrix") {
  OperatorSet ops = OperatorSet::standard();
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;

  DesignResult empty = design_matrix({}, ops, X);
  CHECK(empty.T.cols() == 1);
  CHECK(empty.T.col(0).isApprox(Eigen::Vector3d::Ones()));
  CHECK(empty.all_finite);

  DesignResult one = design_matrix({make_terminal(1)}, ops, X);
  CHECK(one.T.cols() == 2);
  CHECK(one.T.col(1).isApprox(Eigen::Vector3d(1, 2, 3)));

  Eigen::MatrixXd Xz(3, 1);
  Xz << 1, 0, 3;
  DesignResult bad =
      design_matrix({make_unary(ops.unary_index("inv"), make_terminal(1))}, ops, Xz);
  CHECK_FALSE(bad.all_finite);
}

TEST_CASE("log_jmp_ensemble properties") {
  OperatorSet ops = OperatorSet::standard();
  Rng rng(13);
  Dataset data = random_dataset(rng, 24, 3);

  SymbolicTree t1 = parse_expression("(x1*x3)", 3, ops);
  SymbolicTree t2 = parse_expression("(x2+x1)", 3, ops);

  SUBCASE("permutation invariance") {
    ForestHyper hyper = default_forest_hyper(ops, 3, 2);
    const double a = log_jmp_ensemble({t1, t2}, data, hyper);
    const double b = log_jmp_ensemble({t2, t1}, data, hyper);
    CHECK(std::isfinite(a));
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }

  SUBCASE("duplicated identical columns stay finite under Sigma = I") {
    ForestHyper hyper = default_forest_hyper(ops, 3, 2);
    const double a = log_jmp_ensemble({t1, t1}, data, hyper);
    CHECK(std::isfinite(a));
  }

  SUBCASE("non-finite design column yields -inf") {
    ForestHyper hyper = default_forest_hyper(ops, 3, 1);
    Dataset zero = data;
    zero.X(0, 0) = 0.0;
    SymbolicTree inv = parse_expression("inv(x1)", 3, ops);
    CHECK(log_jmp_ensemble({inv}, zero, hyper) == -std::numeric_limits<double>::infinity());
  }
}

TEST_CASE("log_jmp_ensemble matches the quadrature marginalization oracle") {
  // Small instances; the full sweep lives in the acceptance suite.
  OperatorSet ops = OperatorSet::standard();
  Rng rng(14);
  Dataset data = random_dataset(rng, 6, 2);
  ForestHyper hyper = default_forest_hyper(ops, 2, 1);
  std::vector<SymbolicTree> forest{parse_expression("x1", 2, ops)};

  ForestEval eval = evaluate_forest(forest, data, hyper);
  REQUIRE(eval.finite);

  const double evidence =
      oracles::log_model_evidence_quadrature(data.y, eval.design, hyper.nig);
  double oracle = evidence;
  for (const auto& tree : forest) {
    TreeSummary s = summarize(tree, ops, 2);
    oracle += log_dirichlet_multinomial(hyper.conc_op, s.op_counts) -
              log_multivariate_beta(hyper.conc_op);
    oracle += log_dirichlet_multinomial(hyper.conc_ft, s.feature_counts) -
              log_multivariate_beta(hyper.conc_ft);
    oracle += log_tree_prior(tree, ops, Eigen::VectorXd::Constant(ops.size(), 1.0),
                             Eigen::VectorXd::Constant(2, 1.0), hyper.rule, hyper.max_depth);
  }
  // Bridge from the fully normalized integral to the unnormalized
  // log-JMP convention (constants independent of the forest).
  const double n = static_cast<double>(data.n());
  double bridge = n / 2.0 * std::log(2.0 * M_PI) +
                  0.5 * std::log(hyper.nig.Sigma.determinant()) + std::lgamma(hyper.nig.nu / 2.0) -
                  (hyper.nig.nu / 2.0) * std::log(hyper.nig.lambda / 2.0);
  bridge += log_multivariate_beta(hyper.conc_op) + log_multivariate_beta(hyper.conc_ft);

  CHECK(std::abs(eval.log_jmp - (oracle + bridge)) <= 1e-5);
}

TEST_CASE("sample_weights_full_conditional") {
  OperatorSet ops = OperatorSet::standard();
  Eigen::VectorXd conc_op = Eigen::VectorXd::Constant(ops.size(), 1.0 / ops.size());
  Eigen::VectorXd conc_ft = Eigen::VectorXd::Constant(3, 1.0 / 3);

  SUBCASE("posterior mean under a dominant count") {
    TreeSummary s;
    s.op_counts.assign(ops.size(), 0);
    s.op_counts[0] = 1000;
    s.feature_counts.assign(3, 0);
    Rng rng(15);
    const int draws = 10000;
    double mean = 0.0, sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      WeightPair w = sample_weights_full_conditional(rng, s, conc_op, conc_ft);
      mean += w.op[0];
      sq += w.op[0] * w.op[0];
    }
    mean /= draws;
    const double sd = std::sqrt(sq / draws - mean * mean);
    const double expected = (conc_op[0] + 1000.0) / (conc_op.sum() + 1000.0);
    CHECK(std::abs(mean - expected) <= 3.0 * sd / std::sqrt(draws) + 1e-6);
  }

  SUBCASE("zero concentration is a domain error") {
    TreeSummary s;
    s.op_counts.assign(ops.size(), 0);
    s.feature_counts.assign(3, 0);
    Eigen::VectorXd bad = conc_op;
    bad[2] = 0.0;
    Rng rng(16);
    CHECK_THROWS_AS(sample_weights_full_conditional(rng, s, bad, conc_ft), std::domain_error);
  }

  SUBCASE("empty counts draw from the prior") {
    TreeSummary s;
    s.op_counts.assign(ops.size(), 0);
    s.feature_counts.assign(3, 0);
    Rng rng(17);
    WeightPair w = sample_weights_full_conditional(rng, s, conc_op, conc_ft);
    CHECK(w.op.sum() == doctest::Approx(1.0));
    CHECK(w.ft.sum() == doctest::Approx(1.0));
    CHECK((w.op.array() >= 0.0).all());
  }
}

TEST_CASE("sample_model_params_full_conditional moments") {
  ConjugateSummary s;
  s.nu_star = 8.0;
  s.lambda_star = 6.0;
  s.mu_star = Eigen::Vector2d(1.0, -2.0);
  s.Sigma_star = Eigen::Matrix2d::Identity() * 0.5;
  s.log_det_Sigma_star = std::log(0.25);

  Rng rng(18);
  const int draws = 100000;
  double mean_sigma2 = 0.0, sq_sigma2 = 0.0;
  Eigen::Vector2d mean_beta = Eigen::Vector2d::Zero();
  Eigen::Vector2d sq_beta = Eigen::Vector2d::Zero();
  for (int i = 0; i < draws; ++i) {
    ModelParams p = sample_model_params_full_conditional(rng, s);
    CHECK(p.sigma2 > 0.0);
    mean_sigma2 += p.sigma2;
    sq_sigma2 += p.sigma2 * p.sigma2;
    mean_beta += p.beta;
    sq_beta += p.beta.cwiseProduct(p.beta);
  }
  mean_sigma2 /= draws;
  mean_beta /= draws;
  const double sd_sigma2 = std::sqrt(sq_sigma2 / draws - mean_sigma2 * mean_sigma2);
  const double expected_sigma2 = (s.lambda_star / 2.0) / (s.nu_star / 2.0 - 1.0);
  CHECK(std::abs(mean_sigma2 - expected_sigma2) <= 3.0 * sd_sigma2 / std::sqrt(draws));
  for (int j = 0; j < 2; ++j) {
    const double sd = std::sqrt(sq_beta[j] / draws - mean_beta[j] * mean_beta[j]);
    CHECK(std::abs(mean_beta[j] - s.mu_star[j]) <= 3.0 * sd / std::sqrt(draws));
  }
}
