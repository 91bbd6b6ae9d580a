#include "symforest/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "symforest/prior.hpp"

namespace symforest {

Benchmark benchmark_from_name(const std::string& name) {
  if (name == "sim5x") return Benchmark::sim5x;
  if (name == "gpe") return Benchmark::gpe;
  if (name == "coulomb") return Benchmark::coulomb;
  if (name == "lorentz") return Benchmark::lorentz;
  if (name == "custom") return Benchmark::custom;
  throw std::invalid_argument("unknown benchmark: " + name);
}

namespace {

void check_generator_args(int n, double sigma2) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (sigma2 < 0.0) throw std::invalid_argument("sigma2 must be >= 0");
}

void add_noise(Rng& rng, double sigma2, Eigen::VectorXd& y) {
  if (sigma2 == 0.0) return;
  std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += noise(rng);
}

}  // namespace

GeneratedData generate_simulated(int n, double sigma2, std::uint64_t seed) {
  check_generator_args(n, sigma2);
  Rng rng(seed);
  GeneratedData out;
  out.data.X.resize(n, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < 3; ++j) {
    const double mean = 2.0 * (j + 1) + 2.0;  // 4, 6, 8
    for (int i = 0; i < n; ++i) out.data.X(i, j) = mean + normal(rng);
  }
  out.data.y = (5.0 * (out.data.X.col(0).array() + out.data.X.col(1).array()) *
                out.data.X.col(2).array())
                   .matrix();
  add_noise(rng, sigma2, out.data.y);
  out.data.feature_names = {"x1", "x2", "x3"};
  out.truth = "((x1+x2)*x3)";
  return out;
}

GeneratedData generate_feynman(Benchmark law, int n, double sigma2, std::uint64_t seed, double lo,
                               double hi) {
  check_generator_args(n, sigma2);
  if (!(lo < hi)) throw std::invalid_argument("feature range requires lo < hi");
  const bool inverts = law == Benchmark::gpe || law == Benchmark::coulomb;
  if (inverts && lo <= 0.0)
    throw std::invalid_argument("law with an inversion requires a positive feature range");

  Rng rng(seed);
  std::uniform_real_distribution<double> unif(lo, hi);
  std::uniform_real_distribution<double> angle(0.0, M_PI);
  GeneratedData out;

  switch (law) {
    case Benchmark::gpe: {
      out.data.X.resize(n, 4);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < 4; ++j) out.data.X(i, j) = unif(rng);
      const auto m1 = out.data.X.col(0).array(), m2 = out.data.X.col(1).array(),
                 r1 = out.data.X.col(2).array(), r2 = out.data.X.col(3).array();
      out.data.y = (m1 * m2 * (1.0 / r2 - 1.0 / r1)).matrix();
      out.data.feature_names = {"m1", "m2", "r1", "r2"};
      out.data.target_name = "dU";
      out.truth = "((x1*x2)*(inv(x4)+neg(inv(x3))))";
      break;
    }
    case Benchmark::coulomb: {
      out.data.X.resize(n, 3);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < 3; ++j) out.data.X(i, j) = unif(rng);
      const auto q1 = out.data.X.col(0).array(), q2 = out.data.X.col(1).array(),
                 r = out.data.X.col(2).array();
      out.data.y = (q1 * q2 / (r * r)).matrix();
      out.data.feature_names = {"q1", "q2", "r"};
      out.data.target_name = "F";
      out.truth = "((x1*x2)*pow2(inv(x3)))";
      break;
    }
    case Benchmark::lorentz: {
      out.data.X.resize(n, 5);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 4; ++j) out.data.X(i, j) = unif(rng);
        out.data.X(i, 4) = angle(rng);
      }
      const auto q = out.data.X.col(0).array(), ef = out.data.X.col(1).array(),
                 b = out.data.X.col(2).array(), v = out.data.X.col(3).array(),
                 theta = out.data.X.col(4).array();
      out.data.y = (q * (ef + b * v * theta.sin())).matrix();
      out.data.feature_names = {"q", "Ef", "B", "v", "theta"};
      out.data.target_name = "F";
      out.truth = "((x1*x2)+((x1*(x3*x4))*sin(x5)))";
      break;
    }
    default:
      throw std::invalid_argument("generate_feynman expects gpe, coulomb, or lorentz");
  }
  add_noise(rng, sigma2, out.data.y);
  return out;
}

GeneratedData generate_custom(const std::string& expression, int p, int n, double sigma2,
                              std::uint64_t seed, double lo, double hi, const OperatorSet& ops) {
  check_generator_args(n, sigma2);
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  if (!(lo < hi)) throw std::invalid_argument("feature range requires lo < hi");
  SymbolicTree truth = parse_expression(expression, p, ops);

  Rng rng(seed);
  std::uniform_real_distribution<double> unif(lo, hi);
  GeneratedData out;
  out.data.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) out.data.X(i, j) = unif(rng);
  out.data.y.resize(n);
  if (!evaluate_column(truth, ops, out.data.X, out.data.y))
    throw std::invalid_argument("expression evaluates to non-finite values on the sampled range");
  add_noise(rng, sigma2, out.data.y);
  out.data.feature_names.reserve(p);
  for (int j = 1; j <= p; ++j) out.data.feature_names.push_back("x" + std::to_string(j));
  out.truth = canonical_string(truth, ops);
  return out;
}

namespace {

std::string format_double(double v) {
  char buffer[32];
  auto res = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, res.ptr);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t column) {
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  double value = 0.0;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::runtime_error("parse error: non-numeric cell at row " + std::to_string(row) +
                             ", column " + std::to_string(column));
  return value;
}

}  // namespace

Dataset read_csv(const std::string& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_line(line);
  if (header.size() < 2) throw std::runtime_error("need at least one feature and a target column");

  std::size_t target = header.size() - 1;
  if (!target_column.empty()) {
    bool found = false;
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == target_column) {
        target = c;
        found = true;
        break;
      }
    if (!found) throw std::runtime_error("target column '" + target_column + "' not found");
  }

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("ragged row " + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " cells, got " +
                               std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_cell(cells[c], lineno, c + 1);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + path);

  Dataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(header.size()) - 1;
  data.X.resize(n, p);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index k = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == target)
        data.y[i] = rows[i][c];
      else
        data.X(i, k++) = rows[i][c];
    }
  }
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target) data.feature_names.push_back(header[c]);
  data.target_name = header[target];
  data.validate();
  return data;
}

void write_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    const std::string name =
        data.feature_names.empty() ? "x" + std::to_string(j + 1) : data.feature_names[j];
    out << name << ',';
  }
  out << data.target_name << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.p(); ++j) out << format_double(data.X(i, j)) << ',';
    out << format_double(data.y[i]) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace symforest
