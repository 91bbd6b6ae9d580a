#pragma once

// Benchmark data generation (a simulated product law and three physics
// laws regenerated from closed forms) plus generic CSV ingestion.

#include <cstdint>
#include <string>

#include "symforest/conjugate.hpp"

namespace symforest {

enum class Benchmark { sim5x, gpe, coulomb, lorentz, custom };

Benchmark benchmark_from_name(const std::string& name);

struct GeneratedData {
  Dataset data;
  std::string truth;  // ground-truth expression in grammar text, x-indexed
};

// y = 5(x1 + x2) x3 + eps with x_j ~ N(2j+2, 1), p = 3, eps ~ N(0, sigma2).
GeneratedData generate_simulated(int n, double sigma2, std::uint64_t seed);

// Features i.i.d. uniform on [lo, hi] (angles on [0, pi]); response per
// the law plus N(0, sigma2) noise:
//   gpe:     dU = m1 m2 (1/r2 - 1/r1),        features m1,m2,r1,r2
//   coulomb: F  = q1 q2 / r^2,                features q1,q2,r
//   lorentz: F  = q (Ef + B v sin(theta)),    features q,Ef,B,v,theta
// Laws with an inversion require lo > 0.
GeneratedData generate_feynman(Benchmark law, int n, double sigma2, std::uint64_t seed,
                               double lo = 1.0, double hi = 5.0);

// Response from an arbitrary grammar expression over p uniform features.
GeneratedData generate_custom(const std::string& expression, int p, int n, double sigma2,
                              std::uint64_t seed, double lo, double hi, const OperatorSet& ops);

// Comma-separated, header row, '.' decimal separator. The target column
// is selected by name, or the last column by default. Values round-trip
// exactly (shortest representation).
Dataset read_csv(const std::string& path, const std::string& target_column = "");
void write_csv(const Dataset& data, const std::string& path);

}  // namespace symforest
