#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bes {

struct TheoremSweepRow {
    int index = 0;
    int n = 2;
    std::string warp;
    std::string weight;
    double k_certified = 0.0;
    double theta_certified = 0.0;
    double lambda_extrapolated = 0.0;
    double bound = 0.0;   // ((n-1)sqrt(K_cert)+theta_cert)^2 / 4
    double margin = 0.0;  // bound - lambda
    bool pass = false;
};

/// Draw `count` random certified models (exponential and cosh warps, weights
/// with bounded derivative), compute the domain-extrapolated first Dirichlet
/// eigenvalue, and compare it against the optimized bound built from the
/// certified constants. Fully determined by the seed.
std::vector<TheoremSweepRow> theorem_inequality_sweep(std::uint64_t seed, int count,
                                                      const std::vector<double> &t_list,
                                                      double h, double tolerance = 1e-2);

} // namespace bes
