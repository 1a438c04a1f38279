#pragma once

#include <cstdint>
#include <stdexcept>

#include "gt/design.hpp"

namespace gt {

enum class DesignFamily { RegularRegularGirth6, RegularPoisson, PoissonPoisson };

const char* family_name(DesignFamily family);
DesignFamily family_from_name(const std::string& name);

/// Parameter bundle for one design: exact (regular) or mean (Poisson) tests
/// per variable L, number of tests M, mean test degree K = N*L/M.
struct DesignParams {
    DesignFamily family = DesignFamily::RegularRegularGirth6;
    std::int64_t n_variables = 0;
    double defect_prob = 0.0;
    std::int64_t tests_per_variable = 0;
    std::int64_t n_tests = 0;
    double mean_test_degree = 0.0;
    std::uint64_t seed = 0;
};

/// The asymptotically optimal (L, M) for the family at given N and p:
/// regular families use L = [|log p|/log 2], M = [Np|log p|/(log 2)^2];
/// Poisson-Poisson uses L = [e|log p|], M = [e Np|log p|]. [x] is the
/// integer part. Throws if the rounding produces L = 0 or M = 0.
DesignParams optimal_params(std::int64_t n, double p, DesignFamily family);

/// Sufficient condition for the girth-6 construction to exist at (N, L, M):
/// M >= (L-1)K / (LK - L - K) with K = NL/M. Sufficient only; construction
/// can succeed slightly below it and fail above it at tiny sizes.
struct Girth6Feasibility {
    bool satisfied = false;
    double required_m = 0.0;  // +inf when the denominator is non-positive
    std::int64_t m = 0;
};

Girth6Feasibility girth6_feasibility(std::int64_t n, std::int64_t l, std::int64_t m);

/// Thrown when the progressive-edge-growth construction exhausts its
/// restarts; carries the feasibility evaluation for diagnostics.
class GenerationError : public std::runtime_error {
public:
    GenerationError(const std::string& what, Girth6Feasibility feasibility)
        : std::runtime_error(what), feasibility(feasibility) {}
    Girth6Feasibility feasibility;
};

/// Progressive edge growth: variables placed in sequence, each choosing L
/// tests greedily (least-loaded test that creates no 4-cycle, ties broken by
/// seeded RNG), with per-variable retries and full restarts. Postconditions,
/// verified before returning: every variable degree exactly L, test degrees
/// in {floor(NL/M), ceil(NL/M)}, no 4-cycle.
PoolDesign gen_regular_regular_girth6(std::int64_t n, std::int64_t l, std::int64_t m,
                                      std::uint64_t seed, int max_restarts = 10);

/// Each variable independently joins a uniform random L-subset of the M
/// tests (exact uniformity via partial Fisher-Yates).
PoolDesign gen_regular_poisson(std::int64_t n, std::int64_t m, std::int64_t l, std::uint64_t seed);

/// Every (variable, test) edge present independently with probability L/M;
/// sampled by geometric skips over the N*M cells. L is the mean variable
/// degree and may be fractional.
PoolDesign gen_poisson_poisson(std::int64_t n, std::int64_t m, double l, std::uint64_t seed);

} // namespace gt
