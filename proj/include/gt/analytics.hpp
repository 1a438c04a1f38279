#pragma once

#include <cmath>
#include <cstdint>
#include <map>

#include "gt/design.hpp"

namespace gt {

/// Defect probability context shared by all closed-form evaluations.
struct AnalyticContext {
    double p;
    double q;  // 1 - p, cached
    double precision;

    explicit AnalyticContext(double p, double precision = 1e-12);
};

/// Sparse vector of non-negative multiplicities m_i indexed by pool size
/// i >= 1: m_i counts tests of total degree i attached to one variable.
class MVector {
public:
    MVector() = default;

    void set(std::int64_t i, std::int64_t count);
    std::int64_t get(std::int64_t i) const;
    const std::map<std::int64_t, std::int64_t>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

private:
    std::map<std::int64_t, std::int64_t> entries_;
};

/// Lower bound on the expected number of undetermined zeros:
/// q * sum_i prod_{a: i in a} (1 - q^(d_a - 1)), with actual test degrees
/// d_a. Exact (equality) when the design has girth >= 6. Per-variable
/// products are accumulated in log space to survive underflow.
double bound_b(const PoolDesign& design, const AnalyticContext& ctx);

/// a_i = |log(1 - q^(i-1))| for pool size i >= 2: the per-test increment of
/// the log miss probability of a zero variable. Stable for extreme i via
/// expm1/log1p identities.
double a_coeff(std::int64_t i, const AnalyticContext& ctx);

/// Per-variable cost of multiplicity vector m over the lattice [1, n]:
/// sum_i m_i / i + q * 0^(m_1) * exp(-sum_{i>=2} m_i a_i), with 0^0 = 1.
double a_p_eval(const MVector& m, const AnalyticContext& ctx, std::int64_t n);

struct RestrictedMin {
    double value = 0.0;
    MVector argmin;
};

/// Minimum of a_p_eval over the single-support family: the vector with
/// m_1 = 1 (cost exactly 1) and all m_r * e_r with r in [2, n],
/// m_r in [1, m_max]. Single support suffices at the optimum because the
/// inner minimisation is a linear program whose minimum sits at a simplex
/// vertex.
RestrictedMin a_bar_restricted(const AnalyticContext& ctx, std::int64_t n, std::int64_t m_max);

struct ScalarMin {
    double value = 0.0;
    double arg = 0.0;
};

/// U(p) = min over real r >= 2 of 1 / (r |log(1 - q^(r-1))|), located by a
/// coarse logarithmic grid plus golden-section refinement. r_max <= 0
/// selects the default 4 log(2) / p. The result is invariant (within
/// ctx.precision) under doubling r_max or grid_points.
ScalarMin u_of_p(const AnalyticContext& ctx, double r_max = 0.0, int grid_points = 2048);

/// c(p) = min over w >= 0 of (U(p) w + q e^-w). Closed form: stationary at
/// w = log(q/U) when q >= U, else the boundary w = 0 (value q).
double c_of_p(const AnalyticContext& ctx);

struct LowerBounds {
    double variational = 0.0;      // N * min(1, c(p))
    double info_theoretic = 0.0;   // -N p log2 p
};

LowerBounds lower_bound_t(std::int64_t n, const AnalyticContext& ctx);

/// R_p = (1 - q^(K-1))^L: the chance that all L pools of one zero variable
/// are positive, when every pool has K-1 other members and pools share
/// nothing beyond the variable itself.
double r_p_eval(const AnalyticContext& ctx, double k, std::int64_t l);

/// Mean-test upper bound for the regular girth-6 design at the optimal
/// (L, M): M + Np + N q R_p with K = NL/M.
double regular_upper_bound(std::int64_t n, const AnalyticContext& ctx);

struct CorrectionWindow {
    double h = 0.0;
    bool in_window = false;
    double window_lo = 0.0;  // (1 - 2|log log 2|) / (log 2)^2
    double window_hi = 2.0;
};

/// Sub-leading correction H = (t_bar - Np|log p|/(log 2)^2) / (Np) of an
/// upper-bound estimate t_bar of the optimal mean test count, with the
/// admissible window for it.
CorrectionWindow h_correction(std::int64_t n, const AnalyticContext& ctx, double t_bar);

/// Expected undetermined zeros averaged over the Poisson-Poisson ensemble:
/// N sum_{r=0}^{N-1} C(N-1,r) p^r q^(N-r) (1 - K/N (1-K/N)^r)^M.
/// Exact log-space sum for N <= 10^4; for larger N the sum is truncated
/// around the binomial mode with a certified geometric tail bound below
/// 1e-15 of the accumulated value.
double pp_expected_u0(std::int64_t n, const AnalyticContext& ctx, std::int64_t m, double k);

struct PpOptimum {
    std::int64_t m = 0;
    double k = 0.0;
    double ratio = 0.0;  // (M + E|U0| + Np) / (Np |log p|)
};

/// Minimises (M + pp_expected_u0 + Np) / (Np|log p|) over integer M and real
/// K by nested scalar search: coarse grids bracket the optimum in each
/// coordinate, golden-section refines, and the integer neighbours of the
/// continuous M optimum are compared.
PpOptimum pp_optimize(std::int64_t n, const AnalyticContext& ctx);

namespace detail {

/// log(1 - e^t) for t < 0, split at -log 2 for full precision.
double log1mexp(double t);

/// Golden-section minimisation of a unimodal f on [lo, hi] to relative
/// tolerance rel_tol; returns the midpoint of the final bracket.
template <typename F>
ScalarMin golden_section(F&& f, double lo, double hi, double rel_tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > rel_tol * (std::abs(a) + std::abs(b) + 1.0)) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {f(x), x};
}

} // namespace detail

} // namespace gt
