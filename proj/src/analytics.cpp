#include "gt/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gt/generators.hpp"

namespace gt {

namespace detail {

double log1mexp(double t) {
    // log(1 - e^t), t < 0
    if (t >= 0.0) return -std::numeric_limits<double>::infinity();
    if (t > -0.6931471805599453)  // -log 2
        return std::log(-std::expm1(t));
    return std::log1p(-std::exp(t));
}

} // namespace detail

AnalyticContext::AnalyticContext(double p_, double precision_) : p(p_), q(1.0 - p_), precision(precision_) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("AnalyticContext: p must be in (0,1)");
    if (!(precision > 0.0)) throw std::invalid_argument("AnalyticContext: precision must be > 0");
}

void MVector::set(std::int64_t i, std::int64_t count) {
    if (i < 1) throw std::invalid_argument("MVector: index must be >= 1");
    if (count < 0) throw std::invalid_argument("MVector: multiplicity must be >= 0");
    if (count == 0)
        entries_.erase(i);
    else
        entries_[i] = count;
}

std::int64_t MVector::get(std::int64_t i) const {
    auto it = entries_.find(i);
    return it == entries_.end() ? 0 : it->second;
}

double bound_b(const PoolDesign& design, const AnalyticContext& ctx) {
    const double log_q = std::log1p(-ctx.p);

    // log(1 - q^(d-1)) per test; a singleton test (d = 1) gives factor 0 and
    // kills the product of every variable it contains.
    std::vector<double> log_factor(static_cast<std::size_t>(design.n_tests()));
    for (std::int64_t a = 0; a < design.n_tests(); ++a) {
        const std::int64_t d = design.test_degree(a);
        log_factor[static_cast<std::size_t>(a)] =
            d >= 2 ? detail::log1mexp(static_cast<double>(d - 1) * log_q)
                   : -std::numeric_limits<double>::infinity();
    }

    double sum = 0.0;
    for (std::int64_t i = 0; i < design.n_variables(); ++i) {
        double log_prod = 0.0;
        for (std::int32_t a : design.tests_of(i)) log_prod += log_factor[static_cast<std::size_t>(a)];
        sum += std::exp(log_prod);  // exp(-inf) = 0
    }
    return ctx.q * sum;
}

namespace {

double a_coeff_real(double r, const AnalyticContext& ctx) {
    // |log(1 - q^(r-1))| = -log(1 - e^((r-1) log q))
    return -gt::detail::log1mexp((r - 1.0) * std::log1p(-ctx.p));
}

} // namespace

double a_coeff(std::int64_t i, const AnalyticContext& ctx) {
    if (i < 2) throw std::invalid_argument("a_coeff: i must be >= 2");
    return a_coeff_real(static_cast<double>(i), ctx);
}

double a_p_eval(const MVector& m, const AnalyticContext& ctx, std::int64_t n) {
    double linear = 0.0;
    double exponent = 0.0;
    bool m1_positive = false;
    for (const auto& [i, count] : m.entries()) {
        if (i > n) throw std::invalid_argument("a_p_eval: index exceeds n");
        linear += static_cast<double>(count) / static_cast<double>(i);
        if (i == 1)
            m1_positive = true;
        else
            exponent += static_cast<double>(count) * a_coeff(i, ctx);
    }
    if (m1_positive) return linear;  // 0^(m_1) = 0
    return linear + ctx.q * std::exp(-exponent);
}

RestrictedMin a_bar_restricted(const AnalyticContext& ctx, std::int64_t n, std::int64_t m_max) {
    if (m_max < 1) throw std::invalid_argument("a_bar_restricted: m_max must be >= 1");

    RestrictedMin best;
    best.value = 1.0;  // m_1 = 1 branch
    best.argmin.set(1, 1);

    for (std::int64_t r = 2; r <= n; ++r) {
        const double a = a_coeff(r, ctx);
        for (std::int64_t mult = 1; mult <= m_max; ++mult) {
            const double value =
                static_cast<double>(mult) / static_cast<double>(r) + ctx.q * std::exp(-static_cast<double>(mult) * a);
            if (value < best.value) {
                best.value = value;
                best.argmin = MVector{};
                best.argmin.set(r, mult);
            }
        }
    }
    return best;
}

ScalarMin u_of_p(const AnalyticContext& ctx, double r_max, int grid_points) {
    const double default_r_max = 4.0 * std::log(2.0) / ctx.p;
    if (r_max <= 0.0) r_max = default_r_max;
    r_max = std::max(r_max, 8.0);
    if (grid_points < 16) throw std::invalid_argument("u_of_p: grid_points must be >= 16");

    auto objective = [&](double r) { return 1.0 / (r * a_coeff_real(r, ctx)); };

    // Coarse logarithmic grid guards against the second stationary point,
    // then golden-section sharpens the bracket.
    const double log_lo = std::log(2.0), log_hi = std::log(r_max);
    double best_value = std::numeric_limits<double>::infinity();
    int best_idx = 0;
    for (int k = 0; k <= grid_points; ++k) {
        const double r = std::exp(log_lo + (log_hi - log_lo) * k / grid_points);
        const double v = objective(r);
        if (v < best_value) {
            best_value = v;
            best_idx = k;
        }
    }
    const double lo = std::exp(log_lo + (log_hi - log_lo) * std::max(0, best_idx - 1) / grid_points);
    const double hi = std::exp(log_lo + (log_hi - log_lo) * std::min(grid_points, best_idx + 1) / grid_points);
    ScalarMin refined = detail::golden_section(objective, lo, hi, ctx.precision);
    if (best_value < refined.value)
        return {best_value, std::exp(log_lo + (log_hi - log_lo) * best_idx / grid_points)};
    return refined;
}

double c_of_p(const AnalyticContext& ctx) {
    const double u = u_of_p(ctx).value;
    if (ctx.q <= u) return ctx.q;  // derivative U - q e^-w >= 0 on w >= 0
    const double w = std::log(ctx.q / u);
    return u * (1.0 + w);
}

LowerBounds lower_bound_t(std::int64_t n, const AnalyticContext& ctx) {
    LowerBounds bounds;
    bounds.variational = static_cast<double>(n) * std::min(1.0, c_of_p(ctx));
    bounds.info_theoretic = -static_cast<double>(n) * ctx.p * std::log2(ctx.p);
    return bounds;
}

double r_p_eval(const AnalyticContext& ctx, double k, std::int64_t l) {
    if (k < 1.0) throw std::invalid_argument("r_p_eval: k must be >= 1");
    if (l < 1) throw std::invalid_argument("r_p_eval: l must be >= 1");
    const double log_base = detail::log1mexp((k - 1.0) * std::log1p(-ctx.p));
    return std::exp(static_cast<double>(l) * log_base);
}

double regular_upper_bound(std::int64_t n, const AnalyticContext& ctx) {
    const DesignParams params = optimal_params(n, ctx.p, DesignFamily::RegularRegularGirth6);
    const double r_p = r_p_eval(ctx, params.mean_test_degree, params.tests_per_variable);
    return static_cast<double>(params.n_tests) + static_cast<double>(n) * ctx.p +
           static_cast<double>(n) * ctx.q * r_p;
}

CorrectionWindow h_correction(std::int64_t n, const AnalyticContext& ctx, double t_bar) {
    const double log2 = std::log(2.0);
    const double abs_log_p = -std::log(ctx.p);
    CorrectionWindow window;
    window.h = (t_bar - static_cast<double>(n) * ctx.p * abs_log_p / (log2 * log2)) /
               (static_cast<double>(n) * ctx.p);
    window.window_lo = (1.0 - 2.0 * std::abs(std::log(log2))) / (log2 * log2);
    window.window_hi = 2.0;
    window.in_window = window.h >= window.window_lo && window.h <= window.window_hi;
    return window;
}

namespace {

// M log(1 - (K/N)(1-K/N)^r), guarded at r = 0 so K = N stays finite.
double log_undetected_factor(std::int64_t r, double k_over_n, double log1m_kn, std::int64_t m) {
    const double shrink = r == 0 ? 1.0 : std::exp(static_cast<double>(r) * log1m_kn);
    return static_cast<double>(m) * std::log1p(-k_over_n * shrink);
}

} // namespace

double pp_expected_u0(std::int64_t n, const AnalyticContext& ctx, std::int64_t m, double k) {
    if (m < 1) throw std::invalid_argument("pp_expected_u0: m must be >= 1");
    if (!(k > 0.0) || k > static_cast<double>(n)) throw std::invalid_argument("pp_expected_u0: need 0 < k <= n");

    const double log_p = std::log(ctx.p);
    const double log_q = std::log1p(-ctx.p);
    const double k_over_n = k / static_cast<double>(n);
    const double log1m_kn = std::log1p(-k_over_n);
    const std::int64_t count = n - 1;  // binomial over the other N-1 variables

    if (n <= 10000) {
        double sum = 0.0;
        for (std::int64_t r = 0; r <= count; ++r) {
            const double log_weight = std::lgamma(static_cast<double>(count) + 1.0) -
                                      std::lgamma(static_cast<double>(r) + 1.0) -
                                      std::lgamma(static_cast<double>(count - r) + 1.0) +
                                      static_cast<double>(r) * log_p + static_cast<double>(count - r) * log_q;
            sum += std::exp(log_weight + log_undetected_factor(r, k_over_n, log1m_kn, m));
        }
        return static_cast<double>(n) * ctx.q * sum;
    }

    // Truncated sum around the binomial mode. The undetected factor is at
    // most 1, so the dropped tails are bounded by geometric binomial tails;
    // iteration stops once that bound falls below 1e-15 of the running sum.
    const std::int64_t mode =
        std::clamp<std::int64_t>(static_cast<std::int64_t>(static_cast<double>(count + 1) * ctx.p), 0, count);
    const double log_pmf_mode = std::lgamma(static_cast<double>(count) + 1.0) -
                                std::lgamma(static_cast<double>(mode) + 1.0) -
                                std::lgamma(static_cast<double>(count - mode) + 1.0) +
                                static_cast<double>(mode) * log_p +
                                static_cast<double>(count - mode) * log_q;
    double sum = 0.0;

    double log_pmf = log_pmf_mode;
    for (std::int64_t r = mode;; ++r) {
        sum += std::exp(log_pmf + log_undetected_factor(r, k_over_n, log1m_kn, m));
        if (r == count) break;
        const double step = std::log(static_cast<double>(count - r) / static_cast<double>(r + 1)) + log_p - log_q;
        log_pmf += step;
        if (r > mode + 4) {
            const double ratio = std::exp(step);
            if (ratio < 1.0 && std::exp(log_pmf) / (1.0 - ratio) < 1e-15 * sum) break;
        }
    }
    log_pmf = log_pmf_mode;
    for (std::int64_t r = mode - 1; r >= 0; --r) {
        const double step = std::log(static_cast<double>(r + 1) / static_cast<double>(count - r)) + log_q - log_p;
        log_pmf += step;
        sum += std::exp(log_pmf + log_undetected_factor(r, k_over_n, log1m_kn, m));
        if (r < mode - 4) {
            const double ratio = std::exp(step);
            if (ratio < 1.0 && std::exp(log_pmf) * ratio / (1.0 - ratio) < 1e-15 * sum) break;
        }
    }
    return static_cast<double>(n) * ctx.q * sum;
}

namespace {

struct KSearchResult {
    double value;
    double k;
};

KSearchResult best_k_for_m(std::int64_t n, const AnalyticContext& ctx, std::int64_t m, double npl) {
    auto objective = [&](double log_k) {
        return (static_cast<double>(m) + pp_expected_u0(n, ctx, m, std::exp(log_k)) +
                static_cast<double>(n) * ctx.p) /
               npl;
    };
    const double k_hi = std::min(static_cast<double>(n), 200.0 / ctx.p);
    const double log_lo = std::log(1.0), log_hi = std::log(k_hi);
    constexpr int kGrid = 48;
    double best_value = std::numeric_limits<double>::infinity();
    int best_idx = 0;
    for (int i = 0; i <= kGrid; ++i) {
        const double v = objective(log_lo + (log_hi - log_lo) * i / kGrid);
        if (v < best_value) {
            best_value = v;
            best_idx = i;
        }
    }
    const double lo = log_lo + (log_hi - log_lo) * std::max(0, best_idx - 1) / kGrid;
    const double hi = log_lo + (log_hi - log_lo) * std::min(kGrid, best_idx + 1) / kGrid;
    const ScalarMin refined = detail::golden_section(objective, lo, hi, 1e-12);
    if (best_value < refined.value)
        return {best_value, std::exp(log_lo + (log_hi - log_lo) * best_idx / kGrid)};
    return {refined.value, std::exp(refined.arg)};
}

} // namespace

PpOptimum pp_optimize(std::int64_t n, const AnalyticContext& ctx) {
    const double npl = static_cast<double>(n) * ctx.p * (-std::log(ctx.p));
    if (!(npl >= 1.0)) throw std::invalid_argument("pp_optimize: need N p |log p| >= 1");

    auto value_at_m = [&](double m_real) {
        const std::int64_t m = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(m_real)));
        return best_k_for_m(n, ctx, m, npl).value;
    };

    // Coarse multiplicative grid in M around the expected scale Np|log p|.
    const double log_lo = std::log(std::max(1.0, 0.2 * npl));
    const double log_hi = std::log(std::max(16.0, 16.0 * npl));
    constexpr int kGrid = 48;
    double best_value = std::numeric_limits<double>::infinity();
    int best_idx = 0;
    for (int i = 0; i <= kGrid; ++i) {
        const double v = value_at_m(std::exp(log_lo + (log_hi - log_lo) * i / kGrid));
        if (v < best_value) {
            best_value = v;
            best_idx = i;
        }
    }
    if (best_idx == 0 || best_idx == kGrid)
        throw std::runtime_error("pp_optimize: coarse grid failed to bracket an interior minimum in M");
    const double lo = log_lo + (log_hi - log_lo) * std::max(0, best_idx - 1) / kGrid;
    const double hi = log_lo + (log_hi - log_lo) * std::min(kGrid, best_idx + 1) / kGrid;
    const ScalarMin refined =
        detail::golden_section([&](double log_m) { return value_at_m(std::exp(log_m)); }, lo, hi, 1e-10);

    // Settle on an integer M by comparing the neighbours of the continuous
    // optimum.
    const double m_real = std::exp(refined.arg);
    PpOptimum best;
    best.ratio = std::numeric_limits<double>::infinity();
    for (std::int64_t m : {static_cast<std::int64_t>(std::floor(m_real)),
                           static_cast<std::int64_t>(std::ceil(m_real)),
                           static_cast<std::int64_t>(std::llround(m_real)) - 1,
                           static_cast<std::int64_t>(std::llround(m_real)) + 1}) {
        if (m < 1) continue;
        const KSearchResult r = best_k_for_m(n, ctx, m, npl);
        if (r.value < best.ratio) {
            best.ratio = r.value;
            best.m = m;
            best.k = r.k;
        }
    }
    return best;
}

} // namespace gt
