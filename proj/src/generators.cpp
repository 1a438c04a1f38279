#include "gt/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gt/rng.hpp"

namespace gt {

const char* family_name(DesignFamily family) {
    switch (family) {
        case DesignFamily::RegularRegularGirth6: return "regular-regular-girth6";
        case DesignFamily::RegularPoisson: return "regular-poisson";
        case DesignFamily::PoissonPoisson: return "poisson-poisson";
    }
    return "unknown";
}

DesignFamily family_from_name(const std::string& name) {
    if (name == "rr6" || name == "regular-regular-girth6") return DesignFamily::RegularRegularGirth6;
    if (name == "rp" || name == "regular-poisson") return DesignFamily::RegularPoisson;
    if (name == "pp" || name == "poisson-poisson") return DesignFamily::PoissonPoisson;
    throw std::invalid_argument("unknown design family '" + name + "' (use rr6, rp or pp)");
}

namespace {

// Integer part of x, robust to the argument sitting one ulp below an integer
// it mathematically equals (e.g. |log 2^-k|/log 2 == k exactly).
std::int64_t integer_part(double x) {
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x)))
        return static_cast<std::int64_t>(r);
    return static_cast<std::int64_t>(std::floor(x));
}

} // namespace

DesignParams optimal_params(std::int64_t n, double p, DesignFamily family) {
    if (n < 1) throw std::invalid_argument("optimal_params: n must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("optimal_params: p must be in (0,1)");

    const double abs_log_p = -std::log(p);
    std::int64_t l = 0, m = 0;
    if (family == DesignFamily::PoissonPoisson) {
        const double e = std::exp(1.0);
        l = integer_part(e * abs_log_p);
        m = integer_part(e * static_cast<double>(n) * p * abs_log_p);
    } else {
        const double log2 = std::log(2.0);
        l = integer_part(abs_log_p / log2);
        m = integer_part(static_cast<double>(n) * p * abs_log_p / (log2 * log2));
    }
    if (l < 1 || m < 1)
        throw std::invalid_argument("optimal_params: p too large for asymptotic design (L or M rounds to 0)");
    if (l > m)
        throw std::invalid_argument("optimal_params: n too small at this p (L = " + std::to_string(l) +
                                    " > M = " + std::to_string(m) + ")");

    DesignParams params;
    params.family = family;
    params.n_variables = n;
    params.defect_prob = p;
    params.tests_per_variable = l;
    params.n_tests = m;
    params.mean_test_degree = static_cast<double>(n) * static_cast<double>(l) / static_cast<double>(m);
    return params;
}

Girth6Feasibility girth6_feasibility(std::int64_t n, std::int64_t l, std::int64_t m) {
    Girth6Feasibility f;
    f.m = m;
    const double k = static_cast<double>(n) * static_cast<double>(l) / static_cast<double>(m);
    const double denom = static_cast<double>(l) * k - static_cast<double>(l) - k;
    if (l == 1) {
        f.required_m = 0.0;
        f.satisfied = true;
    } else if (denom <= 0.0) {
        f.required_m = std::numeric_limits<double>::infinity();
        f.satisfied = false;
    } else {
        f.required_m = static_cast<double>(l - 1) * k / denom;
        f.satisfied = static_cast<double>(m) >= f.required_m;
    }
    return f;
}

namespace {

// One full progressive-edge-growth attempt. Tests are kept in buckets by
// current load so the least-loaded candidate search does not scan all M
// tests per edge; within the lowest eligible bucket the choice is uniform
// among non-conflicting tests (rejection sampling, falling back to a full
// reservoir scan of the bucket when rejections pile up — both are uniform).
struct PegAttempt {
    std::int64_t n, l, m;
    std::int64_t cap;  // ceil(NL/M)
    std::vector<std::vector<std::int32_t>> pools;
    std::vector<std::vector<std::int32_t>> var_tests;
    std::vector<std::int64_t> load;
    std::vector<std::uint32_t> conflict;  // epoch stamps over tests
    std::vector<std::vector<std::int32_t>> bucket;  // load -> tests at that load
    std::vector<std::int32_t> slot;                 // test -> index in its bucket
    std::uint32_t epoch = 0;

    PegAttempt(std::int64_t n, std::int64_t l, std::int64_t m)
        : n(n), l(l), m(m),
          cap((n * l + m - 1) / m),
          pools(static_cast<std::size_t>(m)),
          var_tests(static_cast<std::size_t>(n)),
          load(static_cast<std::size_t>(m), 0),
          conflict(static_cast<std::size_t>(m), 0),
          bucket(static_cast<std::size_t>(cap) + 1),
          slot(static_cast<std::size_t>(m)) {
        bucket[0].resize(static_cast<std::size_t>(m));
        for (std::int64_t t = 0; t < m; ++t) {
            bucket[0][static_cast<std::size_t>(t)] = static_cast<std::int32_t>(t);
            slot[static_cast<std::size_t>(t)] = static_cast<std::int32_t>(t);
        }
    }

    void move_bucket(std::int64_t t, std::int64_t from, std::int64_t to) {
        auto& src = bucket[static_cast<std::size_t>(from)];
        const std::int32_t idx = slot[static_cast<std::size_t>(t)];
        src[static_cast<std::size_t>(idx)] = src.back();
        slot[static_cast<std::size_t>(src.back())] = idx;
        src.pop_back();
        auto& dst = bucket[static_cast<std::size_t>(to)];
        slot[static_cast<std::size_t>(t)] = static_cast<std::int32_t>(dst.size());
        dst.push_back(static_cast<std::int32_t>(t));
    }

    // Mark every test within two steps of the freshly chosen test `t`:
    // any test containing a current member of t would close a 4-cycle with i.
    void mark_conflicts_from(std::int64_t t) {
        for (std::int32_t j : pools[static_cast<std::size_t>(t)])
            for (std::int32_t t2 : var_tests[static_cast<std::size_t>(j)])
                conflict[static_cast<std::size_t>(t2)] = epoch;
        conflict[static_cast<std::size_t>(t)] = epoch;
    }

    bool valid(std::int32_t t) const { return conflict[static_cast<std::size_t>(t)] != epoch; }

    // Uniform choice among non-conflicting tests of the lowest non-empty
    // load level below capacity.
    std::int64_t pick_test(Rng& rng) {
        for (std::int64_t level = 0; level < cap; ++level) {
            const auto& b = bucket[static_cast<std::size_t>(level)];
            if (b.empty()) continue;
            if (b.size() > 64) {
                for (int tries = 0; tries < 64; ++tries) {
                    const std::int32_t t = b[rng.below(b.size())];
                    if (valid(t)) return t;
                }
            }
            std::int64_t chosen = -1, seen = 0;
            for (const std::int32_t t : b) {
                if (!valid(t)) continue;
                ++seen;
                if (rng.below(static_cast<std::uint64_t>(seen)) == 0) chosen = t;
            }
            if (chosen >= 0) return chosen;
        }
        return -1;
    }

    bool place_variable(std::int64_t i, Rng& rng, int var_retries) {
        for (int attempt = 0; attempt < var_retries; ++attempt) {
            ++epoch;
            std::vector<std::int32_t>& mine = var_tests_of(i);
            bool ok = true;
            for (std::int64_t k = 0; k < l; ++k) {
                const std::int64_t t = pick_test(rng);
                if (t < 0) {
                    ok = false;
                    break;
                }
                pools[static_cast<std::size_t>(t)].push_back(static_cast<std::int32_t>(i));
                mine.push_back(static_cast<std::int32_t>(t));
                move_bucket(t, load[static_cast<std::size_t>(t)], load[static_cast<std::size_t>(t)] + 1);
                ++load[static_cast<std::size_t>(t)];
                mark_conflicts_from(t);
            }
            if (ok) return true;
            // Undo this variable's partial placement and retry with fresh
            // tie-break draws.
            for (std::int32_t t : mine) {
                auto& pool = pools[static_cast<std::size_t>(t)];
                pool.pop_back();
                move_bucket(t, load[static_cast<std::size_t>(t)], load[static_cast<std::size_t>(t)] - 1);
                --load[static_cast<std::size_t>(t)];
            }
            mine.clear();
        }
        return false;
    }

    std::vector<std::int32_t>& var_tests_of(std::int64_t i) { return var_tests[static_cast<std::size_t>(i)]; }

    bool degrees_balanced() const {
        const std::int64_t floor_deg = (n * l) / m;
        for (std::int64_t t = 0; t < m; ++t) {
            const std::int64_t d = load[static_cast<std::size_t>(t)];
            if (d < floor_deg || d > cap) return false;
        }
        return true;
    }
};

} // namespace

PoolDesign gen_regular_regular_girth6(std::int64_t n, std::int64_t l, std::int64_t m,
                                      std::uint64_t seed, int max_restarts) {
    if (l < 1 || m < 1 || n < 1) throw std::invalid_argument("gen_regular_regular_girth6: n, l, m must be >= 1");
    if (l > m) throw std::invalid_argument("gen_regular_regular_girth6: l > m");

    const Girth6Feasibility feasibility = girth6_feasibility(n, l, m);
    constexpr int kVarRetries = 40;

    for (int restart = 0; restart < max_restarts; ++restart) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
        PegAttempt attempt(n, l, m);
        bool failed = false;
        for (std::int64_t i = 0; i < n && !failed; ++i)
            failed = !attempt.place_variable(i, rng, kVarRetries);
        if (failed || !attempt.degrees_balanced()) continue;

        PoolDesign design(n, std::move(attempt.pools),
                          Provenance{family_name(DesignFamily::RegularRegularGirth6), seed});
        // Postconditions are asserted, not assumed.
        if (!girth_at_least_6(design)) continue;
        for (std::int64_t i = 0; i < n; ++i)
            if (design.variable_degree(i) != l)
                throw std::logic_error("gen_regular_regular_girth6: variable degree invariant broken");
        return design;
    }

    std::string msg = "gen_regular_regular_girth6: construction failed after " +
                      std::to_string(max_restarts) + " restarts at (N=" + std::to_string(n) +
                      ", L=" + std::to_string(l) + ", M=" + std::to_string(m) + "); girth-6 feasibility " +
                      (feasibility.satisfied ? "satisfied" : "violated") + " (M required >= " +
                      std::to_string(feasibility.required_m) + "; the condition is sufficient, not necessary)";
    throw GenerationError(msg, feasibility);
}

PoolDesign gen_regular_poisson(std::int64_t n, std::int64_t m, std::int64_t l, std::uint64_t seed) {
    if (l < 1 || m < 1 || n < 1) throw std::invalid_argument("gen_regular_poisson: n, m, l must be >= 1");
    if (l > m) throw std::invalid_argument("gen_regular_poisson: l > m");

    Rng rng(derive_seed(seed, 0));
    std::vector<std::int32_t> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);

    std::vector<std::vector<std::int32_t>> pools(static_cast<std::size_t>(m));
    for (std::int64_t i = 0; i < n; ++i) {
        // Partial Fisher-Yates over the standing permutation: the first l
        // entries after l swaps are a uniform l-subset regardless of the
        // array's prior order.
        for (std::int64_t k = 0; k < l; ++k) {
            const std::int64_t j = k + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m - k)));
            std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(j)]);
            pools[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])].push_back(
                static_cast<std::int32_t>(i));
        }
    }
    return PoolDesign(n, std::move(pools), Provenance{family_name(DesignFamily::RegularPoisson), seed});
}

PoolDesign gen_poisson_poisson(std::int64_t n, std::int64_t m, double l, std::uint64_t seed) {
    if (n < 1 || m < 1) throw std::invalid_argument("gen_poisson_poisson: n, m must be >= 1");
    const double edge_prob = l / static_cast<double>(m);
    if (!(edge_prob > 0.0) || edge_prob > 1.0)
        throw std::invalid_argument("gen_poisson_poisson: edge probability L/M must be in (0,1]");

    std::vector<std::vector<std::int32_t>> pools(static_cast<std::size_t>(m));
    if (edge_prob == 1.0) {
        for (auto& pool : pools) {
            pool.resize(static_cast<std::size_t>(n));
            std::iota(pool.begin(), pool.end(), 0);
        }
    } else {
        Rng rng(derive_seed(seed, 0));
        const double log_q = std::log1p(-edge_prob);
        const std::uint64_t cells = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(m);
        std::uint64_t pos = geometric_skip(rng, log_q);
        while (pos < cells) {
            const auto i = static_cast<std::int32_t>(pos / static_cast<std::uint64_t>(m));
            const auto a = static_cast<std::size_t>(pos % static_cast<std::uint64_t>(m));
            pools[a].push_back(i);
            pos += 1 + geometric_skip(rng, log_q);
        }
    }
    return PoolDesign(n, std::move(pools), Provenance{family_name(DesignFamily::PoissonPoisson), seed});
}

} // namespace gt
