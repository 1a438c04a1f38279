#pragma once

#include "gt/design.hpp"

namespace gt {

/// First-stage outcomes: T_a is the OR over pool a; an empty pool reads 0.
TestOutcomes run_tests(const PoolDesign& design, const Assignment& x);

/// The literal two-stage decode:
///   sure zeros  = variables appearing in at least one negative test;
///   sure ones   = variables in a positive test whose other members are all
///                 sure zeros (one pass, no iterated peeling);
///   undetermined zeros/ones = the rest, by true value;
///   total_tests = M + |U0| + |U1|.
DecodeResult decode_two_stage(const PoolDesign& design, const Assignment& x);

struct UndeterminedCounts {
    std::int64_t u0 = 0;
    std::int64_t u1 = 0;
};

/// Counts-only decode; same semantics as decode_two_stage without
/// materialising the four sets.
UndeterminedCounts count_undetermined(const PoolDesign& design, const Assignment& x);

/// Reusable-workspace decoder for tight Monte Carlo loops. The defect set is
/// passed as a sorted index list; scratch buffers are epoch-stamped so no
/// per-trial clearing is needed.
class TrialDecoder {
public:
    explicit TrialDecoder(const PoolDesign& design);

    UndeterminedCounts count(std::span<const std::int32_t> defects);

private:
    const PoolDesign& design_;
    std::vector<std::uint32_t> test_positive_;
    std::vector<std::uint32_t> var_has_negative_;
    std::uint32_t epoch_ = 0;
};

} // namespace gt
