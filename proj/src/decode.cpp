#include "gt/decode.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace gt {

namespace {

void check_dims(const PoolDesign& design, const Assignment& x) {
    if (x.size() != design.n_variables())
        throw std::invalid_argument("assignment length " + std::to_string(x.size()) +
                                    " != design n_variables " + std::to_string(design.n_variables()));
}

} // namespace

TestOutcomes run_tests(const PoolDesign& design, const Assignment& x) {
    check_dims(design, x);
    TestOutcomes t;
    t.bits.assign(static_cast<std::size_t>(design.n_tests()), 0);
    for (std::int64_t a = 0; a < design.n_tests(); ++a)
        for (std::int32_t i : design.pool(a))
            if (x.bits[static_cast<std::size_t>(i)]) {
                t.bits[static_cast<std::size_t>(a)] = 1;
                break;
            }
    return t;
}

DecodeResult decode_two_stage(const PoolDesign& design, const Assignment& x) {
    check_dims(design, x);
    const std::int64_t n = design.n_variables();
    const TestOutcomes t = run_tests(design, x);

    std::vector<std::uint8_t> sure_zero(static_cast<std::size_t>(n), 0);
    for (std::int64_t a = 0; a < design.n_tests(); ++a)
        if (!t.bits[static_cast<std::size_t>(a)])
            for (std::int32_t i : design.pool(a)) sure_zero[static_cast<std::size_t>(i)] = 1;

    std::vector<std::uint8_t> sure_one(static_cast<std::size_t>(n), 0);
    for (std::int64_t a = 0; a < design.n_tests(); ++a) {
        if (!t.bits[static_cast<std::size_t>(a)]) continue;
        // A positive pool certifies its single non-sure-zero member, if any.
        std::int32_t candidate = -1;
        std::int64_t open = 0;
        for (std::int32_t i : design.pool(a)) {
            if (!sure_zero[static_cast<std::size_t>(i)]) {
                candidate = i;
                if (++open > 1) break;
            }
        }
        if (open == 1) {
            assert(x.bits[static_cast<std::size_t>(candidate)] == 1);
            sure_one[static_cast<std::size_t>(candidate)] = 1;
        }
    }

    DecodeResult result;
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const auto var = static_cast<std::int32_t>(i);
        if (x.bits[idx]) {
            assert(!sure_zero[idx]);
            (sure_one[idx] ? result.sure_ones : result.undetermined_ones).push_back(var);
        } else {
            (sure_zero[idx] ? result.sure_zeros : result.undetermined_zeros).push_back(var);
        }
    }
    result.total_tests = design.n_tests() +
                         static_cast<std::int64_t>(result.undetermined_zeros.size()) +
                         static_cast<std::int64_t>(result.undetermined_ones.size());
    return result;
}

UndeterminedCounts count_undetermined(const PoolDesign& design, const Assignment& x) {
    check_dims(design, x);
    std::vector<std::int32_t> defects;
    for (std::int64_t i = 0; i < x.size(); ++i)
        if (x.bits[static_cast<std::size_t>(i)]) defects.push_back(static_cast<std::int32_t>(i));
    TrialDecoder decoder(design);
    return decoder.count(defects);
}

TrialDecoder::TrialDecoder(const PoolDesign& design)
    : design_(design),
      test_positive_(static_cast<std::size_t>(design.n_tests()), 0),
      var_has_negative_(static_cast<std::size_t>(design.n_variables()), 0) {}

UndeterminedCounts TrialDecoder::count(std::span<const std::int32_t> defects) {
    if (++epoch_ == 0) {  // stamp wrap: stale marks must not alias epoch 0
        std::fill(test_positive_.begin(), test_positive_.end(), 0);
        std::fill(var_has_negative_.begin(), var_has_negative_.end(), 0);
        epoch_ = 1;
    }
    const std::uint32_t e = epoch_;

    for (std::int32_t i : defects)
        for (std::int32_t a : design_.tests_of(i)) test_positive_[static_cast<std::size_t>(a)] = e;

    // Sweep negative tests once, marking their members as sure zeros.
    for (std::int64_t a = 0; a < design_.n_tests(); ++a)
        if (test_positive_[static_cast<std::size_t>(a)] != e)
            for (std::int32_t j : design_.pool(a)) var_has_negative_[static_cast<std::size_t>(j)] = e;

    // Undetermined zeros: non-defectives in no negative test. Defectives are
    // excluded by a two-pointer walk over the sorted defect list.
    std::int64_t u0 = 0;
    std::size_t d = 0;
    for (std::int64_t i = 0; i < design_.n_variables(); ++i) {
        if (d < defects.size() && defects[d] == i) {
            ++d;
            continue;
        }
        if (var_has_negative_[static_cast<std::size_t>(i)] != e) ++u0;
    }

    // Undetermined ones: defectives with no positive test whose other members
    // are all sure zeros.
    std::int64_t u1 = 0;
    for (std::int32_t i : defects) {
        bool sure = false;
        for (std::int32_t a : design_.tests_of(i)) {
            bool all_zero = true;
            for (std::int32_t j : design_.pool(a)) {
                if (j != i && var_has_negative_[static_cast<std::size_t>(j)] != e) {
                    all_zero = false;
                    break;
                }
            }
            if (all_zero) {
                sure = true;
                break;
            }
        }
        if (!sure) ++u1;
    }
    return {u0, u1};
}

} // namespace gt
