#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gt {

struct Provenance {
    std::string family = "manual";
    std::uint64_t seed = 0;
    bool operator==(const Provenance&) const = default;
};

/// Sparse bipartite pool design: N variables, M tests. Each test is a pool,
/// a sorted duplicate-free list of variable indices in [0,N). A derived
/// per-variable view gives the tests of each variable; both views describe
/// the same edge set. Immutable after construction.
class PoolDesign {
public:
    PoolDesign(std::int64_t n_variables,
               std::vector<std::vector<std::int32_t>> tests,
               Provenance provenance = {});

    std::int64_t n_variables() const { return n_variables_; }
    std::int64_t n_tests() const { return static_cast<std::int64_t>(pools_.size()); }
    std::int64_t n_edges() const { return n_edges_; }

    std::span<const std::int32_t> pool(std::int64_t a) const;
    std::span<const std::int32_t> tests_of(std::int64_t i) const;

    std::int64_t test_degree(std::int64_t a) const { return static_cast<std::int64_t>(pool(a).size()); }
    std::int64_t variable_degree(std::int64_t i) const { return static_cast<std::int64_t>(tests_of(i).size()); }

    const Provenance& provenance() const { return provenance_; }

    bool operator==(const PoolDesign& other) const {
        return n_variables_ == other.n_variables_ && pools_ == other.pools_ &&
               provenance_ == other.provenance_;
    }

private:
    std::int64_t n_variables_;
    std::vector<std::vector<std::int32_t>> pools_;      // test -> sorted variables
    std::vector<std::vector<std::int32_t>> var_tests_;  // variable -> sorted tests
    std::int64_t n_edges_;
    Provenance provenance_;
};

/// Defect vector X: bits[i] = 1 iff variable i is defective.
struct Assignment {
    std::vector<std::uint8_t> bits;

    std::int64_t size() const { return static_cast<std::int64_t>(bits.size()); }
    std::int64_t count_ones() const;

    /// Parse "0b"-free binary ("0110…"), "0x…" hex (MSB first, padded to n),
    /// or reject. Length of a binary string must equal n.
    static Assignment parse(const std::string& text, std::int64_t n);
};

/// First-stage outcomes: bits[a] = 1 iff pool a contains a defective.
struct TestOutcomes {
    std::vector<std::uint8_t> bits;
    std::int64_t size() const { return static_cast<std::int64_t>(bits.size()); }
};

/// Output of the two-stage decode. The four sets partition {0,…,N-1};
/// total_tests = M + |undetermined_zeros| + |undetermined_ones|.
struct DecodeResult {
    std::vector<std::int32_t> sure_zeros;
    std::vector<std::int32_t> sure_ones;
    std::vector<std::int32_t> undetermined_zeros;
    std::vector<std::int32_t> undetermined_ones;
    std::int64_t total_tests = 0;
};

/// Local 4-cycle structure around one variable: the number of (other
/// variable, test pair) triples forming a length-4 cycle through it, whether
/// some other variable shares three or more tests with it, and the split of
/// its tests into those on at least one such cycle and the rest.
struct CycleCensus {
    std::int64_t variable = 0;
    std::int64_t four_cycle_count = 0;
    bool has_type_d = false;
    std::vector<std::int32_t> tests_on_cycles;
    std::vector<std::int32_t> tests_off_cycles;
};

/// True iff no pair of distinct variables co-occurs in two distinct tests,
/// i.e. the bipartite graph has no 4-cycle (girth >= 6).
bool girth_at_least_6(const PoolDesign& design);

CycleCensus four_cycle_census(const PoolDesign& design, std::int64_t variable);

struct DegreeProfile {
    std::vector<std::int64_t> variable_degrees;
    std::vector<std::int64_t> test_degrees;
};

DegreeProfile degree_profile(const PoolDesign& design);

enum class DesignFileFormat { Json, AdjacencyText };

void save_design(const PoolDesign& design, const std::string& path, DesignFileFormat format);
PoolDesign load_design(const std::string& path, DesignFileFormat format);

} // namespace gt
