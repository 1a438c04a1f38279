#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "gt/design.hpp"
#include "gt/generators.hpp"
#include "gt/rng.hpp"

using namespace gt;

namespace {

PoolDesign make(std::int64_t n, std::vector<std::vector<std::int32_t>> pools) {
    return PoolDesign(n, std::move(pools));
}

PoolDesign random_design(std::int64_t n, std::int64_t m, double edge_prob, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<std::int32_t>> pools(static_cast<std::size_t>(m));
    for (std::int64_t a = 0; a < m; ++a)
        for (std::int32_t i = 0; i < n; ++i)
            if (rng.bernoulli(edge_prob)) pools[static_cast<std::size_t>(a)].push_back(i);
    return PoolDesign(n, std::move(pools));
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("construction validates inputs") {
    CHECK_THROWS_AS(make(0, {{}}), std::invalid_argument);
    CHECK_THROWS_AS(make(3, {}), std::invalid_argument);
    CHECK_THROWS_AS(make(3, {{0, 3}}), std::invalid_argument);   // index == N
    CHECK_THROWS_AS(make(3, {{-1}}), std::invalid_argument);
    CHECK_THROWS_AS(make(3, {{1, 1}}), std::invalid_argument);   // duplicate
    CHECK_NOTHROW(make(3, {{}, {0}}));                           // empty pool is legal
}

TEST_CASE("variable and test views describe the same edge set") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const PoolDesign d = random_design(17, 9, 0.3, seed);
        std::int64_t edges_via_tests = 0, edges_via_vars = 0;
        for (std::int64_t a = 0; a < d.n_tests(); ++a) {
            edges_via_tests += d.test_degree(a);
            for (std::int32_t i : d.pool(a)) {
                auto tests = d.tests_of(i);
                CHECK(std::find(tests.begin(), tests.end(), static_cast<std::int32_t>(a)) != tests.end());
            }
        }
        for (std::int64_t i = 0; i < d.n_variables(); ++i) edges_via_vars += d.variable_degree(i);
        CHECK(edges_via_tests == edges_via_vars);
        CHECK(edges_via_tests == d.n_edges());
    }
}

TEST_CASE("girth_at_least_6 on the worked pool sets") {
    CHECK(girth_at_least_6(make(3, {{0, 1}, {1, 2}})));
    CHECK_FALSE(girth_at_least_6(make(2, {{0, 1}, {0, 1}})));
    CHECK(girth_at_least_6(make(4, {{0, 1, 2}, {2, 3}, {3, 0}})));
}

TEST_CASE("four_cycle_census counts shared-test triples") {
    SUBCASE("one shared pair") {
        const PoolDesign d = make(2, {{0, 1}, {0, 1}});
        const CycleCensus c = four_cycle_census(d, 0);
        CHECK(c.four_cycle_count == 1);
        CHECK_FALSE(c.has_type_d);
        CHECK(c.tests_on_cycles.size() == 2);
        CHECK(c.tests_off_cycles.empty());
    }
    SUBCASE("girth-6 design has empty census") {
        const PoolDesign d = make(4, {{0, 1, 2}, {2, 3}, {3, 0}});
        for (std::int64_t i = 0; i < 4; ++i) {
            CHECK(four_cycle_census(d, i).four_cycle_count == 0);
            CHECK_FALSE(four_cycle_census(d, i).has_type_d);
        }
    }
    SUBCASE("pair sharing three tests") {
        const PoolDesign d = make(2, {{0, 1}, {0, 1}, {0, 1}});
        const CycleCensus c = four_cycle_census(d, 0);
        CHECK(c.four_cycle_count == 3);
        CHECK(c.has_type_d);
    }
    CHECK_THROWS_AS(four_cycle_census(make(2, {{0}}), 5), std::out_of_range);
}

TEST_CASE("census matches a direct triple enumeration on random designs") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const PoolDesign d = random_design(11, 6, 0.35, seed);
        for (std::int64_t i = 0; i < d.n_variables(); ++i) {
            // Count triples (j, a, b) with a < b and both tests holding i and j.
            std::int64_t count = 0;
            bool type_d = false;
            std::vector<std::int32_t> on_cycle;
            auto tests = d.tests_of(i);
            for (std::int64_t j = 0; j < d.n_variables(); ++j) {
                if (j == i) continue;
                std::int64_t shared = 0;
                for (std::int32_t a : tests) {
                    auto pool = d.pool(a);
                    if (std::find(pool.begin(), pool.end(), static_cast<std::int32_t>(j)) != pool.end())
                        ++shared;
                }
                count += shared * (shared - 1) / 2;
                if (shared >= 3) type_d = true;
            }
            for (std::int32_t a : tests) {
                bool on = false;
                for (std::int32_t j : d.pool(a)) {
                    if (j == static_cast<std::int32_t>(i)) continue;
                    std::int64_t shared = 0;
                    for (std::int32_t b : tests) {
                        auto pool = d.pool(b);
                        if (std::find(pool.begin(), pool.end(), j) != pool.end()) ++shared;
                    }
                    if (shared >= 2) {
                        on = true;
                        break;
                    }
                }
                if (on) on_cycle.push_back(a);
            }

            const CycleCensus c = four_cycle_census(d, i);
            CHECK(c.four_cycle_count == count);
            CHECK(c.has_type_d == type_d);
            CHECK(c.tests_on_cycles == on_cycle);
        }
    }
}

TEST_CASE("census agrees with the girth predicate and double-counts loops") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const PoolDesign d = random_design(12, 7, 0.25, seed);
        bool all_zero = true;
        std::int64_t total = 0;
        for (std::int64_t i = 0; i < d.n_variables(); ++i) {
            const CycleCensus c = four_cycle_census(d, i);
            total += c.four_cycle_count;
            if (c.four_cycle_count != 0) all_zero = false;
            CHECK(c.tests_on_cycles.size() + c.tests_off_cycles.size() ==
                  static_cast<std::size_t>(d.variable_degree(i)));
        }
        CHECK(girth_at_least_6(d) == all_zero);
        CHECK(total % 2 == 0);  // each loop seen from both endpoint variables
    }
}

TEST_CASE("degree_profile") {
    const DegreeProfile p1 = degree_profile(make(3, {{0, 1}, {1, 2}}));
    CHECK(p1.variable_degrees == std::vector<std::int64_t>{1, 2, 1});
    CHECK(p1.test_degrees == std::vector<std::int64_t>{2, 2});

    const DegreeProfile p2 = degree_profile(make(1, {{}, {0}}));
    CHECK(p2.test_degrees == std::vector<std::int64_t>{0, 1});

    const DegreeProfile p3 = degree_profile(random_design(20, 9, 0.4, 7));
    CHECK(std::accumulate(p3.variable_degrees.begin(), p3.variable_degrees.end(), std::int64_t{0}) ==
          std::accumulate(p3.test_degrees.begin(), p3.test_degrees.end(), std::int64_t{0}));
}

TEST_CASE("JSON round-trip preserves structure and provenance") {
    PoolDesign d(3, {{0, 1}, {1, 2}}, Provenance{"regular-poisson", 42});
    const std::string path = temp_path("gt_roundtrip.json");
    save_design(d, path, DesignFileFormat::Json);
    const PoolDesign back = load_design(path, DesignFileFormat::Json);
    CHECK(back == d);
    std::remove(path.c_str());
}

TEST_CASE("adjacency text round-trip preserves the edge set") {
    PoolDesign d(4, {{0, 3}, {}, {1, 2, 3}}, Provenance{"manual", 9});
    const std::string path = temp_path("gt_roundtrip.txt");
    save_design(d, path, DesignFileFormat::AdjacencyText);
    const PoolDesign back = load_design(path, DesignFileFormat::AdjacencyText);
    CHECK(back.n_variables() == d.n_variables());
    CHECK(back.n_tests() == d.n_tests());
    for (std::int64_t a = 0; a < d.n_tests(); ++a) {
        auto lhs = d.pool(a), rhs = back.pool(a);
        CHECK(std::vector<std::int32_t>(lhs.begin(), lhs.end()) ==
              std::vector<std::int32_t>(rhs.begin(), rhs.end()));
    }
    std::remove(path.c_str());
}

TEST_CASE("malformed design files are rejected with context") {
    const std::string path = temp_path("gt_bad.json");

    {
        std::ofstream out(path);
        out << R"({"n_variables": 3, "n_tests": 1, "tests": [[0, 3]]})";
    }
    CHECK_THROWS_WITH_AS(load_design(path, DesignFileFormat::Json),
                         doctest::Contains("outside"), std::runtime_error);

    {
        std::ofstream out(path);
        out << R"({"n_variables": 3, "n_tests": 1, "tests": [[1, 1]]})";
    }
    CHECK_THROWS_WITH_AS(load_design(path, DesignFileFormat::Json),
                         doctest::Contains("duplicate"), std::runtime_error);

    {
        std::ofstream out(path);
        out << R"({"n_variables": 3, "n_tests": 2, "tests": [[0]]})";
    }
    CHECK_THROWS_AS(load_design(path, DesignFileFormat::Json), std::runtime_error);

    {
        std::ofstream out(path);
        out << "not json";
    }
    CHECK_THROWS_AS(load_design(path, DesignFileFormat::Json), std::runtime_error);

    {
        std::ofstream out(path);
        out << "3 2\n0 1\n";  // missing second test line
    }
    CHECK_THROWS_AS(load_design(path, DesignFileFormat::AdjacencyText), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("assignment parsing") {
    const Assignment bin = Assignment::parse("100", 3);
    CHECK(bin.bits == std::vector<std::uint8_t>{1, 0, 0});
    const Assignment hex = Assignment::parse("0x5", 4);
    CHECK(hex.bits == std::vector<std::uint8_t>{0, 1, 0, 1});
    CHECK_THROWS_AS(Assignment::parse("10", 3), std::invalid_argument);
    CHECK_THROWS_AS(Assignment::parse("102", 3), std::invalid_argument);
}
