#include "gt/design.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gt {

PoolDesign::PoolDesign(std::int64_t n_variables,
                       std::vector<std::vector<std::int32_t>> tests,
                       Provenance provenance)
    : n_variables_(n_variables), pools_(std::move(tests)), provenance_(std::move(provenance)) {
    if (n_variables_ < 1) throw std::invalid_argument("PoolDesign: n_variables must be >= 1");
    if (pools_.empty()) throw std::invalid_argument("PoolDesign: n_tests must be >= 1");

    n_edges_ = 0;
    for (std::size_t a = 0; a < pools_.size(); ++a) {
        auto& pool = pools_[a];
        std::sort(pool.begin(), pool.end());
        for (std::size_t k = 0; k < pool.size(); ++k) {
            if (pool[k] < 0 || pool[k] >= n_variables_)
                throw std::invalid_argument("PoolDesign: test " + std::to_string(a) +
                                            " has variable index " + std::to_string(pool[k]) +
                                            " outside [0," + std::to_string(n_variables_) + ")");
            if (k > 0 && pool[k] == pool[k - 1])
                throw std::invalid_argument("PoolDesign: test " + std::to_string(a) +
                                            " contains duplicate variable " + std::to_string(pool[k]));
        }
        n_edges_ += static_cast<std::int64_t>(pool.size());
    }

    var_tests_.assign(static_cast<std::size_t>(n_variables_), {});
    for (std::size_t a = 0; a < pools_.size(); ++a)
        for (std::int32_t i : pools_[a])
            var_tests_[static_cast<std::size_t>(i)].push_back(static_cast<std::int32_t>(a));
}

std::span<const std::int32_t> PoolDesign::pool(std::int64_t a) const {
    if (a < 0 || a >= n_tests()) throw std::out_of_range("PoolDesign::pool: test index out of range");
    return pools_[static_cast<std::size_t>(a)];
}

std::span<const std::int32_t> PoolDesign::tests_of(std::int64_t i) const {
    if (i < 0 || i >= n_variables_)
        throw std::out_of_range("PoolDesign::tests_of: variable index out of range");
    return var_tests_[static_cast<std::size_t>(i)];
}

std::int64_t Assignment::count_ones() const {
    std::int64_t c = 0;
    for (auto b : bits) c += b;
    return c;
}

Assignment Assignment::parse(const std::string& text, std::int64_t n) {
    Assignment x;
    x.bits.assign(static_cast<std::size_t>(n), 0);
    if (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0) {
        // Hex, MSB first: bit k of the value is variable n-1-k.
        std::size_t nhex = text.size() - 2;
        for (std::size_t h = 0; h < nhex; ++h) {
            char c = text[2 + h];
            int v;
            if (c >= '0' && c <= '9') v = c - '0';
            else if (c >= 'a' && c <= 'f') v = 10 + (c - 'a');
            else if (c >= 'A' && c <= 'F') v = 10 + (c - 'A');
            else throw std::invalid_argument("Assignment::parse: bad hex digit");
            for (int b = 0; b < 4; ++b) {
                std::int64_t bitpos = static_cast<std::int64_t>((nhex - 1 - h) * 4 + (3 - b));
                std::int64_t var = n - 1 - bitpos;
                if (v & (8 >> b)) {
                    if (var < 0) throw std::invalid_argument("Assignment::parse: hex value too wide");
                    x.bits[static_cast<std::size_t>(var)] = 1;
                }
            }
        }
        return x;
    }
    if (static_cast<std::int64_t>(text.size()) != n)
        throw std::invalid_argument("Assignment::parse: binary string length " +
                                    std::to_string(text.size()) + " != n = " + std::to_string(n));
    for (std::int64_t i = 0; i < n; ++i) {
        char c = text[static_cast<std::size_t>(i)];
        if (c != '0' && c != '1') throw std::invalid_argument("Assignment::parse: expected 0/1");
        x.bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(c - '0');
    }
    return x;
}

bool girth_at_least_6(const PoolDesign& design) {
    // A 4-cycle is a variable pair sharing two tests. Walk each test's pairs
    // through per-variable sorted test lists: variables i<j share tests a<b
    // iff the pair (i,j) appears in two pools. Cheaper equivalent: for each
    // variable, collect the co-members of all its tests; a repeat means a
    // shared pair.
    std::vector<std::int32_t> comembers;
    for (std::int64_t i = 0; i < design.n_variables(); ++i) {
        comembers.clear();
        for (std::int32_t a : design.tests_of(i))
            for (std::int32_t j : design.pool(a))
                if (j > i) comembers.push_back(j);  // j<i pairs were checked from j's side
        std::sort(comembers.begin(), comembers.end());
        for (std::size_t k = 1; k < comembers.size(); ++k)
            if (comembers[k] == comembers[k - 1]) return false;
    }
    return true;
}

CycleCensus four_cycle_census(const PoolDesign& design, std::int64_t variable) {
    if (variable < 0 || variable >= design.n_variables())
        throw std::out_of_range("four_cycle_census: variable index out of range");

    CycleCensus census;
    census.variable = variable;

    // Sorted list of co-members over all tests of `variable`; a variable j
    // appearing s times shares s tests, contributing C(s,2) cycles.
    std::vector<std::int32_t> comembers;
    for (std::int32_t a : design.tests_of(variable))
        for (std::int32_t j : design.pool(a))
            if (j != variable) comembers.push_back(j);
    std::sort(comembers.begin(), comembers.end());

    std::vector<std::int32_t> repeated;  // variables sharing >= 2 tests
    for (std::size_t k = 0; k < comembers.size();) {
        std::size_t e = k;
        while (e < comembers.size() && comembers[e] == comembers[k]) ++e;
        const std::int64_t s = static_cast<std::int64_t>(e - k);
        census.four_cycle_count += s * (s - 1) / 2;
        if (s >= 3) census.has_type_d = true;
        if (s >= 2) repeated.push_back(comembers[k]);
        k = e;
    }

    for (std::int32_t a : design.tests_of(variable)) {
        bool on_cycle = false;
        for (std::int32_t j : design.pool(a)) {
            if (j == variable) continue;
            if (std::binary_search(repeated.begin(), repeated.end(), j)) {
                on_cycle = true;
                break;
            }
        }
        (on_cycle ? census.tests_on_cycles : census.tests_off_cycles).push_back(a);
    }
    return census;
}

DegreeProfile degree_profile(const PoolDesign& design) {
    DegreeProfile profile;
    profile.variable_degrees.reserve(static_cast<std::size_t>(design.n_variables()));
    profile.test_degrees.reserve(static_cast<std::size_t>(design.n_tests()));
    for (std::int64_t i = 0; i < design.n_variables(); ++i)
        profile.variable_degrees.push_back(design.variable_degree(i));
    for (std::int64_t a = 0; a < design.n_tests(); ++a)
        profile.test_degrees.push_back(design.test_degree(a));
    return profile;
}

namespace {

void save_json(const PoolDesign& design, const std::string& path) {
    nlohmann::json j;
    j["n_variables"] = design.n_variables();
    j["n_tests"] = design.n_tests();
    auto tests = nlohmann::json::array();
    for (std::int64_t a = 0; a < design.n_tests(); ++a) {
        auto pool = nlohmann::json::array();
        for (std::int32_t i : design.pool(a)) pool.push_back(i);
        tests.push_back(std::move(pool));
    }
    j["tests"] = std::move(tests);
    j["family"] = design.provenance().family;
    j["seed"] = design.provenance().seed;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_design: cannot open " + path);
    out << j.dump(2) << '\n';
}

PoolDesign load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_design: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("load_design: " + path + ": " + e.what());
    }
    for (const char* field : {"n_variables", "n_tests", "tests"})
        if (!j.contains(field))
            throw std::runtime_error("load_design: " + path + ": missing field '" + field + "'");

    const std::int64_t n = j["n_variables"].get<std::int64_t>();
    const std::int64_t m = j["n_tests"].get<std::int64_t>();
    std::vector<std::vector<std::int32_t>> tests;
    for (const auto& pool : j["tests"]) tests.push_back(pool.get<std::vector<std::int32_t>>());
    if (static_cast<std::int64_t>(tests.size()) != m)
        throw std::runtime_error("load_design: " + path + ": n_tests = " + std::to_string(m) +
                                 " but file lists " + std::to_string(tests.size()) + " pools");

    Provenance prov;
    if (j.contains("family")) prov.family = j["family"].get<std::string>();
    if (j.contains("seed")) prov.seed = j["seed"].get<std::uint64_t>();
    try {
        return PoolDesign(n, std::move(tests), std::move(prov));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("load_design: " + path + ": " + e.what());
    }
}

void save_text(const PoolDesign& design, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_design: cannot open " + path);
    out << design.n_variables() << ' ' << design.n_tests() << '\n';
    for (std::int64_t a = 0; a < design.n_tests(); ++a) {
        bool first = true;
        for (std::int32_t i : design.pool(a)) {
            if (!first) out << ' ';
            out << i;
            first = false;
        }
        out << '\n';
    }
}

PoolDesign load_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_design: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_design: " + path + ": empty file");
    std::int64_t n = 0, m = 0;
    {
        std::istringstream head(line);
        if (!(head >> n >> m))
            throw std::runtime_error("load_design: " + path + ":1: expected header 'N M'");
    }
    std::vector<std::vector<std::int32_t>> tests;
    for (std::int64_t a = 0; a < m; ++a) {
        if (!std::getline(in, line))
            throw std::runtime_error("load_design: " + path + ": expected " + std::to_string(m) +
                                     " test lines, got " + std::to_string(a));
        std::istringstream row(line);
        std::vector<std::int32_t> pool;
        std::int64_t idx;
        while (row >> idx) pool.push_back(static_cast<std::int32_t>(idx));
        if (!row.eof())
            throw std::runtime_error("load_design: " + path + ":" + std::to_string(a + 2) +
                                     ": malformed index");
        tests.push_back(std::move(pool));
    }
    try {
        return PoolDesign(n, std::move(tests));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("load_design: " + path + ": " + e.what());
    }
}

} // namespace

void save_design(const PoolDesign& design, const std::string& path, DesignFileFormat format) {
    if (format == DesignFileFormat::Json)
        save_json(design, path);
    else
        save_text(design, path);
}

PoolDesign load_design(const std::string& path, DesignFileFormat format) {
    return format == DesignFileFormat::Json ? load_json(path) : load_text(path);
}

} // namespace gt
