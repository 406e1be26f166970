#include <doctest.h>

#include <map>
#include <random>
#include <vector>

#include "bcms/count_min.hpp"

using namespace bcms;

namespace {

SketchParams small_geometry() {
    // 2 rows, 2 pages of 2 columns: width 4.
    return make_geometry(2, 2, 32, 8);
}

// Reference matrix built straight from the seed scheme, bypassing CountMinSketch.
std::vector<std::vector<std::uint64_t>> simulate(const SketchParams& p, std::uint64_t seed, HashMode mode,
                                                 const std::vector<std::pair<std::uint64_t, std::uint64_t>>& updates) {
    std::vector<std::vector<std::uint64_t>> cells(p.depth, std::vector<std::uint64_t>(p.width));
    for (auto [key, count] : updates) {
        const std::uint64_t page = murmur64a(key, derive_seed(seed, 0)) % p.pageCount;
        for (std::uint32_t row = 0; row < p.depth; ++row) {
            const std::uint64_t h = murmur64a(key, derive_seed(seed, row + 1));
            const std::uint64_t column =
                mode == HashMode::classical ? h % p.width : page * p.columnsPerPage + h % p.columnsPerPage;
            cells[row][column] += count;
        }
    }
    return cells;
}

}  // namespace

TEST_CASE("fresh sketch") {
    CountMinSketch sketch(small_geometry(), 1);
    CHECK(sketch.estimate(12345) == 0);
    CHECK(sketch.total_inserted() == 0);
}

TEST_CASE("single update touches one cell per row") {
    CountMinSketch sketch(derive_params_from_error(0.01, 0.05), 1);
    sketch.update(42);
    CHECK(sketch.total_inserted() == 1);
    for (std::uint32_t row = 0; row < sketch.params().depth; ++row) CHECK(sketch.matrix().row_sum(row) == 1);
    CHECK(sketch.estimate(42) == 1);
    sketch.update(42);
    CHECK(sketch.estimate(42) >= 2);
}

TEST_CASE("update rejects zero count") {
    CountMinSketch sketch(small_geometry(), 1);
    CHECK_THROWS_AS(sketch.update(1, 0), std::invalid_argument);
}

TEST_CASE("cell matrix equals an independent simulation") {
    std::mt19937_64 rng(8);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> updates;
    for (int i = 0; i < 50; ++i) updates.emplace_back(rng(), 1 + rng() % 9);

    for (auto mode : {HashMode::classical, HashMode::localized}) {
        CAPTURE(to_string(mode));
        const auto params = small_geometry();
        CountMinSketch sketch(params, 77, mode);
        for (auto [key, count] : updates) sketch.update(key, count);
        const auto expected = simulate(params, 77, mode, updates);
        for (std::uint32_t row = 0; row < params.depth; ++row) {
            for (std::uint64_t col = 0; col < params.width; ++col) CHECK(sketch.matrix().at(row, col) == expected[row][col]);
        }
    }
}

TEST_CASE("counter overflow is a hard error that leaves the sketch unchanged") {
    auto params = make_geometry(3, 4, 24, 1);  // 1-byte cells
    CountMinSketch sketch(params, 5);
    sketch.update(9, 255);
    const CounterMatrix before = sketch.matrix();
    CHECK_THROWS_AS(sketch.update(9, 1), CounterOverflow);
    CHECK(sketch.matrix() == before);
    CHECK(sketch.estimate(9) == 255);
}

TEST_CASE("properties over random workloads") {
    for (std::uint64_t trial = 0; trial < 40; ++trial) {
        std::mt19937_64 rng(trial);
        const std::uint32_t depth = 1 + rng() % 5;
        const std::uint64_t pages = 1 + rng() % 8;
        const std::uint32_t pageBytes = depth * 8 * (1 + rng() % 6);
        const auto params = make_geometry(depth, pages, pageBytes);
        const auto mode = trial % 2 ? HashMode::localized : HashMode::classical;
        CountMinSketch sketch(params, rng(), mode);

        std::map<std::uint64_t, std::uint64_t> truth;
        std::vector<std::uint64_t> universe(1 + rng() % 60);
        for (auto& key : universe) key = rng();

        std::uint64_t total = 0;
        for (int step = 0; step < 500; ++step) {
            const auto key = universe[rng() % universe.size()];
            const auto count = 1 + rng() % 3;
            const auto before = sketch.estimate(key);
            sketch.update(key, count);
            truth[key] += count;
            total += count;
            CHECK(sketch.estimate(key) >= before + count);  // monotone, and this key's own increment
        }
        for (auto [key, count] : truth) CHECK(sketch.estimate(key) >= count);
        for (std::uint32_t row = 0; row < depth; ++row) CHECK(sketch.matrix().row_sum(row) == total);
        CHECK(sketch.total_inserted() == total);

        if (mode == HashMode::localized) {
            for (auto key : universe) {
                const auto page = sketch.hashes().page_index(key);
                for (auto col : sketch.columns(key)) {
                    CHECK(col >= page * params.columnsPerPage);
                    CHECK(col < (page + 1) * params.columnsPerPage);
                }
            }
        }
    }
}
