#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "bcms/bench.hpp"
#include "bcms/count_min.hpp"
#include "bcms/hashing.hpp"
#include "temp_dir.hpp"

using namespace bcms;
using namespace bcms::bench;

namespace {

BenchConfig small_config(Variant variant, Backend backend = Backend::memory) {
    BenchConfig c;
    c.variant = variant;
    c.backend = backend;
    c.sizeBytes = 1 << 20;
    c.bufferBytes = 1 << 18;
    c.seed = 42;
    return c;
}

// Distinct pages touched by each key's classical probes, summed.
std::uint64_t classical_pages(const SketchParams& params, std::uint64_t seed, std::mt19937_64 rng, std::uint64_t ops) {
    CountMinSketch columns(params, seed, HashMode::classical);
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < ops; ++i) {
        std::set<std::uint64_t> pages;
        for (auto col : columns.columns(rng())) pages.insert(col / params.columnsPerPage);
        total += pages.size();
    }
    return total;
}

}  // namespace

TEST_CASE("configure row") {
    std::ostringstream out;
    print_params_row(out, 128ull << 20, derive_params_from_size(128ull << 20, 0.01, 8));
    CHECK(out.str().find("134217728,5,3355444,") != std::string::npos);
}

TEST_CASE("config validation") {
    auto c = small_config(Variant::buffered);
    c.bufferBytes = c.sizeBytes;
    CHECK_THROWS_AS(resolve_params(c), std::invalid_argument);
    c.sizeBytes = 100;
    CHECK_THROWS_AS(resolve_params(c), std::invalid_argument);
    CHECK_THROWS_AS(parse_variant("fancy"), std::invalid_argument);
    CHECK_THROWS_AS(parse_backend("tape"), std::invalid_argument);
    CHECK(resolve_params(small_config(Variant::classical)).bufferBytes == 1 << 18);
}

TEST_CASE("buffered insert below one sub-buffer capacity only pays the final flush") {
    auto c = small_config(Variant::buffered);
    c.elementCount = 50;
    const auto params = resolve_params(c);
    HashFamily family(c.seed, params.depth, params.pageCount, params.columnsPerPage);
    std::mt19937_64 rng(c.seed);
    std::set<std::uint64_t> dirty;
    for (int i = 0; i < 50; ++i) dirty.insert(family.page_index(rng()));

    const auto r = run_insert_bench(c);
    CHECK(r.ops == 50);
    CHECK(r.pageReads == dirty.size());
    CHECK(r.pageWrites == dirty.size());
}

TEST_CASE("classical file-backed insert reads every distinct page per update") {
    TempDir dir;
    auto c = small_config(Variant::classical, Backend::file);
    c.workDir = dir.path;
    c.elementCount = 3000;
    const auto params = resolve_params(c);
    const auto expected = classical_pages(params, c.seed, std::mt19937_64(c.seed), 3000);
    const auto r = run_insert_bench(c);
    CHECK(r.pageReads == expected);
    CHECK(r.pageWrites == expected);
    CHECK(r.pageReads >= 3000);
    CHECK(r.amortizedIoPerOp == doctest::Approx(2.0 * expected / 3000));
}

TEST_CASE("insert bench is deterministic") {
    for (auto variant : {Variant::classical, Variant::buffered}) {
        auto c = small_config(variant);
        c.elementCount = 20'000;
        const auto a = run_insert_bench(c);
        const auto b = run_insert_bench(c);
        CHECK(a.pageReads == b.pageReads);
        CHECK(a.pageWrites == b.pageWrites);
    }
}

TEST_CASE("query bench I/O") {
    SUBCASE("buffered: one read per query, no writes") {
        auto c = small_config(Variant::buffered);
        c.elementCount = 30'000;
        c.queryCount = 5000;
        const auto r = run_query_bench(c);
        CHECK(r.pageReads == 5000);
        CHECK(r.pageWrites == 0);
    }
    SUBCASE("classical: distinct pages per query, at most depth") {
        auto c = small_config(Variant::classical);
        c.elementCount = 10'000;
        c.queryCount = 5000;
        const auto params = resolve_params(c);
        const auto r = run_query_bench(c);
        CHECK(r.pageReads <= 5000 * params.depth);
        CHECK(r.pageReads == classical_pages(params, c.seed, std::mt19937_64(derive_seed(c.seed, 1)), 5000));
        CHECK(r.pageWrites == 0);
    }
    SUBCASE("zero queries") {
        auto c = small_config(Variant::buffered);
        c.elementCount = 1000;
        c.queryCount = 0;
        const auto r = run_query_bench(c);
        CHECK(r.pageReads + r.pageWrites == 0);
    }
}

TEST_CASE("overestimate bench") {
    SUBCASE("paired runs agree and respect the tail bound") {
        auto c = small_config(Variant::buffered);
        c.elementCount = 100'000;
        const auto params = resolve_params(c);
        const auto [classical, buffered] = run_overestimate_bench(c);
        CHECK(classical.queries == buffered.queries);
        const double allowed = params.delta + binomial_slack(params.delta, classical.queries);
        CHECK(classical.tailFraction <= allowed);
        CHECK(buffered.tailFraction <= allowed);
        CHECK(std::abs(buffered.meanOverestimate - classical.meanOverestimate) <= 0.05 * classical.meanOverestimate);
    }
    SUBCASE("no elements") {
        auto c = small_config(Variant::buffered);
        c.elementCount = 0;
        const auto [classical, buffered] = run_overestimate_bench(c);
        CHECK(classical.queries == 0);
        CHECK(buffered.queries == 0);
        CHECK(classical.meanOverestimate == 0.0);
        CHECK(buffered.maxOverestimate == 0);
    }
}

TEST_CASE("bench csv") {
    auto c = small_config(Variant::buffered);
    c.elementCount = 100;
    const auto r = run_insert_bench(c);
    std::ostringstream out;
    write_csv_header(out);
    write_csv_row(out, c, r);
    const auto text = out.str();
    CHECK(text.rfind("variant,backend,sizeBytes,delta,O,seed,ops,wallSeconds,opsPerSec,pageReads,pageWrites,"
                     "amortizedIo,predictedIo\n",
                     0) == 0);
    CHECK(text.find("\nbuffered,memory,1048576,0.01,8,42,100,") != std::string::npos);
}

TEST_CASE("verify suites") {
    std::ostringstream csv, log;
    SUBCASE("guarantee") {
        VerifyOptions o;
        o.trials = 3;
        CHECK(run_verify(o, csv, log));
        CHECK(log.str().find("PASS") != std::string::npos);
    }
    SUBCASE("theorem") {
        VerifyOptions o;
        o.suite = Suite::theorem;
        o.n = 200'000;
        o.trials = 2;
        CHECK(run_verify(o, csv, log));
    }
    SUBCASE("maxload") {
        VerifyOptions o;
        o.suite = Suite::maxload;
        o.n = 200'000;
        o.k = 64;
        o.trials = 10;
        CHECK(run_verify(o, csv, log));
        const auto text = csv.str();
        CHECK(std::count(text.begin(), text.end(), '\n') == 11);
    }
    CHECK(csv.str().rfind("trial,seed,n,k,epsilon,delta,threshold,bound,tailFraction,mean,max\n", 0) == 0);
    CHECK_THROWS_AS(parse_suite("nope"), std::invalid_argument);
}
