#include "bcms/bench.hpp"

#include <chrono>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "bcms/buffered_sketch.hpp"
#include "bcms/hashing.hpp"
#include "bcms/paged_sketch.hpp"

namespace bcms::bench {
namespace {

using Clock = std::chrono::steady_clock;

std::filesystem::path sketch_path(const BenchConfig& config) {
    return config.workDir / ("bcms-" + std::string(to_string(config.variant)) + "-" + std::to_string(config.seed) +
                             ".sketch");
}

std::unique_ptr<PageStore> make_store(const BenchConfig& config, const SketchParams& params, HashMode mode) {
    if (config.backend == Backend::memory) return std::make_unique<MemoryPageStore>(params.pageBytes, params.pageCount);
    return FilePageStore::create(sketch_path(config), make_header(params, config.seed, mode));
}

// Owns whichever sketch the config asks for, behind one update/estimate surface.
class AnySketch {
public:
    AnySketch(const BenchConfig& config, const SketchParams& params) {
        if (config.variant == Variant::buffered) {
            buffered_ = std::make_unique<BufferedSketch>(params, config.seed,
                                                         make_store(config, params, HashMode::localized));
        } else {
            paged_ = std::make_unique<PagedSketch>(params, config.seed, HashMode::classical,
                                                   make_store(config, params, HashMode::classical));
        }
    }

    void update(std::uint64_t key) { buffered_ ? buffered_->update(key) : paged_->update(key); }
    std::uint64_t estimate(std::uint64_t key) { return buffered_ ? buffered_->estimate(key) : paged_->estimate(key); }
    void finish_inserts() {
        if (buffered_) buffered_->flush_all();
    }
    PageStore& store() { return buffered_ ? buffered_->store() : paged_->store(); }

private:
    std::unique_ptr<BufferedSketch> buffered_;
    std::unique_ptr<PagedSketch> paged_;
};

BenchResult make_result(const BenchConfig& config, std::uint64_t ops, Clock::duration elapsed, const IoStats& io,
                        double predicted) {
    BenchResult r;
    r.variant = config.variant;
    r.backend = config.backend;
    r.ops = ops;
    r.wallSeconds = std::chrono::duration<double>(elapsed).count();
    r.opsPerSecond = r.wallSeconds > 0 ? static_cast<double>(ops) / r.wallSeconds : 0.0;
    r.pageReads = io.pageReads;
    r.pageWrites = io.pageWrites;
    r.amortizedIoPerOp = ops ? static_cast<double>(io.total()) / static_cast<double>(ops) : 0.0;
    r.predictedIoPerOp = predicted;
    return r;
}

double predicted_insert_io(const BenchConfig& config, const SketchParams& params) {
    if (config.variant == Variant::classical) return 2.0 * params.depth;
    return static_cast<double>(params.pageCount) * params.cellBytes * params.depth /
           static_cast<double>(params.bufferBytes);
}

std::uint64_t element_count(const BenchConfig& config, const SketchParams& params) {
    return config.elementCount.value_or(params.elementBudget);
}

}  // namespace

const char* to_string(Variant v) noexcept { return v == Variant::buffered ? "buffered" : "classical"; }
const char* to_string(Backend b) noexcept { return b == Backend::file ? "file" : "memory"; }

Variant parse_variant(const std::string& text) {
    if (text == "classical") return Variant::classical;
    if (text == "buffered") return Variant::buffered;
    throw std::invalid_argument("unknown variant '" + text + "' (expected classical or buffered)");
}

Backend parse_backend(const std::string& text) {
    if (text == "memory") return Backend::memory;
    if (text == "file") return Backend::file;
    throw std::invalid_argument("unknown backend '" + text + "' (expected memory or file)");
}

SketchParams resolve_params(const BenchConfig& config) {
    SketchParams params = derive_params_from_size(config.sizeBytes, config.delta, config.maxOverestimate,
                                                  config.pageBytes);
    params.bufferBytes = config.bufferBytes ? config.bufferBytes : config.sizeBytes / 4;
    if (config.variant == Variant::buffered && params.bufferBytes >= config.sizeBytes) {
        throw std::invalid_argument("buffer must be smaller than the sketch");
    }
    return params;
}

BenchResult run_insert_bench(const BenchConfig& config) {
    const SketchParams params = resolve_params(config);
    const std::uint64_t n = element_count(config, params);
    AnySketch sketch(config, params);
    std::mt19937_64 rng(config.seed);

    const auto start = Clock::now();
    for (std::uint64_t i = 0; i < n; ++i) sketch.update(rng());
    sketch.finish_inserts();
    const auto elapsed = Clock::now() - start;
    return make_result(config, n, elapsed, sketch.store().stats(), predicted_insert_io(config, params));
}

BenchResult run_query_bench(const BenchConfig& config) {
    const SketchParams params = resolve_params(config);
    const std::uint64_t n = element_count(config, params);
    AnySketch sketch(config, params);
    std::mt19937_64 rng(config.seed);
    for (std::uint64_t i = 0; i < n; ++i) sketch.update(rng());
    sketch.finish_inserts();
    sketch.store().reset_stats();

    std::mt19937_64 queries(derive_seed(config.seed, 1));
    std::uint64_t sink = 0;
    const auto start = Clock::now();
    for (std::uint64_t i = 0; i < config.queryCount; ++i) sink += sketch.estimate(queries());
    const auto elapsed = Clock::now() - start;
    (void)sink;
    const double predicted = config.variant == Variant::buffered ? 1.0 : static_cast<double>(params.depth);
    return make_result(config, config.queryCount, elapsed, sketch.store().stats(), predicted);
}

std::pair<ErrorReport, ErrorReport> run_overestimate_bench(const BenchConfig& config) {
    const SketchParams params = resolve_params(config);
    const std::uint64_t n = element_count(config, params);
    const double threshold = params.epsilon * static_cast<double>(n);

    ExactCounter oracle;
    std::mt19937_64 rng(config.seed);
    std::vector<std::uint64_t> keys(n);
    for (auto& key : keys) {
        key = rng();
        oracle.add(key);
    }

    auto run = [&](Variant variant) {
        BenchConfig c = config;
        c.variant = variant;
        AnySketch sketch(c, params);
        for (auto key : keys) sketch.update(key);
        sketch.finish_inserts();
        return overestimate_stats(sketch, oracle, threshold);
    };
    return {run(Variant::classical), run(Variant::buffered)};
}

void print_params_row(std::ostream& out, std::uint64_t sizeBytes, const SketchParams& p) {
    out << "sizeBytes,depth,width,paddedWidth,columnsPerPage,pageCount,cellBytes,pageBytes,elementBudget,epsilon\n"
        << sizeBytes << ',' << p.depth << ',' << p.requestedWidth << ',' << p.width << ',' << p.columnsPerPage << ','
        << p.pageCount << ',' << p.cellBytes << ',' << p.pageBytes << ',' << p.elementBudget << ',' << p.epsilon
        << '\n';
}

Suite parse_suite(const std::string& text) {
    if (text == "guarantee") return Suite::guarantee;
    if (text == "theorem") return Suite::theorem;
    if (text == "maxload") return Suite::maxload;
    throw std::invalid_argument("unknown suite '" + text + "' (expected guarantee, theorem or maxload)");
}

bool run_verify(const VerifyOptions& o, std::ostream& csv, std::ostream& log) {
    write_trial_csv_header(csv);
    if (o.suite == Suite::maxload) {
        const MaxLoadResult r = max_load_trials(o.n, o.k, o.c, o.trials, o.seed);
        // Per trial: tailFraction is 1 when that trial's max load exceeded t.
        for (std::uint64_t trial = 0; trial < r.trialMaxLoads.size(); ++trial) {
            TrialRecord rec;
            rec.trial = trial;
            rec.seed = derive_seed(o.seed, static_cast<std::uint32_t>(trial));
            rec.n = o.n;
            rec.k = o.k;
            rec.threshold = r.threshold;
            rec.bound = r.bound;
            rec.tailFraction = static_cast<double>(r.trialMaxLoads[trial]) > r.threshold ? 1.0 : 0.0;
            rec.mean = static_cast<double>(o.n) / static_cast<double>(o.k);
            rec.max = r.trialMaxLoads[trial];
            write_trial_csv_row(csv, rec);
        }
        log << "maxload: " << r.exceeded << "/" << r.trials << " trials exceeded t=" << r.threshold
            << " (allowed fraction " << r.allowed << ") -> " << (r.passed ? "PASS" : "FAIL") << '\n';
        return r.passed;
    }

    SketchParams params;
    if (o.suite == Suite::guarantee) {
        params = derive_params_from_error(o.epsilon, o.delta, o.pageBytes);
    } else {
        params = make_geometry(depth_for_delta(o.delta), o.k, o.pageBytes);
        params.delta = o.delta;
    }

    std::uint64_t failures = 0;
    for (std::uint64_t trial = 0; trial < o.trials; ++trial) {
        const std::uint64_t seed = o.seed + trial;
        TrialRecord rec;
        rec.trial = trial;
        rec.seed = seed;
        rec.n = o.n;
        rec.k = params.pageCount;
        rec.epsilon = params.epsilon;
        rec.delta = params.delta;
        bool passed = false;
        if (o.suite == Suite::guarantee) {
            const GuaranteeResult r = check_cms_guarantee(params, o.n, o.queries, seed);
            rec.threshold = r.report.threshold;
            rec.bound = params.delta;
            rec.tailFraction = r.report.tailFraction;
            rec.mean = r.report.meanOverestimate;
            rec.max = r.report.maxOverestimate;
            passed = r.passed;
        } else {
            const TheoremResult r = check_theorem_bound(params, o.n, o.c, o.queries, seed);
            rec.threshold = r.threshold;
            rec.bound = r.bound;
            rec.tailFraction = r.report.tailFraction;
            rec.mean = r.report.meanOverestimate;
            rec.max = r.report.maxOverestimate;
            passed = r.passed;
        }
        if (!passed) ++failures;
        write_trial_csv_row(csv, rec);
    }
    const bool ok = failures <= o.allowedFailures;
    log << (o.suite == Suite::guarantee ? "guarantee" : "theorem") << ": " << (o.trials - failures) << "/" << o.trials
        << " seeds within bound (allowed failures " << o.allowedFailures << ") -> " << (ok ? "PASS" : "FAIL") << '\n';
    return ok;
}

void write_csv_header(std::ostream& out) {
    out << "variant,backend,sizeBytes,delta,O,seed,ops,wallSeconds,opsPerSec,pageReads,pageWrites,amortizedIo,"
           "predictedIo\n";
}

void write_csv_row(std::ostream& out, const BenchConfig& c, const BenchResult& r) {
    out << to_string(r.variant) << ',' << to_string(r.backend) << ',' << c.sizeBytes << ',' << c.delta << ','
        << c.maxOverestimate << ',' << c.seed << ',' << r.ops << ',' << r.wallSeconds << ',' << r.opsPerSecond << ','
        << r.pageReads << ',' << r.pageWrites << ',' << r.amortizedIoPerOp << ',' << r.predictedIoPerOp << '\n';
}

}  // namespace bcms::bench
