#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "bcms/params.hpp"
#include "bcms/verification.hpp"

namespace bcms::bench {

enum class Variant : std::uint8_t { classical, buffered };
enum class Backend : std::uint8_t { memory, file };

const char* to_string(Variant v) noexcept;
const char* to_string(Backend b) noexcept;
Variant parse_variant(const std::string& text);
Backend parse_backend(const std::string& text);

struct BenchConfig {
    Variant variant = Variant::buffered;
    Backend backend = Backend::memory;
    std::uint64_t sizeBytes = 64ull << 20;
    double delta = 0.01;
    std::uint64_t maxOverestimate = 8;
    std::uint32_t pageBytes = kDefaultPageBytes;
    /// 0 selects sizeBytes / 4.
    std::uint64_t bufferBytes = 0;
    std::uint64_t seed = 1;
    /// Unset selects the derived element budget.
    std::optional<std::uint64_t> elementCount;
    std::uint64_t queryCount = 100000;
    /// Directory for file-backed sketches.
    std::filesystem::path workDir = std::filesystem::temp_directory_path();
};

struct BenchResult {
    Variant variant = Variant::buffered;
    Backend backend = Backend::memory;
    std::uint64_t ops = 0;
    double wallSeconds = 0.0;
    double opsPerSecond = 0.0;
    std::uint64_t pageReads = 0;
    std::uint64_t pageWrites = 0;
    double amortizedIoPerOp = 0.0;
    double predictedIoPerOp = 0.0;
    std::optional<ErrorReport> errorReport;
};

/// Derived parameters plus the resolved buffer size; validates the config.
SketchParams resolve_params(const BenchConfig& config);

/// Inserts elementCount seeded uniform keys. The buffered variant ends with
/// flush_all, which is included in the timing and the I/O counts.
BenchResult run_insert_bench(const BenchConfig& config);

/// Runs the insert phase, resets the I/O counters, then issues queryCount
/// estimates of uniform-random keys.
BenchResult run_query_bench(const BenchConfig& config);

/// Same workload into both variants; errors measured over every inserted key
/// at threshold epsilon * n.
std::pair<ErrorReport, ErrorReport> run_overestimate_bench(const BenchConfig& config);

/// Prints the Table-1 style row for a size-derived configuration.
void print_params_row(std::ostream& out, std::uint64_t sizeBytes, const SketchParams& params);

enum class Suite : std::uint8_t { guarantee, theorem, maxload };
Suite parse_suite(const std::string& text);

struct VerifyOptions {
    Suite suite = Suite::guarantee;
    /// guarantee: epsilon of the sketch. Ignored by the other suites.
    double epsilon = std::numbers::e / 272;
    double delta = 0.05;
    double c = 1.0;
    /// Pages for theorem, bins for maxload.
    std::uint64_t k = 16;
    std::uint64_t n = 10000;
    std::uint64_t queries = 10000;
    /// Independent seeds (guarantee/theorem) or load trials (maxload).
    std::uint64_t trials = 20;
    /// Seeds that may fail before the suite fails (guarantee: 1 of 20).
    std::uint64_t allowedFailures = 0;
    std::uint32_t pageBytes = kDefaultPageBytes;
    std::uint64_t seed = 1;
};

/// Runs a verification suite, writing one CSV row per trial to `csv` and a
/// summary line to `log`. Returns true when the suite passes.
bool run_verify(const VerifyOptions& options, std::ostream& csv, std::ostream& log);

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const BenchConfig& config, const BenchResult& result);

}  // namespace bcms::bench
