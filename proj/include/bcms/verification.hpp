#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bcms/params.hpp"

namespace bcms {

/// Exact multiset of inserted keys.
class ExactCounter {
public:
    void add(std::uint64_t key, std::uint64_t count = 1) {
        counts_[key] += count;
        total_ += count;
    }
    std::uint64_t count(std::uint64_t key) const {
        auto it = counts_.find(key);
        return it == counts_.end() ? 0 : it->second;
    }
    std::size_t distinct() const noexcept { return counts_.size(); }
    std::uint64_t total() const noexcept { return total_; }
    const std::unordered_map<std::uint64_t, std::uint64_t>& counts() const noexcept { return counts_; }

private:
    std::unordered_map<std::uint64_t, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// An estimate came back below the true count.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct ErrorReport {
    std::uint64_t queries = 0;
    double meanOverestimate = 0.0;
    std::uint64_t maxOverestimate = 0;
    /// Fraction of queries with error >= threshold.
    double tailFraction = 0.0;
    double threshold = 0.0;
};

/// Accumulates per-query errors into an ErrorReport.
class ErrorAccumulator {
public:
    explicit ErrorAccumulator(double threshold) : threshold_(threshold) {}
    /// Throws InvariantViolation if estimate < truth.
    void add(std::uint64_t key, std::uint64_t estimate, std::uint64_t truth);
    ErrorReport report() const;

private:
    double threshold_;
    std::uint64_t queries_ = 0;
    long double sum_ = 0;
    std::uint64_t max_ = 0;
    std::uint64_t tail_ = 0;
};

/// Queries `keys` against `sketch` and compares with `oracle`. An empty key
/// list queries every distinct key in the oracle.
template <class Sketch>
ErrorReport overestimate_stats(Sketch& sketch, const ExactCounter& oracle, double threshold,
                               std::span<const std::uint64_t> keys = {}) {
    ErrorAccumulator acc(threshold);
    if (keys.empty()) {
        for (const auto& [key, truth] : oracle.counts()) acc.add(key, sketch.estimate(key), truth);
    } else {
        for (auto key : keys) acc.add(key, sketch.estimate(key), oracle.count(key));
    }
    return acc.report();
}

/// 3-sigma binomial slack for an observed fraction with success probability p.
double binomial_slack(double p, std::uint64_t trials);

/// Deterministic uniform 64-bit key stream.
std::vector<std::uint64_t> uniform_keys(std::uint64_t count, std::uint64_t seed);

enum class SketchVariant : std::uint8_t { classical, localized, buffered };
const char* to_string(SketchVariant variant) noexcept;

struct GuaranteeResult {
    ErrorReport report;
    double allowed = 0.0;  // delta + slack
    bool passed = false;
};

/// Inserts n uniform keys, queries the first `queryCount` of them, and checks
/// Pr[error >= epsilon * n] <= delta + 3-sigma slack.
GuaranteeResult check_cms_guarantee(const SketchParams& params, std::uint64_t n, std::uint64_t queryCount,
                                    std::uint64_t seed, SketchVariant variant = SketchVariant::classical);

/// Error threshold for the localized sketch: n*eps*(1 + sqrt(2(C+1) k ln k / n)).
double theorem_threshold(std::uint64_t n, double epsilon, double c, std::uint64_t k);
/// delta + 1/k^C.
double theorem_bound(double delta, double c, std::uint64_t k);

struct TheoremResult {
    double threshold = 0.0;
    double bound = 0.0;
    double allowed = 0.0;
    ErrorReport report;
    bool passed = false;
};

/// Localized-sketch tail check at the threshold above. Requires k >= 2, n >= k, C >= 1.
TheoremResult check_theorem_bound(const SketchParams& params, std::uint64_t n, double c, std::uint64_t queryCount,
                                  std::uint64_t seed);

/// Max-load threshold t = n/k + sqrt(2(C+1) n ln k / k).
double max_load_threshold(std::uint64_t n, std::uint64_t k, double c);

/// Rejects (n, k) unless n >= 10 * k * (ln k)^3, the finite stand-in for
/// "n grows faster than k (log k)^3".
void check_load_assumption(std::uint64_t n, std::uint64_t k);

/// Maps ball i of a trial to a bin in [0, k).
using BinPlacement = std::function<std::uint64_t(std::uint64_t ball)>;
/// Builds the placement for one trial from that trial's seed.
using PlacementFactory = std::function<BinPlacement(std::uint64_t trialSeed, std::uint64_t k)>;

/// Largest bin load after placing balls 0..n-1 with `place`.
std::uint64_t max_load(std::uint64_t n, std::uint64_t k, const BinPlacement& place);

/// Default placement: a freshly seeded page selector h_0 over ball ids.
PlacementFactory seeded_page_hash();

struct MaxLoadResult {
    double threshold = 0.0;
    std::uint64_t exceeded = 0;
    std::uint64_t trials = 0;
    double exceedFraction = 0.0;
    double bound = 0.0;    // 1/k^C
    double allowed = 0.0;  // bound + slack
    std::uint64_t worstLoad = 0;
    std::vector<std::uint64_t> trialMaxLoads;
    bool passed = false;
};

/// Throws n balls into k bins `trials` times.
MaxLoadResult max_load_trials(std::uint64_t n, std::uint64_t k, double c, std::uint64_t trials, std::uint64_t seed,
                              const PlacementFactory& placement = seeded_page_hash());

/// One CSV row per verification trial.
struct TrialRecord {
    std::uint64_t trial = 0;
    std::uint64_t seed = 0;
    std::uint64_t n = 0;
    std::uint64_t k = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    double threshold = 0.0;
    double bound = 0.0;
    double tailFraction = 0.0;
    double mean = 0.0;
    std::uint64_t max = 0;
};

void write_trial_csv_header(std::ostream& out);
void write_trial_csv_row(std::ostream& out, const TrialRecord& record);

}  // namespace bcms
