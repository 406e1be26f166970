#include "bcms/verification.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

#include "bcms/buffered_sketch.hpp"
#include "bcms/count_min.hpp"
#include "bcms/hashing.hpp"

namespace bcms {

void ErrorAccumulator::add(std::uint64_t key, std::uint64_t estimate, std::uint64_t truth) {
    if (estimate < truth) {
        throw InvariantViolation("estimate " + std::to_string(estimate) + " below true count " +
                                 std::to_string(truth) + " for key " + std::to_string(key));
    }
    const std::uint64_t error = estimate - truth;
    ++queries_;
    sum_ += error;
    max_ = std::max(max_, error);
    if (static_cast<double>(error) >= threshold_) ++tail_;
}

ErrorReport ErrorAccumulator::report() const {
    ErrorReport r;
    r.queries = queries_;
    r.threshold = threshold_;
    r.maxOverestimate = max_;
    if (queries_ > 0) {
        r.meanOverestimate = static_cast<double>(sum_ / queries_);
        r.tailFraction = static_cast<double>(tail_) / static_cast<double>(queries_);
    }
    return r;
}

double binomial_slack(double p, std::uint64_t trials) {
    if (trials == 0) return 1.0;
    p = std::clamp(p, 0.0, 1.0);
    return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

std::vector<std::uint64_t> uniform_keys(std::uint64_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> keys(count);
    for (auto& key : keys) key = rng();
    return keys;
}

const char* to_string(SketchVariant variant) noexcept {
    switch (variant) {
        case SketchVariant::classical: return "classical";
        case SketchVariant::localized: return "localized";
        case SketchVariant::buffered: return "buffered";
    }
    return "?";
}

namespace {

// Inserts `keys` into the requested variant and reports errors on `queries`.
ErrorReport run_error_trial(const SketchParams& params, std::span<const std::uint64_t> keys,
                            std::span<const std::uint64_t> queries, std::uint64_t seed, SketchVariant variant,
                            double threshold) {
    ExactCounter oracle;
    for (auto key : keys) oracle.add(key);

    if (variant == SketchVariant::buffered) {
        SketchParams p = params;
        if (p.bufferBytes == 0) {
            // Ratio 4 by default, but never below one entry per page.
            const std::uint64_t entry = p.depth * 2 + 4;
            p.bufferBytes = std::max(p.storage_bytes() / 4, p.pageCount * entry);
        }
        BufferedSketch sketch(p, seed, std::make_unique<MemoryPageStore>(p.pageBytes, p.pageCount));
        for (auto key : keys) sketch.update(key);
        sketch.flush_all();
        return overestimate_stats(sketch, oracle, threshold, queries);
    }
    CountMinSketch sketch(params, seed,
                          variant == SketchVariant::localized ? HashMode::localized : HashMode::classical);
    for (auto key : keys) sketch.update(key);
    return overestimate_stats(sketch, oracle, threshold, queries);
}

}  // namespace

GuaranteeResult check_cms_guarantee(const SketchParams& params, std::uint64_t n, std::uint64_t queryCount,
                                    std::uint64_t seed, SketchVariant variant) {
    if (queryCount > n) throw std::invalid_argument("queryCount cannot exceed the number of inserted keys");
    const auto keys = uniform_keys(n, seed);
    const auto queries = std::span<const std::uint64_t>(keys).first(queryCount);

    GuaranteeResult result;
    result.report = run_error_trial(params, keys, queries, derive_seed(seed, 1), variant,
                                    params.epsilon * static_cast<double>(n));
    result.allowed = params.delta + binomial_slack(params.delta, queryCount);
    result.passed = result.report.tailFraction <= result.allowed;
    return result;
}

double theorem_threshold(std::uint64_t n, double epsilon, double c, std::uint64_t k) {
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    return nd * epsilon * (1.0 + std::sqrt(2.0 * (c + 1.0) * kd * std::log(kd) / nd));
}

double theorem_bound(double delta, double c, std::uint64_t k) {
    return delta + 1.0 / std::pow(static_cast<double>(k), c);
}

TheoremResult check_theorem_bound(const SketchParams& params, std::uint64_t n, double c, std::uint64_t queryCount,
                                  std::uint64_t seed) {
    const std::uint64_t k = params.pageCount;
    if (k < 2) throw std::invalid_argument("theorem check needs at least 2 pages (ln k = 0 for k = 1)");
    if (n < k) throw std::invalid_argument("theorem check needs n >= k");
    if (c < 1.0) throw std::invalid_argument("C must be >= 1");
    if (queryCount > n) throw std::invalid_argument("queryCount cannot exceed the number of inserted keys");

    TheoremResult result;
    result.threshold = theorem_threshold(n, params.epsilon, c, k);
    result.bound = theorem_bound(params.delta, c, k);
    result.allowed = result.bound + binomial_slack(std::min(result.bound, 1.0), queryCount);

    const auto keys = uniform_keys(n, seed);
    result.report = run_error_trial(params, keys, std::span<const std::uint64_t>(keys).first(queryCount),
                                    derive_seed(seed, 1), SketchVariant::localized, result.threshold);
    result.passed = result.report.tailFraction <= result.allowed;
    return result;
}

double max_load_threshold(std::uint64_t n, std::uint64_t k, double c) {
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    return nd / kd + std::sqrt(2.0 * (c + 1.0) * nd * std::log(kd) / kd);
}

void check_load_assumption(std::uint64_t n, std::uint64_t k) {
    if (k < 2) throw std::invalid_argument("max-load analysis needs k >= 2 bins");
    const double lk = std::log(static_cast<double>(k));
    const double floor = 10.0 * static_cast<double>(k) * lk * lk * lk;
    if (static_cast<double>(n) < floor) {
        throw std::invalid_argument("n = " + std::to_string(n) + " is too small for k = " + std::to_string(k) +
                                    " bins: need n >= 10 k (ln k)^3 = " + std::to_string(floor));
    }
}

std::uint64_t max_load(std::uint64_t n, std::uint64_t k, const BinPlacement& place) {
    std::vector<std::uint64_t> loads(k);
    for (std::uint64_t ball = 0; ball < n; ++ball) ++loads.at(place(ball));
    return loads.empty() ? 0 : *std::max_element(loads.begin(), loads.end());
}

PlacementFactory seeded_page_hash() {
    return [](std::uint64_t trialSeed, std::uint64_t k) -> BinPlacement {
        return [family = HashFamily(trialSeed, 1, k, 1)](std::uint64_t ball) { return family.page_index(ball); };
    };
}

MaxLoadResult max_load_trials(std::uint64_t n, std::uint64_t k, double c, std::uint64_t trials, std::uint64_t seed,
                              const PlacementFactory& placement) {
    check_load_assumption(n, k);
    if (c < 1.0) throw std::invalid_argument("C must be >= 1");

    MaxLoadResult result;
    result.threshold = max_load_threshold(n, k, c);
    result.trials = trials;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        const std::uint64_t worst = max_load(n, k, placement(derive_seed(seed, static_cast<std::uint32_t>(trial)), k));
        result.trialMaxLoads.push_back(worst);
        result.worstLoad = std::max(result.worstLoad, worst);
        if (static_cast<double>(worst) > result.threshold) ++result.exceeded;
    }
    result.bound = 1.0 / std::pow(static_cast<double>(k), c);
    result.exceedFraction = trials ? static_cast<double>(result.exceeded) / static_cast<double>(trials) : 0.0;
    result.allowed = result.bound + binomial_slack(result.bound, trials);
    result.passed = result.exceedFraction <= result.allowed;
    return result;
}

void write_trial_csv_header(std::ostream& out) {
    out << "trial,seed,n,k,epsilon,delta,threshold,bound,tailFraction,mean,max\n";
}

void write_trial_csv_row(std::ostream& out, const TrialRecord& r) {
    out << r.trial << ',' << r.seed << ',' << r.n << ',' << r.k << ',' << r.epsilon << ',' << r.delta << ','
        << r.threshold << ',' << r.bound << ',' << r.tailFraction << ',' << r.mean << ',' << r.max << '\n';
}

}  // namespace bcms
