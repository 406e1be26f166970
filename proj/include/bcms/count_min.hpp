#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcms/hashing.hpp"
#include "bcms/params.hpp"

namespace bcms {

/// Raised when an increment would exceed the cell width. Checked before any
/// cell is modified, so the sketch is left unchanged.
class CounterOverflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// How row hashes are mapped to columns.
enum class HashMode : std::uint8_t {
    /// Row j probes column h_j(key) mod width anywhere in the row.
    classical = 0,
    /// h_0 picks a page; every row probes inside that page's column span.
    localized = 1,
};

const char* to_string(HashMode mode) noexcept;

/// depth x width unsigned counters, bounded by the configured cell width.
class CounterMatrix {
public:
    explicit CounterMatrix(const SketchParams& params);

    std::uint64_t at(std::uint32_t row, std::uint64_t column) const { return cells_[index(row, column)]; }
    /// Adds without overflow checking; callers check with `would_overflow` first.
    void add(std::uint32_t row, std::uint64_t column, std::uint64_t count) { cells_[index(row, column)] += count; }
    bool would_overflow(std::uint32_t row, std::uint64_t column, std::uint64_t count) const {
        return at(row, column) > maxCounter_ - count;
    }

    std::span<const std::uint64_t> row(std::uint32_t row) const;
    std::uint64_t row_sum(std::uint32_t row) const;

    std::uint32_t depth() const noexcept { return depth_; }
    std::uint64_t width() const noexcept { return width_; }
    std::uint64_t max_counter() const noexcept { return maxCounter_; }

    std::uint64_t total_inserted() const noexcept { return totalInserted_; }
    void add_total(std::uint64_t count) noexcept { totalInserted_ += count; }

    friend bool operator==(const CounterMatrix&, const CounterMatrix&) = default;

private:
    std::size_t index(std::uint32_t row, std::uint64_t column) const {
        if (row >= depth_ || column >= width_) {
            throw std::out_of_range("cell (" + std::to_string(row) + ", " + std::to_string(column) +
                                    ") outside " + std::to_string(depth_) + " x " + std::to_string(width_));
        }
        return static_cast<std::size_t>(row) * width_ + column;
    }

    std::uint32_t depth_;
    std::uint64_t width_;
    std::uint64_t maxCounter_;
    std::uint64_t totalInserted_ = 0;
    std::vector<std::uint64_t> cells_;
};

/// In-memory count-min sketch. Serves as the classical baseline and, in
/// localized mode, as the reference the buffered sketch must agree with.
class CountMinSketch {
public:
    CountMinSketch(const SketchParams& params, std::uint64_t seed, HashMode mode = HashMode::classical);

    void update(std::uint64_t key, std::uint64_t count = 1);
    std::uint64_t estimate(std::uint64_t key) const;

    /// Global column probed in each row for `key`.
    void columns(std::uint64_t key, std::span<std::uint64_t> out) const;
    std::vector<std::uint64_t> columns(std::uint64_t key) const;

    const SketchParams& params() const noexcept { return params_; }
    const HashFamily& hashes() const noexcept { return family_; }
    const CounterMatrix& matrix() const noexcept { return matrix_; }
    HashMode mode() const noexcept { return mode_; }
    std::uint64_t total_inserted() const noexcept { return matrix_.total_inserted(); }

private:
    SketchParams params_;
    HashFamily family_;
    HashMode mode_;
    CounterMatrix matrix_;
    std::vector<std::uint64_t> scratch_;
};

/// Global column of row `row` for `key` under `mode`.
std::uint64_t probe_column(const HashFamily& family, HashMode mode, std::uint64_t width, std::uint64_t key,
                           std::uint32_t row) noexcept;

}  // namespace bcms
