#include "bcms/count_min.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace bcms {

const char* to_string(HashMode mode) noexcept {
    return mode == HashMode::localized ? "localized" : "classical";
}

CounterMatrix::CounterMatrix(const SketchParams& params)
    : depth_(params.depth),
      width_(params.width),
      maxCounter_(params.max_counter()),
      cells_(static_cast<std::size_t>(params.depth) * params.width, 0) {}

std::span<const std::uint64_t> CounterMatrix::row(std::uint32_t row) const {
    return std::span<const std::uint64_t>(cells_).subspan(index(row, 0), width_);
}

std::uint64_t CounterMatrix::row_sum(std::uint32_t r) const {
    auto cells = row(r);
    return std::accumulate(cells.begin(), cells.end(), std::uint64_t{0});
}

std::uint64_t probe_column(const HashFamily& family, HashMode mode, std::uint64_t width, std::uint64_t key,
                           std::uint32_t row) noexcept {
    if (mode == HashMode::classical) return family.row_hash(key, row) % width;
    const std::uint64_t cpp = family.columns_per_page();
    return family.page_index(key) * cpp + family.row_hash(key, row) % cpp;
}

CountMinSketch::CountMinSketch(const SketchParams& params, std::uint64_t seed, HashMode mode)
    : params_(params),
      family_(seed, params.depth, params.pageCount, params.columnsPerPage),
      mode_(mode),
      matrix_(params),
      scratch_(params.depth) {
    validate(params_);
}

void CountMinSketch::columns(std::uint64_t key, std::span<std::uint64_t> out) const {
    if (mode_ == HashMode::classical) {
        for (std::uint32_t row = 0; row < params_.depth; ++row) out[row] = family_.row_hash(key, row) % params_.width;
        return;
    }
    const std::uint64_t base = family_.page_index(key) * params_.columnsPerPage;
    for (std::uint32_t row = 0; row < params_.depth; ++row) {
        out[row] = base + family_.row_hash(key, row) % params_.columnsPerPage;
    }
}

std::vector<std::uint64_t> CountMinSketch::columns(std::uint64_t key) const {
    std::vector<std::uint64_t> out(params_.depth);
    columns(key, out);
    return out;
}

void CountMinSketch::update(std::uint64_t key, std::uint64_t count) {
    if (count == 0) throw std::invalid_argument("update count must be >= 1");
    columns(key, scratch_);
    for (std::uint32_t row = 0; row < params_.depth; ++row) {
        if (matrix_.would_overflow(row, scratch_[row], count)) {
            throw CounterOverflow("counter overflow at row " + std::to_string(row) + ", column " +
                                  std::to_string(scratch_[row]));
        }
    }
    for (std::uint32_t row = 0; row < params_.depth; ++row) matrix_.add(row, scratch_[row], count);
    matrix_.add_total(count);
}

std::uint64_t CountMinSketch::estimate(std::uint64_t key) const {
    // No shared scratch here: concurrent estimates are allowed.
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (std::uint32_t row = 0; row < params_.depth; ++row) {
        best = std::min(best, matrix_.at(row, probe_column(family_, mode_, params_.width, key, row)));
    }
    return best;
}

}  // namespace bcms
