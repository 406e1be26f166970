#include "bcms/params.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bcms {
namespace {

// ceil() that ignores floating-point noise just above an integer, so that
// e.g. e / (e / 272) yields 272 rather than 273.
std::uint64_t tolerant_ceil(double x) {
    return static_cast<std::uint64_t>(std::ceil(x - 1e-9));
}

std::uint64_t round_up(std::uint64_t value, std::uint64_t multiple) {
    return (value + multiple - 1) / multiple * multiple;
}

void check_cell_bytes(std::uint32_t cellBytes) {
    if (cellBytes != 1 && cellBytes != 2 && cellBytes != 4 && cellBytes != 8) {
        throw std::invalid_argument("cellBytes must be 1, 2, 4 or 8, got " + std::to_string(cellBytes));
    }
}

void check_probability(double value, const char* name) {
    if (!(value > 0.0 && value < 1.0)) {
        throw std::invalid_argument(std::string(name) + " must lie in (0, 1), got " + std::to_string(value));
    }
}

}  // namespace

std::uint64_t SketchParams::max_counter() const noexcept {
    return cellBytes >= 8 ? ~std::uint64_t{0} : (std::uint64_t{1} << (8 * cellBytes)) - 1;
}

std::uint32_t depth_for_delta(double delta) {
    check_probability(delta, "delta");
    auto depth = tolerant_ceil(std::log(1.0 / delta));
    return static_cast<std::uint32_t>(depth < 1 ? 1 : depth);
}

std::uint32_t columns_per_page(std::uint32_t pageBytes, std::uint32_t cellBytes, std::uint32_t depth) {
    check_cell_bytes(cellBytes);
    if (depth == 0) throw std::invalid_argument("depth must be >= 1");
    std::uint32_t columns = pageBytes / (cellBytes * depth);
    if (columns == 0) {
        throw std::invalid_argument("page of " + std::to_string(pageBytes) + " bytes cannot hold one column of " +
                                    std::to_string(depth) + " x " + std::to_string(cellBytes) + "-byte cells");
    }
    return columns;
}

SketchParams derive_params_from_size(std::uint64_t sizeBytes, double delta, std::uint64_t maxOverestimate,
                                     std::uint32_t pageBytes, std::uint32_t cellBytes) {
    check_probability(delta, "delta");
    check_cell_bytes(cellBytes);
    if (pageBytes == 0 || sizeBytes < pageBytes) {
        throw std::invalid_argument("sketch size of " + std::to_string(sizeBytes) +
                                    " bytes is smaller than one page (" + std::to_string(pageBytes) + " bytes)");
    }
    if (maxOverestimate < 1) throw std::invalid_argument("maxOverestimate must be >= 1");

    SketchParams p;
    p.delta = delta;
    p.cellBytes = cellBytes;
    p.pageBytes = pageBytes;
    p.depth = depth_for_delta(delta);
    p.columnsPerPage = columns_per_page(pageBytes, cellBytes, p.depth);

    const std::uint64_t cellCount = sizeBytes / cellBytes;
    p.requestedWidth = (cellCount + p.depth - 1) / p.depth;
    p.width = round_up(p.requestedWidth, p.columnsPerPage);
    p.pageCount = p.width / p.columnsPerPage;
    p.elementBudget = static_cast<std::uint64_t>(
        std::floor(static_cast<double>(p.requestedWidth) * static_cast<double>(maxOverestimate) / std::numbers::e));
    if (p.elementBudget == 0) throw std::invalid_argument("configuration admits no elements");
    p.epsilon = static_cast<double>(maxOverestimate) / static_cast<double>(p.elementBudget);
    return p;
}

SketchParams derive_params_from_error(double epsilon, double delta, std::uint32_t pageBytes, std::uint32_t cellBytes) {
    check_probability(epsilon, "epsilon");
    check_probability(delta, "delta");
    check_cell_bytes(cellBytes);

    SketchParams p;
    p.epsilon = epsilon;
    p.delta = delta;
    p.cellBytes = cellBytes;
    p.pageBytes = pageBytes;
    p.depth = depth_for_delta(delta);
    p.columnsPerPage = columns_per_page(pageBytes, cellBytes, p.depth);
    p.requestedWidth = tolerant_ceil(std::numbers::e / epsilon);
    p.width = round_up(p.requestedWidth, p.columnsPerPage);
    p.pageCount = p.width / p.columnsPerPage;
    return p;
}

SketchParams make_geometry(std::uint32_t depth, std::uint64_t pageCount, std::uint32_t pageBytes,
                           std::uint32_t cellBytes) {
    if (pageCount == 0) throw std::invalid_argument("pageCount must be >= 1");
    SketchParams p;
    p.cellBytes = cellBytes;
    p.pageBytes = pageBytes;
    p.depth = depth;
    p.columnsPerPage = columns_per_page(pageBytes, cellBytes, depth);
    p.pageCount = pageCount;
    p.width = pageCount * p.columnsPerPage;
    p.requestedWidth = p.width;
    p.epsilon = std::numbers::e / static_cast<double>(p.width);
    p.delta = std::exp(-static_cast<double>(depth));
    return p;
}

void validate(const SketchParams& p) {
    check_cell_bytes(p.cellBytes);
    if (p.depth == 0) throw std::invalid_argument("depth must be >= 1");
    if (p.columnsPerPage != columns_per_page(p.pageBytes, p.cellBytes, p.depth)) {
        throw std::invalid_argument("columnsPerPage does not match page geometry");
    }
    if (p.pageCount == 0 || p.width != p.pageCount * p.columnsPerPage) {
        throw std::invalid_argument("width must equal pageCount * columnsPerPage");
    }
}

}  // namespace bcms
