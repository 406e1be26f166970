#pragma once

#include <cstdint>

namespace bcms {

inline constexpr std::uint32_t kDefaultPageBytes = 4096;
inline constexpr std::uint32_t kDefaultCellBytes = 8;

/// Dimensions of a count-min sketch and of its paged on-storage image.
///
/// `width` is always a whole number of pages (`pageCount * columnsPerPage`).
/// `requestedWidth` keeps the width asked for before page padding; the element
/// budget is computed from it so that size-derived configurations match the
/// published sizing tables.
struct SketchParams {
    double epsilon = 0.0;
    double delta = 0.0;
    std::uint32_t depth = 0;
    std::uint64_t width = 0;
    std::uint64_t requestedWidth = 0;
    std::uint32_t cellBytes = kDefaultCellBytes;
    std::uint32_t pageBytes = kDefaultPageBytes;
    std::uint64_t pageCount = 0;
    std::uint32_t columnsPerPage = 0;
    std::uint64_t elementBudget = 0;
    std::uint64_t bufferBytes = 0;

    /// Bytes occupied by the data pages.
    std::uint64_t storage_bytes() const noexcept { return pageCount * pageBytes; }
    /// Largest value a cell can hold.
    std::uint64_t max_counter() const noexcept;
};

/// ceil(ln(1/delta)), at least 1.
std::uint32_t depth_for_delta(double delta);

/// floor(pageBytes / (cellBytes * depth)).
std::uint32_t columns_per_page(std::uint32_t pageBytes, std::uint32_t cellBytes, std::uint32_t depth);

/// Sizes a sketch to fill `sizeBytes` of counters so that the expected
/// overestimate stays at `maxOverestimate` for `elementBudget` unit inserts.
SketchParams derive_params_from_size(std::uint64_t sizeBytes, double delta, std::uint64_t maxOverestimate,
                                     std::uint32_t pageBytes = kDefaultPageBytes,
                                     std::uint32_t cellBytes = kDefaultCellBytes);

/// Classical sizing: depth = ceil(ln 1/delta), width = ceil(e/epsilon) padded to whole pages.
SketchParams derive_params_from_error(double epsilon, double delta, std::uint32_t pageBytes = kDefaultPageBytes,
                                      std::uint32_t cellBytes = kDefaultCellBytes);

/// Explicit geometry, mostly for tests and small experiments. epsilon and
/// delta are set to the values the geometry implies (e/width, e^-depth).
SketchParams make_geometry(std::uint32_t depth, std::uint64_t pageCount, std::uint32_t pageBytes,
                           std::uint32_t cellBytes = kDefaultCellBytes);

/// Throws std::invalid_argument if the geometry fields are inconsistent.
void validate(const SketchParams& params);

}  // namespace bcms
