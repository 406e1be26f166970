#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bcms {

/// MurmurHash64A over the 8-byte little-endian encoding of `key`.
std::uint64_t murmur64a(std::uint64_t key, std::uint64_t seed) noexcept;

/// Seed for hash slot `index` of a family rooted at `masterSeed`.
///
/// seed(index) = splitmix64(masterSeed + index * 0x9E3779B97F4A7C15).
/// Slot 0 is reserved for the page selector; row j (0-based) uses slot j + 1.
/// The step constant is odd and splitmix64's finalizer is a bijection, so
/// distinct slots always receive distinct seeds. This scheme is part of the
/// on-disk format: a sketch file is only readable with the same family.
std::uint64_t derive_seed(std::uint64_t masterSeed, std::uint32_t index) noexcept;

inline constexpr std::uint32_t kPageSelectorSlot = 0;

/// Seeded hash family: one page selector plus `depth` row hashes whose
/// localized range is a single page's column span.
class HashFamily {
public:
    HashFamily(std::uint64_t masterSeed, std::uint32_t depth, std::uint64_t pageCount,
               std::uint32_t columnsPerPage);

    std::uint64_t page_index(std::uint64_t key) const noexcept {
        return murmur64a(key, pageSeed_) % pageCount_;
    }

    /// Raw 64-bit hash of `key` for row `row`.
    std::uint64_t row_hash(std::uint64_t key, std::uint32_t row) const noexcept {
        return murmur64a(key, rowSeeds_[row]);
    }

    /// Local column of `key` in each row, relative to the start of its page.
    void column_offsets(std::uint64_t key, std::span<std::uint32_t> out) const noexcept;
    std::vector<std::uint32_t> column_offsets(std::uint64_t key) const;

    std::uint64_t master_seed() const noexcept { return masterSeed_; }
    std::uint32_t depth() const noexcept { return static_cast<std::uint32_t>(rowSeeds_.size()); }
    std::uint64_t page_count() const noexcept { return pageCount_; }
    std::uint32_t columns_per_page() const noexcept { return columnsPerPage_; }
    std::uint64_t page_seed() const noexcept { return pageSeed_; }
    std::uint64_t row_seed(std::uint32_t row) const { return rowSeeds_.at(row); }

private:
    std::uint64_t masterSeed_;
    std::uint64_t pageSeed_;
    std::vector<std::uint64_t> rowSeeds_;
    std::uint64_t pageCount_;
    std::uint32_t columnsPerPage_;
};

}  // namespace bcms
