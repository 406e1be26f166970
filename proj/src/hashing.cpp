#include "bcms/hashing.hpp"

#include <stdexcept>

namespace bcms {

std::uint64_t murmur64a(std::uint64_t key, std::uint64_t seed) noexcept {
    constexpr std::uint64_t m = 0xc6a4a7935bd1e995ULL;
    constexpr int r = 47;

    std::uint64_t h = seed ^ (8 * m);
    std::uint64_t k = key;
    k *= m;
    k ^= k >> r;
    k *= m;
    h ^= k;
    h *= m;

    h ^= h >> r;
    h *= m;
    h ^= h >> r;
    return h;
}

std::uint64_t derive_seed(std::uint64_t masterSeed, std::uint32_t index) noexcept {
    std::uint64_t z = masterSeed + static_cast<std::uint64_t>(index) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

HashFamily::HashFamily(std::uint64_t masterSeed, std::uint32_t depth, std::uint64_t pageCount,
                       std::uint32_t columnsPerPage)
    : masterSeed_(masterSeed),
      pageSeed_(derive_seed(masterSeed, kPageSelectorSlot)),
      pageCount_(pageCount),
      columnsPerPage_(columnsPerPage) {
    if (depth == 0 || pageCount == 0 || columnsPerPage == 0) {
        throw std::invalid_argument("HashFamily: depth, pageCount and columnsPerPage must be >= 1");
    }
    rowSeeds_.reserve(depth);
    for (std::uint32_t row = 0; row < depth; ++row) {
        rowSeeds_.push_back(derive_seed(masterSeed, row + 1));
    }
}

void HashFamily::column_offsets(std::uint64_t key, std::span<std::uint32_t> out) const noexcept {
    for (std::uint32_t row = 0; row < depth(); ++row) {
        out[row] = static_cast<std::uint32_t>(row_hash(key, row) % columnsPerPage_);
    }
}

std::vector<std::uint32_t> HashFamily::column_offsets(std::uint64_t key) const {
    std::vector<std::uint32_t> out(depth());
    column_offsets(key, out);
    return out;
}

}  // namespace bcms
