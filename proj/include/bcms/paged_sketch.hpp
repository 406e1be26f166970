#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "bcms/count_min.hpp"
#include "bcms/page_store.hpp"

namespace bcms {

/// Sketch header describing `params` hashed with `seed` in `mode`.
SketchHeader make_header(const SketchParams& params, std::uint64_t seed, HashMode mode);

/// Unbuffered count-min sketch kept directly on a PageStore.
///
/// Every update reads and writes each distinct page its probes touch; every
/// estimate reads each distinct page once. In classical mode that is up to
/// `depth` pages per operation, in localized mode exactly one.
class PagedSketch {
public:
    PagedSketch(const SketchParams& params, std::uint64_t seed, HashMode mode, std::unique_ptr<PageStore> store);
    /// Reopens a file written by `close()`.
    static PagedSketch open(const std::filesystem::path& path);

    PagedSketch(PagedSketch&&) noexcept = default;
    PagedSketch& operator=(PagedSketch&&) = delete;
    ~PagedSketch();

    void update(std::uint64_t key, std::uint64_t count = 1);
    std::uint64_t estimate(std::uint64_t key);

    /// Persists totalInserted (file backend) and syncs.
    void close();

    const SketchParams& params() const noexcept { return params_; }
    const HashFamily& hashes() const noexcept { return family_; }
    HashMode mode() const noexcept { return mode_; }
    PageStore& store() noexcept { return *store_; }
    const IoStats& io() const noexcept { return store_->stats(); }
    std::uint64_t total_inserted() const noexcept { return totalInserted_; }

private:
    struct Probe {
        std::uint64_t pageId;
        std::uint32_t row;
        std::uint32_t offset;
    };
    void probe(std::uint64_t key);
    void ensure_buffers(std::size_t pages);

    SketchParams params_;
    HashFamily family_;
    HashMode mode_;
    PageLayout layout_;
    std::unique_ptr<PageStore> store_;
    std::uint64_t totalInserted_ = 0;

    // Probes sorted by page; pageStarts_ indexes the first probe of each page.
    std::vector<Probe> probes_;
    std::vector<std::size_t> pageStarts_;
    std::vector<PageBuffer> pages_;
};

}  // namespace bcms
