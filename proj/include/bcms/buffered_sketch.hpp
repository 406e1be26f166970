#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "bcms/count_min.hpp"
#include "bcms/page_store.hpp"

namespace bcms {

/// Counters returned by BufferedSketch::io_report().
struct IoReport {
    std::uint64_t pageReads = 0;
    std::uint64_t pageWrites = 0;
    /// Buffered entries applied to pages so far.
    std::uint64_t updatesApplied = 0;
    /// Sub-buffer drains (capacity, estimate or flush_all triggered).
    std::uint64_t flushes = 0;
    /// k*w*r/M with w = cellBytes and M = bufferBytes, both in bytes.
    double predictedAmortized = 0.0;
    /// 2*entryBytes*k/M: one page read plus one write per full sub-buffer.
    double flushCostPerUpdate = 0.0;
};

/// Count-min sketch on paged storage with hash localization and per-page
/// in-memory update buffers.
///
/// Every key's probes fall in the single page chosen by h_0. Updates append
/// the key's local column offsets to that page's sub-buffer; a full sub-buffer
/// is applied with one page read and one page write. An estimate reads the
/// key's page once, folds in any pending entries (writing the page back only
/// if it did), and takes the row minimum.
///
/// Entry footprint is `depth` 16-bit offsets plus a 32-bit count, and each of
/// the k sub-buffers holds floor(bufferBytes / k / entryBytes) entries.
class BufferedSketch {
public:
    BufferedSketch(const SketchParams& params, std::uint64_t seed, std::unique_ptr<PageStore> store);
    /// Reopens a sketch file with a fresh buffer of `bufferBytes`.
    static BufferedSketch open(const std::filesystem::path& path, std::uint64_t bufferBytes);

    BufferedSketch(BufferedSketch&&) noexcept = default;
    BufferedSketch& operator=(BufferedSketch&&) = delete;
    /// Calls close(); errors are swallowed, call close() explicitly to see them.
    ~BufferedSketch();

    void update(std::uint64_t key, std::uint64_t count = 1);
    std::uint64_t estimate(std::uint64_t key);

    /// Drains every non-empty sub-buffer in ascending page order.
    void flush_all();
    /// flush_all(), then persists totalInserted to a file header and syncs.
    void close();

    IoReport io_report() const;
    void reset_io() noexcept { store_->reset_stats(); updatesApplied_ = 0; flushes_ = 0; }

    /// Drains all buffers and reads every page into a matrix (costs I/O).
    CounterMatrix snapshot();

    std::uint64_t capacity_entries() const noexcept { return capacity_; }
    std::uint32_t entry_bytes() const noexcept { return entryBytes_; }
    std::uint64_t pending_entries(std::uint64_t pageId) const { return buffers_.at(pageId).counts.size(); }
    std::uint64_t pending_total() const noexcept { return pendingTotal_; }

    const SketchParams& params() const noexcept { return params_; }
    const HashFamily& hashes() const noexcept { return family_; }
    const PageLayout& layout() const noexcept { return layout_; }
    PageStore& store() noexcept { return *store_; }
    std::uint64_t total_inserted() const noexcept { return totalInserted_; }

private:
    struct SubBuffer {
        std::vector<std::uint16_t> offsets;  // depth per entry
        std::vector<std::uint32_t> counts;
        void clear() noexcept { offsets.clear(); counts.clear(); }
    };

    void apply(SubBuffer& buffer, std::span<std::byte> page) const;
    void drain(std::uint64_t pageId);

    SketchParams params_;
    HashFamily family_;
    PageLayout layout_;
    std::unique_ptr<PageStore> store_;
    std::uint32_t entryBytes_;
    std::uint64_t capacity_;
    std::vector<SubBuffer> buffers_;
    PageBuffer page_;
    std::vector<std::uint32_t> offsets_;
    std::uint64_t totalInserted_ = 0;
    std::uint64_t pendingTotal_ = 0;
    std::uint64_t updatesApplied_ = 0;
    std::uint64_t flushes_ = 0;
};

}  // namespace bcms
