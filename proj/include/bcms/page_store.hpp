#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcms/params.hpp"

namespace bcms {

using PageBuffer = std::vector<std::byte>;

/// Page transfer counters. Only data pages are counted; header I/O is not.
struct IoStats {
    std::uint64_t pageReads = 0;
    std::uint64_t pageWrites = 0;

    std::uint64_t total() const noexcept { return pageReads + pageWrites; }
    friend bool operator==(const IoStats&, const IoStats&) = default;
};

struct CellAddress {
    std::uint64_t pageId;
    std::uint32_t byteOffset;
    friend bool operator==(const CellAddress&, const CellAddress&) = default;
};

/// Column-first page geometry: a page holds `columnsPerPage` whole columns,
/// each column's `depth` cells stored contiguously, followed by tail padding.
class PageLayout {
public:
    PageLayout(std::uint32_t pageBytes, std::uint32_t cellBytes, std::uint32_t depth, std::uint64_t pageCount);
    explicit PageLayout(const SketchParams& params);

    CellAddress locate(std::uint32_t row, std::uint64_t globalColumn) const;

    /// Byte offset inside a page of (row, local column); no bounds checking.
    std::uint32_t offset_in_page(std::uint32_t row, std::uint32_t localColumn) const noexcept {
        return (localColumn * depth_ + row) * cellBytes_;
    }

    std::uint32_t page_bytes() const noexcept { return pageBytes_; }
    std::uint32_t cell_bytes() const noexcept { return cellBytes_; }
    std::uint32_t depth() const noexcept { return depth_; }
    std::uint32_t columns_per_page() const noexcept { return columnsPerPage_; }
    std::uint64_t page_count() const noexcept { return pageCount_; }
    std::uint64_t width() const noexcept { return pageCount_ * columnsPerPage_; }
    std::uint32_t pad_bytes_per_page() const noexcept { return padBytes_; }

private:
    std::uint32_t pageBytes_;
    std::uint32_t cellBytes_;
    std::uint32_t depth_;
    std::uint32_t columnsPerPage_;
    std::uint64_t pageCount_;
    std::uint32_t padBytes_;
};

/// Little-endian unsigned cell of `cellBytes` bytes.
std::uint64_t load_cell(std::span<const std::byte> page, std::uint32_t offset, std::uint32_t cellBytes) noexcept;
void store_cell(std::span<std::byte> page, std::uint32_t offset, std::uint32_t cellBytes, std::uint64_t value) noexcept;

/// Backend I/O failure, tagged with the page involved (or -1 for header I/O).
class StorageError : public std::runtime_error {
public:
    StorageError(const std::string& what, std::int64_t pageId)
        : std::runtime_error(what), pageId_(pageId) {}
    std::int64_t page_id() const noexcept { return pageId_; }

private:
    std::int64_t pageId_;
};

/// Fixed-size page storage with exact I/O accounting: every successful page
/// read or write bumps exactly one counter by one. No caching.
class PageStore {
public:
    PageStore(std::uint32_t pageBytes, std::uint64_t pageCount) : pageBytes_(pageBytes), pageCount_(pageCount) {}
    virtual ~PageStore() = default;

    PageStore(const PageStore&) = delete;
    PageStore& operator=(const PageStore&) = delete;

    PageBuffer read_page(std::uint64_t pageId);
    void read_page(std::uint64_t pageId, std::span<std::byte> out);
    void write_page(std::uint64_t pageId, std::span<const std::byte> page);

    std::uint32_t page_bytes() const noexcept { return pageBytes_; }
    std::uint64_t page_count() const noexcept { return pageCount_; }

    const IoStats& stats() const noexcept { return stats_; }
    void reset_stats() noexcept { stats_ = {}; }

    virtual void sync() {}

protected:
    virtual void do_read(std::uint64_t pageId, std::span<std::byte> out) = 0;
    virtual void do_write(std::uint64_t pageId, std::span<const std::byte> page) = 0;

private:
    void check_page(std::uint64_t pageId) const;

    std::uint32_t pageBytes_;
    std::uint64_t pageCount_;
    IoStats stats_;
};

/// Volatile backend: one contiguous zero-initialized array.
class MemoryPageStore final : public PageStore {
public:
    MemoryPageStore(std::uint32_t pageBytes, std::uint64_t pageCount);

protected:
    void do_read(std::uint64_t pageId, std::span<std::byte> out) override;
    void do_write(std::uint64_t pageId, std::span<const std::byte> page) override;

private:
    std::vector<std::byte> bytes_;
};

/// Metadata stored in the first page of a sketch file.
///
/// Layout (little-endian, packed from byte 0, rest of the page zero):
///   magic "BCMS" [4] | version u32 | depth u32 | width u64 | cellBytes u32 |
///   pageBytes u32 | pageCount u64 | masterSeed u64 | localized u8 | totalInserted u64
struct SketchHeader {
    static constexpr std::uint32_t kVersion = 1;
    static constexpr std::size_t kEncodedBytes = 53;

    std::uint32_t depth = 0;
    std::uint64_t width = 0;
    std::uint32_t cellBytes = 0;
    std::uint32_t pageBytes = 0;
    std::uint64_t pageCount = 0;
    std::uint64_t masterSeed = 0;
    bool localized = false;
    std::uint64_t totalInserted = 0;

    /// Writes a full header page (`pageBytes` long).
    PageBuffer encode() const;
    /// Parses and validates magic, version and geometry.
    static SketchHeader decode(std::span<const std::byte> bytes);

    /// Geometry as SketchParams (epsilon/delta implied by the geometry).
    SketchParams params() const;

    friend bool operator==(const SketchHeader&, const SketchHeader&) = default;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File backend: header page followed by `pageCount` data pages, accessed
/// with page-aligned positional reads and writes.
class FilePageStore final : public PageStore {
public:
    /// Creates (truncating) a zero-filled sketch file.
    static std::unique_ptr<FilePageStore> create(const std::filesystem::path& path, const SketchHeader& header);
    /// Opens an existing file; rejects bad magic/version or a length that
    /// disagrees with the header geometry.
    static std::unique_ptr<FilePageStore> open(const std::filesystem::path& path);

    ~FilePageStore() override;

    const SketchHeader& header() const noexcept { return header_; }
    void write_header(const SketchHeader& header);
    const std::filesystem::path& path() const noexcept { return path_; }

    void sync() override;

protected:
    void do_read(std::uint64_t pageId, std::span<std::byte> out) override;
    void do_write(std::uint64_t pageId, std::span<const std::byte> page) override;

private:
    FilePageStore(int fd, std::filesystem::path path, const SketchHeader& header);

    int fd_;
    std::filesystem::path path_;
    SketchHeader header_;
};

}  // namespace bcms
