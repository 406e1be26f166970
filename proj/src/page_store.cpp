#include "bcms/page_store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

namespace bcms {
namespace {

constexpr std::byte kMagic[4] = {std::byte{'B'}, std::byte{'C'}, std::byte{'M'}, std::byte{'S'}};

void put_le(std::span<std::byte> out, std::size_t offset, std::uint64_t value, std::size_t bytes) {
    for (std::size_t i = 0; i < bytes; ++i) out[offset + i] = static_cast<std::byte>((value >> (8 * i)) & 0xff);
}

std::uint64_t get_le(std::span<const std::byte> in, std::size_t offset, std::size_t bytes) {
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < bytes; ++i) value |= std::to_integer<std::uint64_t>(in[offset + i]) << (8 * i);
    return value;
}

std::string errno_text() { return std::strerror(errno); }

void pread_exact(int fd, std::span<std::byte> out, off_t offset, std::int64_t pageId) {
    std::size_t done = 0;
    while (done < out.size()) {
        ssize_t n = ::pread(fd, out.data() + done, out.size() - done, offset + static_cast<off_t>(done));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw StorageError("read failed for page " + std::to_string(pageId) + ": " + errno_text(), pageId);
        }
        if (n == 0) throw StorageError("short read for page " + std::to_string(pageId), pageId);
        done += static_cast<std::size_t>(n);
    }
}

void pwrite_exact(int fd, std::span<const std::byte> in, off_t offset, std::int64_t pageId) {
    std::size_t done = 0;
    while (done < in.size()) {
        ssize_t n = ::pwrite(fd, in.data() + done, in.size() - done, offset + static_cast<off_t>(done));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw StorageError("write failed for page " + std::to_string(pageId) + ": " + errno_text(), pageId);
        }
        done += static_cast<std::size_t>(n);
    }
}

}  // namespace

// ---------------------------------------------------------------- layout

PageLayout::PageLayout(std::uint32_t pageBytes, std::uint32_t cellBytes, std::uint32_t depth, std::uint64_t pageCount)
    : pageBytes_(pageBytes),
      cellBytes_(cellBytes),
      depth_(depth),
      columnsPerPage_(bcms::columns_per_page(pageBytes, cellBytes, depth)),
      pageCount_(pageCount),
      padBytes_(pageBytes - columnsPerPage_ * depth * cellBytes) {
    if (pageCount == 0) throw std::invalid_argument("pageCount must be >= 1");
}

PageLayout::PageLayout(const SketchParams& params)
    : PageLayout(params.pageBytes, params.cellBytes, params.depth, params.pageCount) {}

CellAddress PageLayout::locate(std::uint32_t row, std::uint64_t globalColumn) const {
    if (row >= depth_ || globalColumn >= width()) {
        throw std::out_of_range("cell (" + std::to_string(row) + ", " + std::to_string(globalColumn) +
                                ") outside layout of depth " + std::to_string(depth_) + " and width " +
                                std::to_string(width()));
    }
    const auto local = static_cast<std::uint32_t>(globalColumn % columnsPerPage_);
    return {globalColumn / columnsPerPage_, offset_in_page(row, local)};
}

std::uint64_t load_cell(std::span<const std::byte> page, std::uint32_t offset, std::uint32_t cellBytes) noexcept {
    return get_le(page, offset, cellBytes);
}

void store_cell(std::span<std::byte> page, std::uint32_t offset, std::uint32_t cellBytes, std::uint64_t value) noexcept {
    put_le(page, offset, value, cellBytes);
}

// ---------------------------------------------------------------- PageStore

void PageStore::check_page(std::uint64_t pageId) const {
    if (pageId >= pageCount_) {
        throw std::out_of_range("page " + std::to_string(pageId) + " out of range (pageCount " +
                                std::to_string(pageCount_) + ")");
    }
}

PageBuffer PageStore::read_page(std::uint64_t pageId) {
    PageBuffer page(pageBytes_);
    read_page(pageId, page);
    return page;
}

void PageStore::read_page(std::uint64_t pageId, std::span<std::byte> out) {
    check_page(pageId);
    if (out.size() != pageBytes_) throw std::invalid_argument("read buffer is not one page long");
    do_read(pageId, out);
    ++stats_.pageReads;
}

void PageStore::write_page(std::uint64_t pageId, std::span<const std::byte> page) {
    check_page(pageId);
    if (page.size() != pageBytes_) {
        throw std::invalid_argument("page buffer of " + std::to_string(page.size()) + " bytes, expected " +
                                    std::to_string(pageBytes_));
    }
    do_write(pageId, page);
    ++stats_.pageWrites;
}

MemoryPageStore::MemoryPageStore(std::uint32_t pageBytes, std::uint64_t pageCount)
    : PageStore(pageBytes, pageCount), bytes_(static_cast<std::size_t>(pageBytes) * pageCount) {}

void MemoryPageStore::do_read(std::uint64_t pageId, std::span<std::byte> out) {
    std::memcpy(out.data(), bytes_.data() + pageId * page_bytes(), page_bytes());
}

void MemoryPageStore::do_write(std::uint64_t pageId, std::span<const std::byte> page) {
    std::memcpy(bytes_.data() + pageId * page_bytes(), page.data(), page_bytes());
}

// ---------------------------------------------------------------- header

PageBuffer SketchHeader::encode() const {
    if (pageBytes < kEncodedBytes) throw std::invalid_argument("page too small to hold the sketch header");
    PageBuffer out(pageBytes);
    std::copy(std::begin(kMagic), std::end(kMagic), out.begin());
    put_le(out, 4, kVersion, 4);
    put_le(out, 8, depth, 4);
    put_le(out, 12, width, 8);
    put_le(out, 20, cellBytes, 4);
    put_le(out, 24, pageBytes, 4);
    put_le(out, 28, pageCount, 8);
    put_le(out, 36, masterSeed, 8);
    put_le(out, 44, localized ? 1 : 0, 1);
    put_le(out, 45, totalInserted, 8);
    return out;
}

SketchHeader SketchHeader::decode(std::span<const std::byte> bytes) {
    if (bytes.size() < kEncodedBytes) throw FormatError("truncated sketch header");
    if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) throw FormatError("bad magic");
    if (auto version = get_le(bytes, 4, 4); version != kVersion) {
        throw FormatError("unsupported format version " + std::to_string(version));
    }
    SketchHeader h;
    h.depth = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
    h.width = get_le(bytes, 12, 8);
    h.cellBytes = static_cast<std::uint32_t>(get_le(bytes, 20, 4));
    h.pageBytes = static_cast<std::uint32_t>(get_le(bytes, 24, 4));
    h.pageCount = get_le(bytes, 28, 8);
    h.masterSeed = get_le(bytes, 36, 8);
    const auto flag = get_le(bytes, 44, 1);
    if (flag > 1) throw FormatError("bad localized flag");
    h.localized = flag == 1;
    h.totalInserted = get_le(bytes, 45, 8);
    if (h.pageBytes < kEncodedBytes) throw FormatError("page size too small for header");
    try {
        validate(h.params());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("inconsistent geometry: ") + e.what());
    }
    return h;
}

SketchParams SketchHeader::params() const {
    SketchParams p = make_geometry(depth, pageCount, pageBytes, cellBytes);
    if (p.width != width) throw std::invalid_argument("width does not equal pageCount * columnsPerPage");
    return p;
}

// ---------------------------------------------------------------- file backend

FilePageStore::FilePageStore(int fd, std::filesystem::path path, const SketchHeader& header)
    : PageStore(header.pageBytes, header.pageCount), fd_(fd), path_(std::move(path)), header_(header) {}

FilePageStore::~FilePageStore() {
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<FilePageStore> FilePageStore::create(const std::filesystem::path& path, const SketchHeader& header) {
    validate(header.params());
    const PageBuffer encoded = header.encode();
    int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw StorageError("cannot create " + path.string() + ": " + errno_text(), -1);
    std::unique_ptr<FilePageStore> store(new FilePageStore(fd, path, header));
    const auto length = static_cast<off_t>((header.pageCount + 1) * header.pageBytes);
    if (::ftruncate(fd, length) != 0) throw StorageError("cannot size " + path.string() + ": " + errno_text(), -1);
    pwrite_exact(fd, encoded, 0, -1);
    return store;
}

std::unique_ptr<FilePageStore> FilePageStore::open(const std::filesystem::path& path) {
    int fd = ::open(path.c_str(), O_RDWR | O_CLOEXEC);
    if (fd < 0) throw StorageError("cannot open " + path.string() + ": " + errno_text(), -1);
    struct stat st {};
    if (::fstat(fd, &st) != 0) {
        ::close(fd);
        throw StorageError("cannot stat " + path.string() + ": " + errno_text(), -1);
    }
    SketchHeader header;
    try {
        std::vector<std::byte> prefix(SketchHeader::kEncodedBytes);
        if (static_cast<std::size_t>(st.st_size) < prefix.size()) throw FormatError("file shorter than header");
        pread_exact(fd, prefix, 0, -1);
        header = SketchHeader::decode(prefix);
        const auto expected = (header.pageCount + 1) * header.pageBytes;
        if (static_cast<std::uint64_t>(st.st_size) != expected) {
            throw FormatError("file length " + std::to_string(st.st_size) + " does not match header geometry (" +
                              std::to_string(expected) + " bytes)");
        }
    } catch (...) {
        ::close(fd);
        throw;
    }
    return std::unique_ptr<FilePageStore>(new FilePageStore(fd, path, header));
}

void FilePageStore::write_header(const SketchHeader& header) {
    if (header.pageBytes != header_.pageBytes || header.pageCount != header_.pageCount ||
        header.depth != header_.depth || header.cellBytes != header_.cellBytes) {
        throw std::invalid_argument("header geometry cannot change after creation");
    }
    pwrite_exact(fd_, header.encode(), 0, -1);
    header_ = header;
}

void FilePageStore::sync() {
    if (::fsync(fd_) != 0) throw StorageError("fsync failed for " + path_.string() + ": " + errno_text(), -1);
}

void FilePageStore::do_read(std::uint64_t pageId, std::span<std::byte> out) {
    pread_exact(fd_, out, static_cast<off_t>((pageId + 1) * page_bytes()), static_cast<std::int64_t>(pageId));
}

void FilePageStore::do_write(std::uint64_t pageId, std::span<const std::byte> page) {
    pwrite_exact(fd_, page, static_cast<off_t>((pageId + 1) * page_bytes()), static_cast<std::int64_t>(pageId));
}

}  // namespace bcms
