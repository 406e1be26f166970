#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <set>

#include "bcms/page_store.hpp"
#include "bcms/paged_sketch.hpp"
#include "temp_dir.hpp"

using namespace bcms;

namespace {

PageBuffer pattern(std::uint32_t bytes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PageBuffer page(bytes);
    for (auto& b : page) b = static_cast<std::byte>(rng() & 0xff);
    return page;
}

SketchHeader sample_header() {
    return make_header(make_geometry(3, 5, 256, 8), 0xabcdef, HashMode::localized);
}

void corrupt(const std::filesystem::path& path, std::streamoff offset, char value) {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(offset);
    f.put(value);
}

}  // namespace

TEST_CASE("page layout addressing") {
    PageLayout layout(4096, 8, 5, 2);
    CHECK(layout.columns_per_page() == 102);
    CHECK(layout.pad_bytes_per_page() == 16);
    CHECK(layout.locate(0, 0) == CellAddress{0, 0});
    CHECK(layout.locate(2, 1) == CellAddress{0, 56});  // (1*5 + 2) * 8
    CHECK(layout.locate(0, 102) == CellAddress{1, 0});
    CHECK(layout.locate(4, 203) == CellAddress{1, (101 * 5 + 4) * 8});
    CHECK_THROWS_AS(layout.locate(5, 0), std::out_of_range);
    CHECK_THROWS_AS(layout.locate(0, 204), std::out_of_range);
}

TEST_CASE("page layout is a bijection onto in-page offsets") {
    for (auto [pageBytes, cellBytes, depth] : {std::tuple{4096u, 8u, 5u}, std::tuple{100u, 4u, 3u}, std::tuple{64u, 1u, 7u}}) {
        PageLayout layout(pageBytes, cellBytes, depth, 2);
        CHECK(layout.columns_per_page() * depth * cellBytes + layout.pad_bytes_per_page() == pageBytes);
        CHECK(layout.pad_bytes_per_page() < depth * cellBytes);
        std::set<std::pair<std::uint64_t, std::uint32_t>> seen;
        for (std::uint32_t row = 0; row < depth; ++row) {
            for (std::uint64_t col = 0; col < layout.width(); ++col) {
                const auto a = layout.locate(row, col);
                CHECK(a.pageId < 2);
                CHECK(a.byteOffset + cellBytes <= pageBytes - layout.pad_bytes_per_page());
                seen.emplace(a.pageId, a.byteOffset);
            }
        }
        CHECK(seen.size() == depth * layout.width());
        // Column-first: a column's cells are one contiguous run.
        const auto first = layout.locate(0, 7);
        const auto last = layout.locate(depth - 1, 7);
        CHECK(last.pageId == first.pageId);
        CHECK(last.byteOffset - first.byteOffset == (depth - 1) * cellBytes);
    }
}

TEST_CASE("cell encoding is little-endian at every width") {
    PageBuffer page(16);
    store_cell(page, 0, 2, 0x1234);
    CHECK(page[0] == std::byte{0x34});
    CHECK(page[1] == std::byte{0x12});
    for (std::uint32_t w : {1u, 2u, 4u, 8u}) {
        const std::uint64_t max = w == 8 ? ~0ULL : (1ULL << (8 * w)) - 1;
        store_cell(page, 8, w, max);
        CHECK(load_cell(page, 8, w) == max);
    }
}

TEST_CASE("memory store") {
    MemoryPageStore store(128, 4);
    SUBCASE("zero-initialized and counted") {
        auto page = store.read_page(0);
        CHECK(page == PageBuffer(128));
        CHECK(store.stats() == IoStats{1, 0});
    }
    SUBCASE("round trip and page independence") {
        const auto p = pattern(128, 1);
        store.write_page(3, p);
        CHECK(store.read_page(3) == p);
        CHECK(store.read_page(2) == PageBuffer(128));
        store.write_page(1, pattern(128, 2));
        CHECK(store.read_page(3) == p);
        CHECK(store.stats() == IoStats{3, 2});
        store.reset_stats();
        CHECK(store.stats() == IoStats{});
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(store.read_page(4), std::out_of_range);
        CHECK_THROWS_AS(store.write_page(4, PageBuffer(128)), std::out_of_range);
        CHECK_THROWS_AS(store.write_page(0, PageBuffer(127)), std::invalid_argument);
        CHECK(store.stats() == IoStats{});
    }
}

TEST_CASE("randomized write/read round trips on both backends") {
    TempDir dir;
    const SketchHeader header = sample_header();
    std::vector<std::unique_ptr<PageStore>> stores;
    stores.push_back(std::make_unique<MemoryPageStore>(header.pageBytes, header.pageCount));
    stores.push_back(FilePageStore::create(dir.file("rt.sketch"), header));
    for (auto& store : stores) {
        std::mt19937_64 rng(3);
        std::map<std::uint64_t, PageBuffer> model;
        for (int i = 0; i < 1000; ++i) {
            const auto id = rng() % store->page_count();
            auto page = pattern(store->page_bytes(), rng());
            store->write_page(id, page);
            model[id] = page;
            const auto probe = rng() % store->page_count();
            const auto expected = model.count(probe) ? model[probe] : PageBuffer(store->page_bytes());
            CHECK(store->read_page(probe) == expected);
        }
        CHECK(store->stats() == IoStats{1000, 1000});
    }
}

TEST_CASE("file store persists pages and header") {
    TempDir dir;
    const auto path = dir.file("a.sketch");
    SketchHeader header = sample_header();
    const auto p = pattern(header.pageBytes, 9);
    {
        auto store = FilePageStore::create(path, header);
        CHECK(store->read_page(4) == PageBuffer(header.pageBytes));
        store->write_page(2, p);
        header.totalInserted = 31337;
        store->write_header(header);
    }
    CHECK(std::filesystem::file_size(path) == (header.pageCount + 1) * header.pageBytes);
    auto store = FilePageStore::open(path);
    CHECK(store->header() == header);
    CHECK(store->read_page(2) == p);
    CHECK(store->read_page(1) == PageBuffer(header.pageBytes));
    CHECK(store->stats() == IoStats{2, 0});
}

TEST_CASE("header encoding") {
    const SketchHeader header = sample_header();
    const auto bytes = header.encode();
    REQUIRE(bytes.size() == header.pageBytes);
    CHECK(bytes[0] == std::byte{'B'});
    CHECK(bytes[3] == std::byte{'S'});
    CHECK(load_cell(bytes, 4, 4) == SketchHeader::kVersion);
    CHECK(load_cell(bytes, 8, 4) == 3);
    CHECK(load_cell(bytes, 12, 8) == header.width);
    CHECK(load_cell(bytes, 20, 4) == 8);
    CHECK(load_cell(bytes, 24, 4) == 256);
    CHECK(load_cell(bytes, 28, 8) == 5);
    CHECK(load_cell(bytes, 36, 8) == 0xabcdef);
    CHECK(load_cell(bytes, 44, 1) == 1);
    for (std::size_t i = SketchHeader::kEncodedBytes; i < bytes.size(); ++i) REQUIRE(bytes[i] == std::byte{0});
    CHECK(SketchHeader::decode(bytes) == header);
}

TEST_CASE("open rejects damaged files") {
    TempDir dir;
    const auto path = dir.file("bad.sketch");
    const SketchHeader header = sample_header();
    auto recreate = [&] { FilePageStore::create(path, header); };

    SUBCASE("bad magic") {
        recreate();
        corrupt(path, 0, 'X');
        CHECK_THROWS_AS(FilePageStore::open(path), FormatError);
    }
    SUBCASE("bad version") {
        recreate();
        corrupt(path, 4, 9);
        CHECK_THROWS_AS(FilePageStore::open(path), FormatError);
    }
    SUBCASE("geometry inconsistent with length") {
        recreate();
        std::filesystem::resize_file(path, (header.pageCount + 2) * header.pageBytes);
        CHECK_THROWS_AS(FilePageStore::open(path), FormatError);
    }
    SUBCASE("width inconsistent with page count") {
        recreate();
        corrupt(path, 12, 1);
        CHECK_THROWS_AS(FilePageStore::open(path), FormatError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(FilePageStore::open(dir.file("none")), StorageError);
    }
}
