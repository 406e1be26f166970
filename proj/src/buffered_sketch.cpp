#include "bcms/buffered_sketch.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "bcms/paged_sketch.hpp"

namespace bcms {
namespace {

constexpr std::uint32_t kOffsetBytes = sizeof(std::uint16_t);
constexpr std::uint32_t kCountBytes = sizeof(std::uint32_t);

}  // namespace

BufferedSketch::BufferedSketch(const SketchParams& params, std::uint64_t seed, std::unique_ptr<PageStore> store)
    : params_(params),
      family_(seed, params.depth, params.pageCount, params.columnsPerPage),
      layout_(params),
      store_(std::move(store)),
      entryBytes_(params.depth * kOffsetBytes + kCountBytes),
      capacity_(params.bufferBytes / params.pageCount / entryBytes_),
      buffers_(params.pageCount),
      page_(params.pageBytes),
      offsets_(params.depth) {
    validate(params_);
    if (!store_ || store_->page_bytes() != params.pageBytes || store_->page_count() != params.pageCount) {
        throw std::invalid_argument("page store does not match sketch geometry");
    }
    if (params.columnsPerPage > std::numeric_limits<std::uint16_t>::max() + 1u) {
        throw std::invalid_argument("columnsPerPage exceeds the 16-bit buffer entry offset range");
    }
    if (capacity_ == 0) {
        throw std::invalid_argument("buffer of " + std::to_string(params.bufferBytes) + " bytes cannot hold one " +
                                    std::to_string(entryBytes_) + "-byte entry for each of " +
                                    std::to_string(params.pageCount) + " pages");
    }
}

BufferedSketch BufferedSketch::open(const std::filesystem::path& path, std::uint64_t bufferBytes) {
    auto file = FilePageStore::open(path);
    const SketchHeader header = file->header();
    if (!header.localized) throw FormatError(path.string() + " does not hold a hash-localized sketch");
    SketchParams params = header.params();
    params.bufferBytes = bufferBytes;
    BufferedSketch sketch(params, header.masterSeed, std::move(file));
    sketch.totalInserted_ = header.totalInserted;
    return sketch;
}

BufferedSketch::~BufferedSketch() {
    if (!store_) return;
    try {
        close();
    } catch (...) {
    }
}

void BufferedSketch::update(std::uint64_t key, std::uint64_t count) {
    if (count == 0) throw std::invalid_argument("update count must be >= 1");
    if (count > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("buffered update count must fit in 32 bits");
    }
    const std::uint64_t pageId = family_.page_index(key);
    family_.column_offsets(key, offsets_);

    SubBuffer& buffer = buffers_[pageId];
    for (auto offset : offsets_) buffer.offsets.push_back(static_cast<std::uint16_t>(offset));
    buffer.counts.push_back(static_cast<std::uint32_t>(count));
    totalInserted_ += count;
    pendingTotal_ += count;

    if (buffer.counts.size() >= capacity_) drain(pageId);
}

std::uint64_t BufferedSketch::estimate(std::uint64_t key) {
    const std::uint64_t pageId = family_.page_index(key);
    store_->read_page(pageId, page_);

    SubBuffer& buffer = buffers_[pageId];
    const bool dirty = !buffer.counts.empty();
    if (dirty) apply(buffer, page_);

    family_.column_offsets(key, offsets_);
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (std::uint32_t row = 0; row < params_.depth; ++row) {
        best = std::min(best, load_cell(page_, layout_.offset_in_page(row, offsets_[row]), params_.cellBytes));
    }

    if (dirty) {
        store_->write_page(pageId, page_);
        ++flushes_;
        pendingTotal_ -= std::reduce(buffer.counts.begin(), buffer.counts.end(), std::uint64_t{0});
        updatesApplied_ += buffer.counts.size();
        buffer.clear();
    }
    return best;
}

void BufferedSketch::apply(SubBuffer& buffer, std::span<std::byte> page) const {
    const std::uint64_t limit = params_.max_counter();
    const std::uint32_t depth = params_.depth;
    for (std::size_t e = 0; e < buffer.counts.size(); ++e) {
        const std::uint64_t count = buffer.counts[e];
        for (std::uint32_t row = 0; row < depth; ++row) {
            const std::uint32_t at = layout_.offset_in_page(row, buffer.offsets[e * depth + row]);
            const std::uint64_t value = load_cell(page, at, params_.cellBytes);
            if (value > limit - count) {
                throw CounterOverflow("counter overflow at row " + std::to_string(row) + " while applying buffer");
            }
            store_cell(page, at, params_.cellBytes, value + count);
        }
    }
}

void BufferedSketch::drain(std::uint64_t pageId) {
    SubBuffer& buffer = buffers_[pageId];
    store_->read_page(pageId, page_);
    apply(buffer, page_);
    store_->write_page(pageId, page_);
    ++flushes_;
    pendingTotal_ -= std::reduce(buffer.counts.begin(), buffer.counts.end(), std::uint64_t{0});
    updatesApplied_ += buffer.counts.size();
    buffer.clear();
}

void BufferedSketch::flush_all() {
    for (std::uint64_t pageId = 0; pageId < buffers_.size(); ++pageId) {
        if (!buffers_[pageId].counts.empty()) drain(pageId);
    }
    if (auto* file = dynamic_cast<FilePageStore*>(store_.get())) {
        SketchHeader header = file->header();
        header.totalInserted = totalInserted_;
        file->write_header(header);
    }
}

void BufferedSketch::close() {
    flush_all();
    store_->sync();
}

IoReport BufferedSketch::io_report() const {
    IoReport report;
    report.pageReads = store_->stats().pageReads;
    report.pageWrites = store_->stats().pageWrites;
    report.updatesApplied = updatesApplied_;
    report.flushes = flushes_;
    const auto k = static_cast<double>(params_.pageCount);
    const auto m = static_cast<double>(params_.bufferBytes);
    report.predictedAmortized = k * params_.cellBytes * params_.depth / m;
    report.flushCostPerUpdate = 2.0 * entryBytes_ * k / m;
    return report;
}

CounterMatrix BufferedSketch::snapshot() {
    flush_all();
    CounterMatrix matrix(params_);
    PageBuffer page(params_.pageBytes);
    for (std::uint64_t pageId = 0; pageId < params_.pageCount; ++pageId) {
        store_->read_page(pageId, page);
        for (std::uint32_t local = 0; local < params_.columnsPerPage; ++local) {
            for (std::uint32_t row = 0; row < params_.depth; ++row) {
                const auto value = load_cell(page, layout_.offset_in_page(row, local), params_.cellBytes);
                if (value) matrix.add(row, pageId * params_.columnsPerPage + local, value);
            }
        }
    }
    matrix.add_total(totalInserted_);
    return matrix;
}

}  // namespace bcms
