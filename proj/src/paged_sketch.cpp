#include "bcms/paged_sketch.hpp"

#include <algorithm>
#include <limits>

namespace bcms {

SketchHeader make_header(const SketchParams& params, std::uint64_t seed, HashMode mode) {
    SketchHeader h;
    h.depth = params.depth;
    h.width = params.width;
    h.cellBytes = params.cellBytes;
    h.pageBytes = params.pageBytes;
    h.pageCount = params.pageCount;
    h.masterSeed = seed;
    h.localized = mode == HashMode::localized;
    return h;
}

PagedSketch::PagedSketch(const SketchParams& params, std::uint64_t seed, HashMode mode,
                         std::unique_ptr<PageStore> store)
    : params_(params),
      family_(seed, params.depth, params.pageCount, params.columnsPerPage),
      mode_(mode),
      layout_(params),
      store_(std::move(store)),
      probes_(params.depth) {
    validate(params_);
    if (!store_ || store_->page_bytes() != params.pageBytes || store_->page_count() != params.pageCount) {
        throw std::invalid_argument("page store does not match sketch geometry");
    }
}

PagedSketch PagedSketch::open(const std::filesystem::path& path) {
    auto file = FilePageStore::open(path);
    const SketchHeader header = file->header();
    PagedSketch sketch(header.params(), header.masterSeed,
                       header.localized ? HashMode::localized : HashMode::classical, std::move(file));
    sketch.totalInserted_ = header.totalInserted;
    return sketch;
}

PagedSketch::~PagedSketch() {
    if (!store_) return;
    try {
        close();
    } catch (...) {
    }
}

void PagedSketch::close() {
    if (auto* file = dynamic_cast<FilePageStore*>(store_.get())) {
        SketchHeader header = file->header();
        header.totalInserted = totalInserted_;
        file->write_header(header);
    }
    store_->sync();
}

void PagedSketch::probe(std::uint64_t key) {
    for (std::uint32_t row = 0; row < params_.depth; ++row) {
        const auto address = layout_.locate(row, probe_column(family_, mode_, params_.width, key, row));
        probes_[row] = {address.pageId, row, address.byteOffset};
    }
    std::sort(probes_.begin(), probes_.end(), [](const Probe& a, const Probe& b) { return a.pageId < b.pageId; });
    pageStarts_.clear();
    for (std::size_t i = 0; i < probes_.size(); ++i) {
        if (i == 0 || probes_[i].pageId != probes_[i - 1].pageId) pageStarts_.push_back(i);
    }
    ensure_buffers(pageStarts_.size());
}

void PagedSketch::ensure_buffers(std::size_t pages) {
    while (pages_.size() < pages) pages_.emplace_back(params_.pageBytes);
}

void PagedSketch::update(std::uint64_t key, std::uint64_t count) {
    if (count == 0) throw std::invalid_argument("update count must be >= 1");
    probe(key);
    const std::uint64_t limit = params_.max_counter();
    for (std::size_t p = 0; p < pageStarts_.size(); ++p) {
        store_->read_page(probes_[pageStarts_[p]].pageId, pages_[p]);
    }
    // Check every probe before touching any page so overflow leaves storage unchanged.
    for (std::size_t p = 0, i = 0; p < pageStarts_.size(); ++p) {
        const std::size_t end = p + 1 < pageStarts_.size() ? pageStarts_[p + 1] : probes_.size();
        for (; i < end; ++i) {
            if (load_cell(pages_[p], probes_[i].offset, params_.cellBytes) > limit - count) {
                throw CounterOverflow("counter overflow at row " + std::to_string(probes_[i].row) + " on page " +
                                      std::to_string(probes_[i].pageId));
            }
        }
    }
    for (std::size_t p = 0, i = 0; p < pageStarts_.size(); ++p) {
        const std::size_t end = p + 1 < pageStarts_.size() ? pageStarts_[p + 1] : probes_.size();
        for (; i < end; ++i) {
            const auto value = load_cell(pages_[p], probes_[i].offset, params_.cellBytes);
            store_cell(pages_[p], probes_[i].offset, params_.cellBytes, value + count);
        }
        store_->write_page(probes_[pageStarts_[p]].pageId, pages_[p]);
    }
    totalInserted_ += count;
}

std::uint64_t PagedSketch::estimate(std::uint64_t key) {
    probe(key);
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t p = 0, i = 0; p < pageStarts_.size(); ++p) {
        store_->read_page(probes_[pageStarts_[p]].pageId, pages_[p]);
        const std::size_t end = p + 1 < pageStarts_.size() ? pageStarts_[p + 1] : probes_.size();
        for (; i < end; ++i) best = std::min(best, load_cell(pages_[p], probes_[i].offset, params_.cellBytes));
    }
    return best;
}

}  // namespace bcms
