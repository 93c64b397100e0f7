#include "plp/memory_table.hpp"

#include "plp/errors.hpp"

namespace plp {

MemoryTable::MemoryTable(int mode_count, int data_refresh_limit)
    : entries_(mode_count), segments_(mode_count),
      refresh_limit_(data_refresh_limit) {
    if (mode_count <= 0) throw ConfigError("mode count must be positive");
    if (data_refresh_limit < 0) {
        throw ConfigError("refresh limit must be non-negative");
    }
}

void MemoryTable::check_mode(int mode) const {
    if (mode < 0 || mode >= mode_count()) {
        throw ConfigError("mode index out of range");
    }
}

const MemoryTable::Entry* MemoryTable::lookup(int mode) const {
    check_mode(mode);
    return entries_[mode].has_value() ? &*entries_[mode] : nullptr;
}

bool MemoryTable::has_fresh(int mode) const {
    const Entry* e = lookup(mode);
    return e != nullptr && !e->stale;
}

void MemoryTable::store(int mode, SystemResponse response,
                        Provenance provenance) {
    check_mode(mode);
    Entry next;
    next.response = std::move(response);
    next.provenance = provenance;
    if (entries_[mode].has_value()) {
        next.refreshes = entries_[mode]->refreshes;
        if (provenance == Provenance::data) ++next.refreshes;
    }
    entries_[mode] = std::move(next);
}

void MemoryTable::add_segment(int mode, DataSegment segment) {
    check_mode(mode);
    if (segment.inputs.cols() < 1) return;  // nothing usable
    segments_[mode].push_back(std::move(segment));
    if (entries_[mode].has_value() &&
        entries_[mode]->provenance == Provenance::data &&
        entries_[mode]->refreshes < refresh_limit_) {
        entries_[mode]->stale = true;
    }
}

const std::vector<DataSegment>& MemoryTable::segments(int mode) const {
    check_mode(mode);
    return segments_[mode];
}

long MemoryTable::transition_count(int mode) const {
    check_mode(mode);
    long total = 0;
    for (const auto& seg : segments_[mode]) total += seg.inputs.cols();
    return total;
}

}  // namespace plp
