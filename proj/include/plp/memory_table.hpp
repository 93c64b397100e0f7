#pragma once

#include <optional>
#include <vector>

#include "plp/data_driven.hpp"
#include "plp/sls.hpp"

namespace plp {

enum class Provenance { model, data };

// Per-mode store of recorded trajectory segments and cached responses.
// Model-derived entries never go stale (the model does not change);
// data-derived entries are invalidated by fresh data, but only up to
// `data_refresh_limit` re-syntheses per mode, which keeps the total
// synthesis effort bounded over arbitrarily long runs.
class MemoryTable {
public:
    struct Entry {
        SystemResponse response;
        Provenance provenance = Provenance::model;
        bool stale = false;
        int refreshes = 0;  // data re-syntheses consumed for this mode
    };

    explicit MemoryTable(int mode_count, int data_refresh_limit = 1);

    int mode_count() const { return static_cast<int>(entries_.size()); }
    int refresh_limit() const { return refresh_limit_; }

    // Cached entry, or nullptr when this mode was never synthesized.
    const Entry* lookup(int mode) const;
    bool has_fresh(int mode) const;

    // Cache a response; replacing an existing entry with a data-derived one
    // counts against the mode's refresh budget.
    void store(int mode, SystemResponse response, Provenance provenance);

    // Record a finished trajectory segment for this mode.  Invalidates a
    // cached data-derived response while refresh budget remains.
    void add_segment(int mode, DataSegment segment);

    const std::vector<DataSegment>& segments(int mode) const;
    long transition_count(int mode) const;

private:
    std::vector<std::optional<Entry>> entries_;
    std::vector<std::vector<DataSegment>> segments_;
    int refresh_limit_ = 1;

    void check_mode(int mode) const;
};

}  // namespace plp
