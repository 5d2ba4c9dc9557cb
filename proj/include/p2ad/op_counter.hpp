#pragma once

#include <cstdint>

namespace p2ad {

// Ledger of accumulate operations for one inference (or one layer).
// Invariant after every completed layer:
//   shift_adds_done + accumulates_skipped == dense_total
// where dense_total is the analytic operation count of the same layer
// with no skipping.
struct OpCounter {
    std::uint64_t shift_adds_done = 0;
    std::uint64_t accumulates_skipped = 0;
    std::uint64_t dense_total = 0;

    double savings_fraction() const {
        return dense_total == 0
                   ? 0.0
                   : static_cast<double>(accumulates_skipped) /
                         static_cast<double>(dense_total);
    }

    OpCounter& operator+=(const OpCounter& other) {
        shift_adds_done += other.shift_adds_done;
        accumulates_skipped += other.accumulates_skipped;
        dense_total += other.dense_total;
        return *this;
    }
};

}  // namespace p2ad
