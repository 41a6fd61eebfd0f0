#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "hux/errors.hpp"

namespace hux {

struct LiouEntry {
    std::string caption;
    std::int64_t frame_id = 0;
    std::int64_t timestamp_ms = 0;
};

// Last-In-Only-Used caption register: only the newest scene caption is ever
// consumed, so the stack degenerates to a single slot. Pushing over an
// unread entry discards data; dropped_count keeps that loss observable.
class LiouStack {
  public:
    void push(std::string caption, std::int64_t frame_id, std::int64_t timestamp_ms) {
        if (top_ && timestamp_ms < top_->timestamp_ms)
            throw ClockRegression("LIOU push at t=" + std::to_string(timestamp_ms) +
                                  " before top at t=" + std::to_string(top_->timestamp_ms));
        if (top_ && !top_read_) ++dropped_count_;
        top_ = LiouEntry{std::move(caption), frame_id, timestamp_ms};
        top_read_ = false;
        ++push_count_;
    }

    // Returns the latest entry (or nothing). The first read of a given top
    // counts as a fresh read; re-reads are free.
    std::optional<LiouEntry> read() {
        if (!top_) return std::nullopt;
        if (!top_read_) {
            top_read_ = true;
            ++fresh_read_count_;
        }
        return top_;
    }

    std::int64_t dropped_count() const { return dropped_count_; }
    std::int64_t push_count() const { return push_count_; }
    std::int64_t fresh_read_count() const { return fresh_read_count_; }
    bool top_unread() const { return top_ && !top_read_; }

  private:
    std::optional<LiouEntry> top_;
    bool top_read_ = false;
    std::int64_t dropped_count_ = 0;
    std::int64_t push_count_ = 0;
    std::int64_t fresh_read_count_ = 0;
};

} // namespace hux
