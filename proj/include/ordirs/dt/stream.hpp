#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ordirs/dt/types.hpp"

namespace ordirs::dt {

/// Serializes one frame to its canonical single-line JSON form (no newline).
std::string frame_to_line(const DtFrame& frame);

/// Frame-at-a-time writer for `.dt.jsonl` streams. Enforces strictly
/// increasing frame_index; throws OrderingError otherwise. Single consumer
/// per handle.
class StreamWriter {
public:
    explicit StreamWriter(std::ostream& out);
    void write(const DtFrame& frame);
    std::size_t frames_written() const { return count_; }

private:
    std::ostream& out_;
    std::size_t count_ = 0;
    std::int64_t last_index_ = -1;
    bool any_ = false;
};

/// Frame-at-a-time reader. Throws ParseError (naming line and offset) on a
/// malformed record and OrderingError on non-increasing frame_index.
class StreamReader {
public:
    explicit StreamReader(std::istream& in);
    /// Returns the next frame, or nullopt at end of stream.
    std::optional<DtFrame> next();

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
    std::int64_t last_index_ = -1;
    bool any_ = false;
};

/// Whole-sequence helpers over the streaming classes.
void write_stream(const std::vector<DtFrame>& frames, std::ostream& sink);
std::vector<DtFrame> read_stream(std::istream& source);

/// File variants. Writing is atomic (temp-then-rename).
void write_stream_file(const std::vector<DtFrame>& frames,
                       const std::filesystem::path& path);
std::vector<DtFrame> read_stream_file(const std::filesystem::path& path);

}  // namespace ordirs::dt
