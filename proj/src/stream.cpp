#include "ordirs/dt/stream.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "ordirs/dt/json_codec.hpp"
#include "ordirs/errors.hpp"
#include "ordirs/util/fsio.hpp"

namespace ordirs::dt {

std::string frame_to_line(const DtFrame& frame) {
    return to_json(frame).dump();
}

StreamWriter::StreamWriter(std::ostream& out) : out_(out) {}

void StreamWriter::write(const DtFrame& frame) {
    if (any_ && frame.frame_index <= last_index_) {
        throw OrderingError("frame_index " + std::to_string(frame.frame_index) +
                            " not greater than previous " +
                            std::to_string(last_index_));
    }
    out_ << frame_to_line(frame) << '\n';
    if (!out_) throw InputError("stream write failed");
    last_index_ = frame.frame_index;
    any_ = true;
    ++count_;
}

StreamReader::StreamReader(std::istream& in) : in_(in) {}

std::optional<DtFrame> StreamReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            // nlohmann reports a 1-based byte position within the line.
            std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
            throw ParseError(std::string("malformed frame record: ") + e.what(),
                             line_no_, offset);
        }
        DtFrame frame;
        try {
            frame = frame_from_json(j);
        } catch (const ProtocolError& e) {
            throw ParseError(e.what(), line_no_, 0);
        }
        if (any_ && frame.frame_index <= last_index_) {
            throw OrderingError(
                "frame_index " + std::to_string(frame.frame_index) +
                " not greater than previous " + std::to_string(last_index_) +
                " at line " + std::to_string(line_no_));
        }
        last_index_ = frame.frame_index;
        any_ = true;
        return frame;
    }
    return std::nullopt;
}

void write_stream(const std::vector<DtFrame>& frames, std::ostream& sink) {
    StreamWriter writer(sink);
    for (const auto& f : frames) writer.write(f);
}

std::vector<DtFrame> read_stream(std::istream& source) {
    StreamReader reader(source);
    std::vector<DtFrame> frames;
    while (auto f = reader.next()) frames.push_back(std::move(*f));
    return frames;
}

void write_stream_file(const std::vector<DtFrame>& frames,
                       const std::filesystem::path& path) {
    std::ostringstream buffer;
    write_stream(frames, buffer);
    util::atomic_write(path, buffer.str());
}

std::vector<DtFrame> read_stream_file(const std::filesystem::path& path) {
    std::string content = util::read_file(path);
    std::istringstream in(content);
    return read_stream(in);
}

}  // namespace ordirs::dt
