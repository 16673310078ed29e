#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace ordirs::agent {

/// Per-frame signals extracted from one segmentation run, the input domain
/// of analysis programs. Centroid entries are NaN on frames with an empty
/// final set.
struct SeriesBundle {
    double fps = 1.0;
    std::vector<std::int64_t> frame_indices;
    std::vector<std::uint8_t> presence;
    std::vector<double> area;
    std::vector<double> count;
    std::vector<double> centroid_x;
    std::vector<double> centroid_y;
};

/// Evaluated outputs: a flat metrics object plus the frames that define the
/// exported values (edges, extremes, interval endpoints), for evidence.
struct MetricOutputs {
    nlohmann::json metrics;
    std::vector<std::int64_t> key_frames;
};

/// Small statically-typed language for quantitative workflow questions.
///
/// A program is a sequence of single-assignment statements followed by one
/// OUTPUT statement naming the exported variables. '#' starts a comment.
///
///   active = THRESHOLD(AREA, 50)
///   openings = RISING_EDGES(active)
///   per_second = RATE(openings, FPS)
///   OUTPUT openings, per_second
///
/// Series sources (one segmentation run): PRESENCE (bool series), AREA,
/// COUNT, CENTROID_X, CENTROID_Y (number series).
///
/// Functions and their types:
///   THRESHOLD(number series, number) -> bool series   (value >= threshold;
///                                                      NaN compares false)
///   RISING_EDGES(bool series)  -> count   (false->true transitions; a series
///                                          starting true counts one)
///   FALLING_EDGES(bool series) -> count   (interior true->false transitions)
///   FIRST_TRUE(bool series)    -> frame   (error when never true)
///   LAST_TRUE(bool series)     -> frame
///   COUNT_TRUE(bool series)    -> frames  (number of true frames)
///   DURATIONS(bool series)     -> frames list (length of each true run)
///   BETWEEN(frame, frame)      -> frames  (second minus first, in frame
///                                          index units)
///   RATE(count, FPS)           -> rate    (events per second over the run)
///
/// Only non-series values can be exported. Export naming in the metrics
/// object, with seconds derived via fps:
///   count      name
///   rate       name                      (canonical 6-digit value)
///   frame      name_frame, name_seconds
///   frames     name_frames, name_seconds
///   frames list name_count, name_1_frames, name_1_seconds, name_2_...
///
/// Defining frames: RISING_EDGES the rise positions, FALLING_EDGES the last
/// true frame before each fall, FIRST_TRUE/LAST_TRUE that frame, DURATIONS
/// each run's first frame, BETWEEN both endpoints, RATE its count's frames,
/// COUNT_TRUE none. key_frames is the sorted union over the outputs.
///
/// Parse and type errors throw ProgramError naming the line; evaluation
/// errors (FIRST_TRUE of a never-true series, RATE over zero frames) throw
/// ProgramError as well.
class AnalysisProgram {
public:
    static AnalysisProgram parse(const std::string& text);

    MetricOutputs evaluate(const SeriesBundle& series) const;

    const std::vector<std::string>& outputs() const { return outputs_; }
    const std::string& text() const { return text_; }

private:
    struct Impl;
    AnalysisProgram() = default;

    std::shared_ptr<const Impl> impl_;
    std::vector<std::string> outputs_;
    std::string text_;
};

}  // namespace ordirs::agent
