#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ordirs/perception/backend.hpp"
#include "ordirs/synth/scenario.hpp"
#include "ordirs/synth/world.hpp"

namespace ordirs::synth {

/// Corpus layout under the output directory:
///
///   annotations.json             all scenarios' benchmark samples
///   llm_rules.json               scripted-model rules for every query
///   <name>/world.json            the normalized scenario document
///   <name>/frames/0000.png       rendered video frames
///   <name>/gt/<name>.dt.jsonl    reference twin stream
///   <name>/gt/depth/0000.png     16-bit depth sidecars the stream references
struct CorpusSummary {
    std::vector<std::string> scenario_names;
    std::size_t frame_count = 0;
    std::size_t sample_count = 0;
    std::size_t rule_count = 0;
};

/// Zero-padded frame file name, "0000.png".
std::string frame_file_name(std::int64_t frame_index);

/// Pipeline configuration used for a scenario's reference stream: the
/// default configuration with the scenario's labels folded into the lexicon.
/// Rebuilding a twin stream from the rendered frames with this config and
/// the exact synthetic backend reproduces the reference stream byte for
/// byte.
perception::PipelineConfig corpus_pipeline_config(const ScenarioSpec& spec);

/// Twin frames for a world through the perception pipeline with the exact
/// synthetic backend, depth refs pointing at "depth/<frame>.png".
std::vector<dt::DtFrame> reference_stream(const World& world);

CorpusSummary write_corpus(const std::vector<ScenarioSpec>& specs,
                           const std::filesystem::path& out_dir);

}  // namespace ordirs::synth
