#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vsum::cli {

struct TracePanel {
  std::string title;
  std::vector<double> values;  // raw; normalized when rendered
};

struct TraceInput {
  std::string video_id;
  TracePanel scores;
  std::vector<std::int64_t> shots;     // per-frame shot index, -1 if unknown
  std::vector<std::uint8_t> selected;  // per-frame selection flag
  std::optional<TracePanel> reference;  // e.g. mean human importance
};

// Min-max normalization; a constant input maps to all zeros.
std::vector<double> min_max_normalize(const std::vector<double>& values);

// One bar per frame, alternating shot bands, selected frames highlighted, and
// an optional second panel for the reference trace.
std::string render_trace_svg(const TraceInput& input);

// frame_index,score_normalized,shot_index,selected[,reference_normalized]
std::string render_trace_csv(const TraceInput& input);

}  // namespace vsum::cli
