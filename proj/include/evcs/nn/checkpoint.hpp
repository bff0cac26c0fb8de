#pragma once

// Plain-text parameter checkpoints:
//
//   evcs-checkpoint 1
//   <parameter count>
//   <name> <rows> <cols>
//   <row 0 values, space separated, %.17g>
//   ...
//
// Values round-trip bit-exactly. Loading verifies count, names and shapes.

#include <filesystem>

#include "evcs/nn/tensor.hpp"

namespace evcs::nn {

void save_checkpoint(const std::filesystem::path& path, const ConstParamRefs& params);

/// Throws IoError if unreadable, ShapeError if names/shapes differ from `params`,
/// ParseError on malformed content.
void load_checkpoint(const std::filesystem::path& path, const ParamRefs& params);

}  // namespace evcs::nn
