#pragma once

#include <string>

#include "reclap/adam.hpp"
#include "reclap/model.hpp"

namespace reclap {

// Binary checkpoint: "RCLP", version byte 1, u32 little-endian length of a
// compact sorted-key JSON document (model config + optimizer scalars), then
// every tensor as little-endian 32-bit floats in canonical parameter order —
// model parameters, then all Adam first moments, then all second moments.
// Training math runs in doubles; the 32-bit projection is the persisted
// truth, so save → load → save is byte-identical.

struct LoadedCheckpoint {
  DualEncoder model;
  AdamState adam;
};

void save_checkpoint(const DualEncoder& model, const AdamState& adam,
                     const std::string& path);

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace reclap
