#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reclap/data.hpp"
#include "reclap/eval.hpp"
#include "reclap/model.hpp"
#include "reclap/tensor.hpp"
#include "reclap/trainer.hpp"

namespace reclap {

// A grid over one axis, replicated across seeds. The "n_prompts" axis
// trains once per seed and re-scores the checkpoint at each prompt count;
// the "p" axis retrains per cell because the caption-mixing rate changes
// what the model sees.
struct SweepConfig {
  std::string axis = "n_prompts";  // "n_prompts" or "p"
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  ModelConfig model;
  TrainConfig train;          // per-cell copies override seed (and p)
  std::size_t n_prompts = 2;  // prompt count held fixed on the p axis
  std::uint64_t eval_seed = 1000;

  void validate() const;
};

struct SweepCell {
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

// Runs the grid and returns cells sorted by (axis value, seed).
std::vector<SweepCell> run_sweep(const SweepConfig& config,
                                 const std::vector<SampleRecord>& records,
                                 const std::string& base_dir,
                                 const Tensor2D& eval_features,
                                 const std::vector<std::int64_t>& truth,
                                 const std::vector<LabelSpec>& specs);

// CSV with one row per cell: <axis>,seed,metric,value.
void write_sweep_csv(const std::string& axis,
                     const std::vector<SweepCell>& cells,
                     const std::string& path);

// Aligned two-row summary: axis values across the top, mean +/- stddev
// (sample stddev over seeds) underneath.
std::string format_sweep_table(const std::string& axis,
                               const std::vector<SweepCell>& cells);

}  // namespace reclap
