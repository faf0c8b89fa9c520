#include "reclap/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace reclap {

namespace {

bool is_positive_integer(double value) {
  return value >= 1.0 && value == std::floor(value);
}

}  // namespace

void SweepConfig::validate() const {
  if (axis != "n_prompts" && axis != "p") {
    throw std::invalid_argument("sweep: unknown axis \"" + axis +
                                "\"; expected \"n_prompts\" or \"p\"");
  }
  if (values.empty()) {
    throw std::invalid_argument("sweep: no axis values given");
  }
  if (seeds.empty()) {
    throw std::invalid_argument("sweep: no seeds given");
  }
  for (double value : values) {
    if (axis == "n_prompts" && !is_positive_integer(value)) {
      throw std::invalid_argument(
          "sweep: n_prompts values must be positive integers, got " +
          format_double(value));
    }
    if (axis == "p" && (value < 0.0 || value > 1.0)) {
      throw std::invalid_argument("sweep: p values must lie in [0, 1], got " +
                                  format_double(value));
    }
  }
  model.validate();
  train.validate();
  if (axis == "p" && n_prompts == 0) {
    throw std::invalid_argument("sweep: n_prompts must be positive");
  }
}

std::vector<SweepCell> run_sweep(const SweepConfig& config,
                                 const std::vector<SampleRecord>& records,
                                 const std::string& base_dir,
                                 const Tensor2D& eval_features,
                                 const std::vector<std::int64_t>& truth,
                                 const std::vector<LabelSpec>& specs) {
  config.validate();
  std::vector<SweepCell> cells;

  for (std::uint64_t seed : config.seeds) {
    ModelConfig model_config = config.model;
    model_config.seed = seed;
    TrainConfig train_config = config.train;
    train_config.seed = seed;
    train_config.checkpoint_dir.clear();

    if (config.axis == "n_prompts") {
      // One training run per seed; only the scoring-side prompt count moves.
      DualEncoder model(model_config);
      train(model, records, base_dir, train_config);
      for (double value : config.values) {
        double accuracy = eval_multiclass(
            model, eval_features, truth, specs,
            static_cast<std::size_t>(value), config.eval_seed + seed);
        cells.push_back(SweepCell{value, seed, "zsac_accuracy", accuracy});
      }
    } else {
      // The mixing rate changes training itself, so retrain per value.
      for (double value : config.values) {
        train_config.policy.p = value;
        DualEncoder model(model_config);
        train(model, records, base_dir, train_config);
        double accuracy =
            eval_multiclass(model, eval_features, truth, specs,
                            config.n_prompts, config.eval_seed + seed);
        cells.push_back(SweepCell{value, seed, "zsac_accuracy", accuracy});
      }
    }
  }

  std::sort(cells.begin(), cells.end(),
            [](const SweepCell& a, const SweepCell& b) {
              if (a.axis_value != b.axis_value) {
                return a.axis_value < b.axis_value;
              }
              return a.seed < b.seed;
            });
  return cells;
}

void write_sweep_csv(const std::string& axis,
                     const std::vector<SweepCell>& cells,
                     const std::string& path) {
  std::string csv = axis + ",seed,metric,value\n";
  for (const SweepCell& cell : cells) {
    csv += format_double(cell.axis_value) + "," + std::to_string(cell.seed) +
           "," + cell.metric + "," + format_double(cell.value) + "\n";
  }
  write_file_locked(path, csv);
}

std::string format_sweep_table(const std::string& axis,
                               const std::vector<SweepCell>& cells) {
  if (cells.empty()) {
    throw std::invalid_argument("sweep: no cells to format");
  }
  // Aggregate seeds per axis value, preserving ascending value order.
  std::map<double, std::vector<double>> by_value;
  for (const SweepCell& cell : cells) {
    by_value[cell.axis_value].push_back(cell.value);
  }

  std::vector<std::string> headers{axis};
  std::vector<std::string> summary{cells.front().metric};
  for (const auto& [value, runs] : by_value) {
    double mean = 0.0;
    for (double run : runs) mean += run;
    mean /= static_cast<double>(runs.size());
    double variance = 0.0;
    for (double run : runs) variance += (run - mean) * (run - mean);
    double stddev = runs.size() > 1
                        ? std::sqrt(variance /
                                    static_cast<double>(runs.size() - 1))
                        : 0.0;
    char cell_text[64];
    std::snprintf(cell_text, sizeof(cell_text), "%.4f +/- %.4f", mean,
                  stddev);
    headers.push_back(format_double(value));
    summary.push_back(cell_text);
  }

  std::string table;
  for (std::size_t col = 0; col < headers.size(); ++col) {
    std::size_t width =
        std::max(headers[col].size(), summary[col].size()) + 2;
    headers[col].resize(width, ' ');
    summary[col].resize(width, ' ');
  }
  for (const std::string& cell : headers) table += cell;
  while (!table.empty() && table.back() == ' ') table.pop_back();
  table += '\n';
  std::string row;
  for (const std::string& cell : summary) row += cell;
  while (!row.empty() && row.back() == ' ') row.pop_back();
  table += row + '\n';
  return table;
}

}  // namespace reclap
