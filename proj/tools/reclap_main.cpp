// Command-line front end: the whole pipeline (toy data, caption rewrites,
// prompt pools, training, evaluation, sweeps) behind one binary. Every
// subcommand that owns a run directory refuses to clobber existing output
// without --force and drops a resolved-config echo next to its artifacts,
// so a run can be reproduced from the directory alone.

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reclap/checkpoint.hpp"
#include "reclap/config.hpp"
#include "reclap/data.hpp"
#include "reclap/eval.hpp"
#include "reclap/generate.hpp"
#include "reclap/llm_client.hpp"
#include "reclap/model.hpp"
#include "reclap/sweep.hpp"
#include "reclap/tensor.hpp"
#include "reclap/toy.hpp"
#include "reclap/trainer.hpp"

namespace {

using reclap::format_double;

// Creates the run directory, refusing to reuse a non-empty one unless the
// caller passed --force. An empty existing directory is fine: mktemp-style
// workflows pre-create it.
void ensure_run_dir(const std::string& path, bool force) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) {
    if (!fs::is_directory(path)) {
      throw std::runtime_error("\"" + path + "\" exists and is not a directory");
    }
    if (!fs::is_empty(path) && !force) {
      throw std::runtime_error("refusing to overwrite non-empty directory \"" +
                               path + "\" (use --force)");
    }
  } else {
    fs::create_directories(path);
  }
}

std::string parent_dir(const std::string& path) {
  return std::filesystem::path(path).parent_path().string();
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// "1,5,10" -> {1, 5, 10}; rejects empty fields and non-numeric garbage so a
// typo'd flag fails loudly instead of silently shrinking the list.
std::vector<std::string> split_commas(const std::string& text,
                                      const std::string& flag) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    std::string part = text.substr(start, comma - start);
    if (part.empty()) {
      throw std::runtime_error(flag + ": empty entry in list \"" + text + "\"");
    }
    parts.push_back(part);
    start = comma + 1;
  }
  return parts;
}

std::vector<std::size_t> parse_size_list(const std::string& text,
                                         const std::string& flag) {
  std::vector<std::size_t> values;
  for (const std::string& part : split_commas(text, flag)) {
    std::size_t consumed = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(part, &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed != part.size()) {
      throw std::runtime_error(flag + ": \"" + part +
                               "\" is not an unsigned integer");
    }
    values.push_back(static_cast<std::size_t>(value));
  }
  return values;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text,
                                           const std::string& flag) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t v : parse_size_list(text, flag)) {
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  return seeds;
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& flag) {
  std::vector<double> values;
  for (const std::string& part : split_commas(text, flag)) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
      value = std::stod(part, &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed != part.size()) {
      throw std::runtime_error(flag + ": \"" + part + "\" is not a number");
    }
    values.push_back(value);
  }
  return values;
}

// One non-empty label per line; blank lines and trailing carriage returns
// are tolerated so hand-edited files work.
std::vector<std::string> load_label_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open label file " + path);
  }
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) labels.push_back(line);
  }
  if (labels.empty()) {
    throw std::runtime_error("label file " + path + " contains no labels");
  }
  return labels;
}

// ----------------------------------------------------------------------
// gen-toy

struct GenToyArgs {
  std::string out;
  std::size_t classes = 8;
  std::size_t samples_per_class = 40;
  std::size_t eval_per_class = 10;
  std::size_t feature_dim = 64;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
  bool force = false;
};

int run_gen_toy(const GenToyArgs& args) {
  reclap::ToySpec spec;
  spec.n_classes = args.classes;
  spec.samples_per_class = args.samples_per_class;
  spec.eval_per_class = args.eval_per_class;
  spec.feature_dim = args.feature_dim;
  spec.noise_sigma = args.noise_sigma;
  spec.seed = args.seed;
  spec.validate();

  ensure_run_dir(args.out, args.force);
  reclap::ToyDataset toy = reclap::generate_toy_dataset(spec);

  reclap::save_manifest(toy.train, join_path(args.out, "manifest.jsonl"));
  reclap::save_eval_set(toy.eval, join_path(args.out, "eval.jsonl"));
  reclap::save_label_specs(toy.train_lexicon_specs,
                           join_path(args.out, "train_lexicon_specs.jsonl"));
  reclap::save_label_specs(toy.paraphrase_specs,
                           join_path(args.out, "paraphrase_specs.jsonl"));

  std::string labels_text;
  for (const std::string& label : toy.labels) labels_text += label + "\n";
  reclap::write_file_locked(join_path(args.out, "labels.txt"), labels_text);

  nlohmann::json echo = {
      {"n_classes", spec.n_classes},
      {"samples_per_class", spec.samples_per_class},
      {"eval_per_class", spec.eval_per_class},
      {"feature_dim", spec.feature_dim},
      {"noise_sigma", spec.noise_sigma},
      {"seed", spec.seed},
  };
  reclap::write_file_locked(join_path(args.out, "toy_spec.json"),
                            echo.dump(2) + "\n");

  std::cout << "gen-toy: wrote " << toy.train.size() << " training records, "
            << toy.eval.size() << " eval records, " << toy.labels.size()
            << " labels to " << args.out << "\n";
  return 0;
}

// ----------------------------------------------------------------------
// generator plumbing shared by gen-rewrites and gen-prompts

struct GeneratorArgs {
  bool offline_fallback = false;
  std::string llm_config;
  std::string bank;
  std::uint64_t seed = 0;
};

// Holds whichever generator the flags selected, plus the client it may
// borrow; the client must outlive the generator.
struct GeneratorBundle {
  std::unique_ptr<reclap::LlmClient> client;
  std::unique_ptr<reclap::CaptionGenerator> generator;
};

GeneratorBundle make_generator(const GeneratorArgs& args,
                               const reclap::ResolvedConfig& resolved) {
  if (args.offline_fallback == !args.llm_config.empty()) {
    throw std::runtime_error(
        "pass exactly one of --offline-fallback or --llm-config");
  }
  GeneratorBundle bundle;
  if (args.offline_fallback) {
    bundle.generator = std::make_unique<reclap::FallbackGenerator>();
    return bundle;
  }
  reclap::InContextBank bank = args.bank.empty()
                                   ? reclap::InContextBank::builtin()
                                   : reclap::load_bank(args.bank);
  bundle.client = std::make_unique<reclap::LlmClient>(resolved.values.llm);
  bundle.generator = std::make_unique<reclap::LlmGenerator>(
      *bundle.client, std::move(bank), args.seed);
  return bundle;
}

// ----------------------------------------------------------------------
// gen-rewrites

struct GenRewritesArgs {
  std::string manifest;
  std::string out;
  std::size_t k = 0;
  bool k_given = false;
  GeneratorArgs gen;
};

int run_gen_rewrites(const GenRewritesArgs& args) {
  std::map<std::string, std::string> overrides;
  if (args.k_given) overrides["augment.k"] = std::to_string(args.k);
  reclap::ResolvedConfig resolved =
      reclap::load_config(args.gen.llm_config, overrides);
  std::size_t k = resolved.values.train.policy.rewrite_count;

  std::vector<reclap::SampleRecord> records =
      reclap::load_manifest(args.manifest);
  GeneratorBundle bundle = make_generator(args.gen, resolved);
  reclap::RewriteOutcome outcome =
      reclap::rewrite_manifest(records, *bundle.generator, k);

  reclap::save_manifest(records, args.out);

  const std::string sidecar = args.out + ".errors.jsonl";
  std::filesystem::remove(sidecar);
  if (!outcome.failures.empty()) {
    std::string report;
    for (const reclap::RewriteFailure& failure : outcome.failures) {
      nlohmann::json row = {{"id", failure.id}, {"error", failure.message}};
      report += row.dump() + "\n";
    }
    reclap::write_file_locked(sidecar, report);
    std::cerr << "gen-rewrites: " << outcome.failures.size() << " of "
              << records.size() << " records failed; see " << sidecar << "\n";
    return 1;
  }
  std::cout << "gen-rewrites: wrote " << k << " rewrites for "
            << outcome.rewritten << " records to " << args.out << "\n";
  return 0;
}

// ----------------------------------------------------------------------
// gen-prompts

struct GenPromptsArgs {
  std::string labels;
  std::string out;
  std::size_t t = 0;
  bool t_given = false;
  std::size_t n = 0;
  bool n_given = false;
  GeneratorArgs gen;
};

int run_gen_prompts(const GenPromptsArgs& args) {
  std::map<std::string, std::string> overrides;
  if (args.t_given) overrides["prompt.t"] = std::to_string(args.t);
  if (args.n_given) overrides["prompt.n"] = std::to_string(args.n);
  reclap::ResolvedConfig resolved =
      reclap::load_config(args.gen.llm_config, overrides);

  std::vector<std::string> labels = load_label_lines(args.labels);
  GeneratorBundle bundle = make_generator(args.gen, resolved);

  std::vector<reclap::LabelSpec> specs;
  specs.reserve(labels.size());
  for (const std::string& label : labels) {
    specs.push_back(reclap::build_label_spec(*bundle.generator, label,
                                             resolved.values.prompt_t,
                                             resolved.values.prompt_n));
  }
  reclap::save_label_specs(specs, args.out);

  std::cout << "gen-prompts: wrote " << specs.size() << " label specs ("
            << resolved.values.prompt_t << " descriptions x "
            << resolved.values.prompt_n << " prompts) to " << args.out << "\n";
  return 0;
}

// ----------------------------------------------------------------------
// train

struct TrainArgs {
  std::string manifest;
  std::string out;
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool force = false;
};

int run_train(const TrainArgs& args) {
  std::map<std::string, std::string> overrides;
  if (args.seed_given) {
    // One --seed drives both the parameter init and the batch shuffle; a
    // reproduction needs no other knobs.
    overrides["model.seed"] = std::to_string(args.seed);
    overrides["train.seed"] = std::to_string(args.seed);
  }
  reclap::ResolvedConfig resolved = reclap::load_config(args.config, overrides);

  std::vector<reclap::SampleRecord> records =
      reclap::load_manifest(args.manifest);
  bool any_rewrites = false;
  for (const reclap::SampleRecord& record : records) {
    if (!record.rewrites.empty()) {
      any_rewrites = true;
      break;
    }
  }

  reclap::TrainConfig train_config = resolved.values.train;
  if (!any_rewrites && train_config.policy.p < 1.0) {
    std::cerr << "train: warning: no rewrites; effective p=1.0\n";
    train_config.policy.p = 1.0;
  }

  ensure_run_dir(args.out, args.force);
  reclap::write_config_echo(resolved, args.out);

  reclap::DualEncoder model(resolved.values.model);
  train_config.checkpoint_dir = args.out;
  reclap::TrainResult result = reclap::train(
      model, records, parent_dir(args.manifest), train_config);
  reclap::write_loss_csv(result.history, join_path(args.out, "loss.csv"));

  std::cout << "train: " << result.history.size() << " steps, final loss "
            << format_double(result.final_loss) << ", tau "
            << format_double(model.tau()) << "; run directory " << args.out
            << "\n";
  return 0;
}

// ----------------------------------------------------------------------
// eval-zsac

struct EvalZsacArgs {
  std::string checkpoint;
  std::string eval_data;
  std::string label_specs;
  std::string out;
  std::string config;
  std::size_t n_prompts = 0;
  bool n_prompts_given = false;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool template_only = false;
  bool force = false;
};

int run_eval_zsac(const EvalZsacArgs& args) {
  std::map<std::string, std::string> overrides;
  if (args.n_prompts_given) {
    overrides["eval.n_prompts"] = std::to_string(args.n_prompts);
  }
  if (args.seed_given) overrides["eval.seed"] = std::to_string(args.seed);
  reclap::ResolvedConfig resolved = reclap::load_config(args.config, overrides);

  reclap::LoadedCheckpoint loaded = reclap::load_checkpoint(args.checkpoint);
  const reclap::DualEncoder& model = loaded.model;

  std::vector<reclap::LabelSpec> specs =
      reclap::load_label_specs(args.label_specs);
  std::vector<reclap::EvalRecord> records =
      reclap::load_eval_set(args.eval_data);
  reclap::Tensor2D features = reclap::eval_feature_matrix(
      records, parent_dir(args.eval_data), model.config().feature_dim);

  const std::string condition =
      args.template_only ? "template_only" : "prompt_pooled";
  std::vector<reclap::LabelEmbedding> labels;
  if (args.template_only) {
    std::vector<std::string> names;
    names.reserve(specs.size());
    for (const reclap::LabelSpec& spec : specs) names.push_back(spec.label);
    labels = reclap::single_template_embeddings(model, names);
  } else {
    labels = reclap::label_embeddings_from_specs(
        model, specs, resolved.values.eval_n_prompts,
        resolved.values.eval_seed);
  }

  ensure_run_dir(args.out, args.force);
  reclap::write_config_echo(resolved, args.out);

  std::vector<reclap::MetricRow> rows;
  if (!records.empty() && records.front().multilabel()) {
    // Multi-label ground truth: rank every item per label and report mAP.
    std::vector<std::vector<int>> relevance;
    relevance.reserve(records.size());
    for (const reclap::EvalRecord& record : records) {
      if (record.relevance.size() != specs.size()) {
        throw std::runtime_error(
            "eval record " + record.id + " has a relevance row of width " +
            std::to_string(record.relevance.size()) + " but " +
            std::to_string(specs.size()) + " labels are loaded");
      }
      relevance.push_back(record.relevance);
    }
    reclap::Tensor2D audio = model.encode_audio(features);
    reclap::Tensor2D scores(audio.rows, labels.size());
    for (std::size_t i = 0; i < audio.rows; ++i) {
      for (std::size_t j = 0; j < labels.size(); ++j) {
        double dot = 0.0;
        for (std::size_t d = 0; d < audio.cols; ++d) {
          dot += audio.at(i, d) * labels[j].pooled.at(0, d);
        }
        scores.at(i, j) = dot;
      }
    }
    reclap::MapResult result = reclap::eval_multilabel_map(scores, relevance);
    for (const std::string& warning : result.warnings) {
      std::cerr << "eval-zsac: warning: " << warning << "\n";
    }
    rows.push_back({condition, "zsac_map", result.map});
    for (std::size_t i = 0; i < result.evaluated.size(); ++i) {
      rows.push_back({condition, "ap_" + specs[result.evaluated[i]].label,
                      result.per_label_ap[i]});
    }
    std::cout << "eval-zsac: " << condition << " zsac_map "
              << format_double(result.map) << "\n";
  } else {
    std::vector<std::int64_t> truth;
    truth.reserve(records.size());
    for (const reclap::EvalRecord& record : records) {
      truth.push_back(record.label_index);
    }
    double accuracy =
        reclap::accuracy_against_labels(model, features, truth, labels);
    rows.push_back({condition, "zsac_accuracy", accuracy});
    std::cout << "eval-zsac: " << condition << " zsac_accuracy "
              << format_double(accuracy) << "\n";
  }
  reclap::write_metrics_csv(rows, join_path(args.out, "metrics.csv"));
  return 0;
}

// ----------------------------------------------------------------------
// eval-retrieval

struct EvalRetrievalArgs {
  std::string checkpoint;
  std::string manifest;
  std::string ks = "1,5,10";
  std::string out;
  bool force = false;
};

int run_eval_retrieval(const EvalRetrievalArgs& args) {
  std::vector<std::size_t> ks = parse_size_list(args.ks, "--ks");

  reclap::LoadedCheckpoint loaded = reclap::load_checkpoint(args.checkpoint);
  std::vector<reclap::SampleRecord> records =
      reclap::load_manifest(args.manifest);
  reclap::Tensor2D cosines = reclap::cosine_matrix(
      loaded.model, records, parent_dir(args.manifest));
  reclap::RetrievalReport report = reclap::eval_retrieval(cosines, ks);

  ensure_run_dir(args.out, args.force);
  std::vector<reclap::MetricRow> rows;
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    rows.push_back({"audio_to_text", "r@" + std::to_string(report.ks[i]),
                    report.audio_to_text[i]});
  }
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    rows.push_back({"text_to_audio", "r@" + std::to_string(report.ks[i]),
                    report.text_to_audio[i]});
  }
  reclap::write_metrics_csv(rows, join_path(args.out, "metrics.csv"));

  for (const reclap::MetricRow& row : rows) {
    std::cout << "eval-retrieval: " << row.condition << " " << row.metric
              << " " << format_double(row.value) << "\n";
  }
  return 0;
}

// ----------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string axis;
  std::string values;
  std::string seeds = "0,1,2,3,4";
  std::string manifest;
  std::string eval_data;
  std::string label_specs;
  std::string out;
  std::string config;
  bool force = false;
};

int run_sweep(const SweepArgs& args) {
  reclap::ResolvedConfig resolved = reclap::load_config(args.config, {});

  reclap::SweepConfig sweep;
  sweep.axis = args.axis;
  sweep.values = parse_double_list(args.values, "--values");
  sweep.seeds = parse_seed_list(args.seeds, "--seeds");
  sweep.model = resolved.values.model;
  sweep.train = resolved.values.train;
  sweep.n_prompts = resolved.values.eval_n_prompts;
  sweep.eval_seed = resolved.values.eval_seed;
  sweep.validate();

  std::vector<reclap::SampleRecord> records =
      reclap::load_manifest(args.manifest);
  std::vector<reclap::EvalRecord> eval_records =
      reclap::load_eval_set(args.eval_data);
  std::vector<reclap::LabelSpec> specs =
      reclap::load_label_specs(args.label_specs);
  reclap::Tensor2D eval_features = reclap::eval_feature_matrix(
      eval_records, parent_dir(args.eval_data),
      resolved.values.model.feature_dim);
  std::vector<std::int64_t> truth;
  truth.reserve(eval_records.size());
  for (const reclap::EvalRecord& record : eval_records) {
    truth.push_back(record.label_index);
  }

  ensure_run_dir(args.out, args.force);
  reclap::write_config_echo(resolved, args.out);

  std::vector<reclap::SweepCell> cells =
      reclap::run_sweep(sweep, records, parent_dir(args.manifest),
                        eval_features, truth, specs);
  reclap::write_sweep_csv(sweep.axis, cells, join_path(args.out, "sweep.csv"));
  std::string table = reclap::format_sweep_table(sweep.axis, cells);
  reclap::write_file_locked(join_path(args.out, "sweep_table.txt"), table);

  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "reclap: contrastive audio-text training with caption and prompt "
      "augmentation"};
  app.require_subcommand(1);

  GenToyArgs gen_toy;
  CLI::App* toy_cmd = app.add_subcommand(
      "gen-toy", "Generate the synthetic separable dataset");
  toy_cmd->add_option("--out", gen_toy.out, "Output directory")->required();
  toy_cmd->add_option("--classes", gen_toy.classes, "Number of classes");
  toy_cmd->add_option("--samples-per-class", gen_toy.samples_per_class,
                      "Training samples per class");
  toy_cmd->add_option("--eval-per-class", gen_toy.eval_per_class,
                      "Eval samples per class");
  toy_cmd->add_option("--feature-dim", gen_toy.feature_dim,
                      "Feature vector width");
  toy_cmd->add_option("--noise-sigma", gen_toy.noise_sigma,
                      "Cluster noise scale");
  toy_cmd->add_option("--seed", gen_toy.seed, "Dataset seed");
  toy_cmd->add_flag("--force", gen_toy.force,
                    "Overwrite a non-empty output directory");

  GenRewritesArgs gen_rewrites;
  CLI::App* rewrites_cmd = app.add_subcommand(
      "gen-rewrites", "Add K caption rewrites to every manifest record");
  rewrites_cmd->add_option("--manifest", gen_rewrites.manifest,
                           "Input manifest")->required();
  rewrites_cmd->add_option("--out", gen_rewrites.out, "Output manifest")
      ->required();
  CLI::Option* k_opt =
      rewrites_cmd->add_option("--k", gen_rewrites.k, "Rewrites per caption");
  rewrites_cmd->add_option("--bank", gen_rewrites.gen.bank,
                           "In-context exemplar bank (JSONL)");
  rewrites_cmd->add_option("--llm-config", gen_rewrites.gen.llm_config,
                           "Config file with the llm.* section");
  rewrites_cmd->add_flag("--offline-fallback",
                         gen_rewrites.gen.offline_fallback,
                         "Use the deterministic template generator");
  rewrites_cmd->add_option("--seed", gen_rewrites.gen.seed,
                           "Exemplar sampling seed");

  GenPromptsArgs gen_prompts;
  CLI::App* prompts_cmd = app.add_subcommand(
      "gen-prompts", "Build an n x t prompt pool per label");
  prompts_cmd->add_option("--labels", gen_prompts.labels,
                          "Label list, one per line")->required();
  prompts_cmd->add_option("--out", gen_prompts.out, "Output label-spec file")
      ->required();
  CLI::Option* t_opt =
      prompts_cmd->add_option("--t", gen_prompts.t, "Descriptions per label");
  CLI::Option* n_opt =
      prompts_cmd->add_option("--n", gen_prompts.n, "Prompts per description");
  prompts_cmd->add_option("--llm-config", gen_prompts.gen.llm_config,
                          "Config file with the llm.* section");
  prompts_cmd->add_flag("--offline-fallback",
                        gen_prompts.gen.offline_fallback,
                        "Use the deterministic template generator");
  prompts_cmd->add_option("--seed", gen_prompts.gen.seed,
                          "Exemplar sampling seed");

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train the dual encoder on a manifest");
  train_cmd->add_option("--manifest", train_args.manifest, "Training manifest")
      ->required();
  train_cmd->add_option("--out", train_args.out, "Run directory")->required();
  train_cmd->add_option("--config", train_args.config, "Config file");
  CLI::Option* train_seed_opt = train_cmd->add_option(
      "--seed", train_args.seed, "Overrides model.seed and train.seed");
  train_cmd->add_flag("--force", train_args.force,
                      "Overwrite a non-empty run directory");

  EvalZsacArgs zsac_args;
  CLI::App* zsac_cmd = app.add_subcommand(
      "eval-zsac", "Zero-shot classification against a prompt pool");
  zsac_cmd->add_option("--checkpoint", zsac_args.checkpoint, "Checkpoint file")
      ->required();
  zsac_cmd->add_option("--eval-data", zsac_args.eval_data, "Eval set (JSONL)")
      ->required();
  zsac_cmd->add_option("--label-specs", zsac_args.label_specs,
                       "Label-spec file")->required();
  zsac_cmd->add_option("--out", zsac_args.out, "Run directory")->required();
  zsac_cmd->add_option("--config", zsac_args.config, "Config file");
  CLI::Option* np_opt = zsac_cmd->add_option(
      "--n-prompts", zsac_args.n_prompts, "Prompts pooled per label");
  CLI::Option* zsac_seed_opt =
      zsac_cmd->add_option("--seed", zsac_args.seed, "Prompt sampling seed");
  zsac_cmd->add_flag("--template-only", zsac_args.template_only,
                     "Score with the single hand-written template per label");
  zsac_cmd->add_flag("--force", zsac_args.force,
                     "Overwrite a non-empty run directory");

  EvalRetrievalArgs retrieval_args;
  CLI::App* retrieval_cmd = app.add_subcommand(
      "eval-retrieval", "Audio-text retrieval R@k over a manifest");
  retrieval_cmd->add_option("--checkpoint", retrieval_args.checkpoint,
                            "Checkpoint file")->required();
  retrieval_cmd->add_option("--manifest", retrieval_args.manifest,
                            "Manifest whose pairs are ground truth")
      ->required();
  retrieval_cmd->add_option("--ks", retrieval_args.ks,
                            "Comma-separated k values");
  retrieval_cmd->add_option("--out", retrieval_args.out, "Run directory")
      ->required();
  retrieval_cmd->add_flag("--force", retrieval_args.force,
                          "Overwrite a non-empty run directory");

  SweepArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Grid over n_prompts or p, replicated across seeds");
  sweep_cmd->add_option("--axis", sweep_args.axis, "\"n_prompts\" or \"p\"")
      ->required();
  sweep_cmd->add_option("--values", sweep_args.values,
                        "Comma-separated axis values")->required();
  sweep_cmd->add_option("--seeds", sweep_args.seeds, "Comma-separated seeds");
  sweep_cmd->add_option("--manifest", sweep_args.manifest, "Training manifest")
      ->required();
  sweep_cmd->add_option("--eval-data", sweep_args.eval_data,
                        "Eval set (JSONL)")->required();
  sweep_cmd->add_option("--label-specs", sweep_args.label_specs,
                        "Label-spec file")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "Run directory")->required();
  sweep_cmd->add_option("--config", sweep_args.config, "Config file");
  sweep_cmd->add_flag("--force", sweep_args.force,
                      "Overwrite a non-empty run directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (toy_cmd->parsed()) return run_gen_toy(gen_toy);
    if (rewrites_cmd->parsed()) {
      gen_rewrites.k_given = k_opt->count() > 0;
      return run_gen_rewrites(gen_rewrites);
    }
    if (prompts_cmd->parsed()) {
      gen_prompts.t_given = t_opt->count() > 0;
      gen_prompts.n_given = n_opt->count() > 0;
      return run_gen_prompts(gen_prompts);
    }
    if (train_cmd->parsed()) {
      train_args.seed_given = train_seed_opt->count() > 0;
      return run_train(train_args);
    }
    if (zsac_cmd->parsed()) {
      zsac_args.n_prompts_given = np_opt->count() > 0;
      zsac_args.seed_given = zsac_seed_opt->count() > 0;
      return run_eval_zsac(zsac_args);
    }
    if (retrieval_cmd->parsed()) return run_eval_retrieval(retrieval_args);
    if (sweep_cmd->parsed()) return run_sweep(sweep_args);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 0;
}
