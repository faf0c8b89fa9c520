#include "reclap/toy.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "reclap/rng.hpp"
#include "reclap/tokenizer.hpp"

namespace reclap {

namespace {

const std::vector<std::string> kLabels = {
    "engine", "bell", "rain", "dog", "harp", "thunder", "crowd", "owl"};

const std::vector<std::array<std::string, 4>> kTrainLexicons = {
    {"chugging", "pistons", "rumbling", "mechanical"},
    {"chiming", "metallic", "ringing", "tinkling"},
    {"pattering", "drizzle", "droplets", "showery"},
    {"barking", "growling", "panting", "yelping"},
    {"plucked", "glissando", "strings", "arpeggio"},
    {"rumble", "booming", "crackling", "stormy"},
    {"cheering", "chatter", "applause", "murmuring"},
    {"hooting", "nocturnal", "screeching", "fluttering"},
};

const std::vector<std::array<std::string, 4>> kParaphraseLexicons = {
    {"motorized", "throbbing", "diesel", "industrial"},
    {"clanging", "brassy", "pealing", "jingling"},
    {"sprinkling", "pelting", "misty", "torrential"},
    {"howling", "snarling", "woofing", "whimpering"},
    {"twanging", "harmonic", "lyrical", "strummed"},
    {"thunderous", "grumbling", "explosive", "reverberating"},
    {"clapping", "roaring", "bustling", "hubbub"},
    {"trilling", "haunting", "feathery", "echoing"},
};

std::vector<double> unit_center(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm_sq += x * x;
    }
  } while (norm_sq < 1e-12);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (auto& x : v) x *= inv;
  return v;
}

std::vector<float> noisy_point(const std::vector<double>& center, double sigma,
                               Rng& rng) {
  std::vector<double> v(center.size());
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = center[i] + sigma * rng.normal();
    norm_sq += v[i] * v[i];
  }
  if (norm_sq < 1e-12) {
    throw std::runtime_error("toy sample collapsed to the origin; "
                             "noise_sigma is implausibly large");
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(v[i] * inv);
  }
  return out;
}

// Four rewrite frames over the class's paraphrase lexicon, rotated per
// sample so every paraphrase token circulates through varied contexts. Each
// rewrite keeps the sample's ordinal so captions stay pairwise distinct.
std::vector<std::string> make_rewrites(const std::array<std::string, 4>& para,
                                       std::size_t rotation,
                                       const std::string& ordinal) {
  const auto tok = [&](std::size_t i) { return para[(rotation + i) % 4]; };
  return {
      "A " + tok(0) + " and " + tok(1) + " texture fills recording " +
          ordinal + ".",
      "Recording " + ordinal + " carries a " + tok(2) + " quality with " +
          tok(3) + " undertones.",
      "Soft " + tok(1) + " accents over a " + tok(2) + " wash, take " +
          ordinal + ".",
      "A " + tok(3) + " surge with " + tok(0) + " edges, take " + ordinal +
          ".",
  };
}

LabelSpec lexicon_spec(const std::string& label,
                       const std::array<std::string, 4>& lex) {
  // t = 2 descriptions, n = 3 prompts each: a pool of 6, all built from the
  // given lexicon.
  LabelSpec spec;
  spec.label = label;
  spec.descriptions = {"a " + lex[0] + ", " + lex[1] + " sound",
                       "a " + lex[2] + " tone with " + lex[3]};
  for (std::size_t d = 0; d < spec.descriptions.size(); ++d) {
    const std::string& desc = spec.descriptions[d];
    spec.prompts.push_back({"a recording of " + desc, d});
    spec.prompts.push_back({desc + " can be heard nearby", d});
    spec.prompts.push_back({"this clip captures " + desc, d});
  }
  spec.validate();
  return spec;
}

LabelSpec paraphrase_spec(const std::string& label,
                          const std::array<std::string, 4>& para) {
  // t = 3 descriptions, n = 2 prompts each. The third description is a
  // deliberately uninformative phrase shared by every class: sampling it
  // dilutes the pooled embedding, which is what gives the prompt-count
  // sweep its interior peak.
  LabelSpec spec;
  spec.label = label;
  spec.descriptions = {"a " + para[0] + ", " + para[1] + " sound",
                       "a " + para[2] + " tone with " + para[3],
                       "a faint, distant noise in the background"};
  const std::string& d0 = spec.descriptions[0];
  const std::string& d1 = spec.descriptions[1];
  const std::string& d2 = spec.descriptions[2];
  spec.prompts.push_back({"a recording of " + d0, 0});
  spec.prompts.push_back({d0 + " can be heard nearby", 0});
  spec.prompts.push_back({"this clip captures " + d1, 1});
  spec.prompts.push_back({d1 + " rings out", 1});
  spec.prompts.push_back({"somewhere far off, " + d2 + " lingers", 2});
  spec.prompts.push_back({d2 + " persists", 2});
  spec.validate();
  return spec;
}

}  // namespace

ToySpec::ToySpec()
    : labels(kLabels),
      train_lexicons(kTrainLexicons),
      paraphrase_lexicons(kParaphraseLexicons) {}

void ToySpec::validate() const {
  if (n_classes < 2) {
    throw std::runtime_error("ToySpec: need at least 2 classes");
  }
  if (n_classes > labels.size() || n_classes > train_lexicons.size() ||
      n_classes > paraphrase_lexicons.size()) {
    throw std::runtime_error(
        "ToySpec: n_classes exceeds the provided labels/lexicons");
  }
  if (samples_per_class < 1 || eval_per_class < 1 || feature_dim < 2) {
    throw std::runtime_error("ToySpec: degenerate sizes");
  }
  if (!(noise_sigma >= 0.0)) {
    throw std::runtime_error("ToySpec: noise_sigma must be >= 0");
  }

  // Every descriptor token must be globally unique and must not leak a
  // class name; paraphrase tokens must be held out of the training side.
  std::set<std::string> seen;
  std::set<std::string> label_words;
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (const auto& word : split_words(labels[c])) label_words.insert(word);
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (const auto* lexicon : {&train_lexicons[c], &paraphrase_lexicons[c]}) {
      for (const std::string& token : *lexicon) {
        if (split_words(token).size() != 1) {
          throw std::runtime_error("ToySpec: lexicon token \"" + token +
                                   "\" must be a single word");
        }
        if (label_words.count(token) != 0) {
          throw std::runtime_error("ToySpec: lexicon token \"" + token +
                                   "\" collides with a class name");
        }
        if (!seen.insert(token).second) {
          throw std::runtime_error(
              "ToySpec: lexicons are not disjoint; token \"" + token +
              "\" appears twice");
        }
      }
    }
  }
}

ToyDataset generate_toy_dataset(const ToySpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  ToyDataset data;
  data.labels.assign(spec.labels.begin(), spec.labels.begin() +
                                              static_cast<std::ptrdiff_t>(
                                                  spec.n_classes));
  data.centers = Tensor2D(spec.n_classes, spec.feature_dim);

  std::vector<std::vector<double>> centers(spec.n_classes);
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    centers[c] = unit_center(spec.feature_dim, rng);
    for (std::size_t i = 0; i < spec.feature_dim; ++i) {
      data.centers.at(c, i) = centers[c][i];
    }
  }

  std::size_t ordinal = 0;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    const auto& lex = spec.train_lexicons[c];
    const auto& para = spec.paraphrase_lexicons[c];
    for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++ordinal) {
      SampleRecord record;
      record.id = data.labels[c] + "_" + std::to_string(s);
      record.features = noisy_point(centers[c], spec.noise_sigma, rng);

      const std::size_t a = rng.index(4);
      const std::size_t b = (a + 1 + rng.index(3)) % 4;
      const std::string ord = std::to_string(ordinal);
      record.caption = "the sound of " + lex[a] + " and " + lex[b] +
                       ", recording " + ord;
      record.rewrites = make_rewrites(para, s, ord);
      data.train.push_back(std::move(record));
    }
  }

  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    for (std::size_t e = 0; e < spec.eval_per_class; ++e) {
      EvalRecord record;
      record.id = "eval_" + data.labels[c] + "_" + std::to_string(e);
      record.features = noisy_point(centers[c], spec.noise_sigma, rng);
      record.label_index = static_cast<std::int64_t>(c);
      data.eval.push_back(std::move(record));
    }
  }

  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    data.train_lexicon_specs.push_back(
        lexicon_spec(data.labels[c], spec.train_lexicons[c]));
    data.paraphrase_specs.push_back(
        paraphrase_spec(data.labels[c], spec.paraphrase_lexicons[c]));
  }
  return data;
}

}  // namespace reclap
