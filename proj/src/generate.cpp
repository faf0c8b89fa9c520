#include "reclap/generate.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "reclap/tokenizer.hpp"

namespace reclap {

namespace {

using nlohmann::json;

constexpr const char* kRewriteSystem =
    "You rewrite captions of sounds, keeping every sound source but varying "
    "sentence structure and vocabulary. Reply with a numbered list only.";
constexpr const char* kDescribeSystem =
    "You describe the acoustic character of sound categories in short "
    "phrases. Reply with a numbered list only.";
constexpr const char* kSceneSystem =
    "You write one-sentence audio scene captions. Reply with a numbered "
    "list only.";

// Fixed-order prefixes for the offline rewrites; beyond six, a take suffix
// keeps them distinct.
constexpr const char* kFallbackPrefixes[] = {
    "A low, steady rendition of: ",
    "Rapid bursts of: ",
    "A distant, echoing take on: ",
    "A close, crisp recording of: ",
    "A muffled, low-fidelity version of: ",
    "A bright, resonant variation on: ",
};
constexpr std::size_t kFallbackPrefixCount =
    sizeof(kFallbackPrefixes) / sizeof(kFallbackPrefixes[0]);

void require_nonempty(const std::string& value, const char* what) {
  if (value.empty()) {
    throw std::invalid_argument(std::string("generate: ") + what +
                                " must not be empty");
  }
}

void require_count(std::size_t count, const char* what) {
  if (count == 0) {
    throw std::invalid_argument(std::string("generate: ") + what +
                                " must be at least 1");
  }
}

// True when the candidate keeps at least one content token of the source,
// or the source has none to keep.
bool preserves_content(const std::string& source,
                       const std::string& candidate) {
  std::vector<std::string> source_tokens = content_words(source);
  if (source_tokens.empty()) {
    return !tokenize(candidate, 2).empty();
  }
  std::vector<std::string> candidate_tokens = content_words(candidate);
  for (const std::string& token : source_tokens) {
    if (std::find(candidate_tokens.begin(), candidate_tokens.end(), token) !=
        candidate_tokens.end()) {
      return true;
    }
  }
  return false;
}

// True when the candidate contains the description verbatim or carries all
// of its content tokens.
bool covers_description(const std::string& description,
                        const std::string& candidate) {
  if (candidate.find(description) != std::string::npos) {
    return true;
  }
  std::vector<std::string> wanted = content_words(description);
  std::vector<std::string> have = content_words(candidate);
  for (const std::string& token : wanted) {
    if (std::find(have.begin(), have.end(), token) == have.end()) {
      return false;
    }
  }
  return !wanted.empty();
}

}  // namespace

void InContextBank::validate() const {
  if (sample_size == 0) {
    throw std::invalid_argument("bank: sample size must be at least 1");
  }
  if (pairs.size() < sample_size) {
    throw std::invalid_argument(
        "bank: " + std::to_string(pairs.size()) +
        " exemplar pairs cannot cover a sample of " +
        std::to_string(sample_size));
  }
  for (const auto& [original, rewrite] : pairs) {
    if (original.empty() || rewrite.empty()) {
      throw std::invalid_argument("bank: exemplar strings must be non-empty");
    }
  }
}

std::vector<std::pair<std::string, std::string>> InContextBank::sample(
    Rng& rng) const {
  validate();
  std::vector<std::size_t> picks =
      rng.sample_without_replacement(pairs.size(), sample_size);
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(picks.size());
  for (std::size_t pick : picks) out.push_back(pairs[pick]);
  return out;
}

InContextBank InContextBank::builtin() {
  InContextBank bank;
  bank.pairs = {
      {"a dog barks in the yard",
       "Sharp canine yaps ring out across the yard"},
      {"rain falls on a tin roof",
       "A metallic patter of raindrops drums overhead"},
      {"a church bell tolls at noon",
       "Deep bronze peals mark the midday hour"},
      {"an engine idles outside",
       "A motor mutters and throbs at the curb"},
      {"waves crash on the shore",
       "Surf thunders and hisses against the sand"},
      {"a crowd cheers at the stadium",
       "A roaring swell of voices erupts from the stands"},
      {"wind whistles through the trees",
       "Branches sigh under a thin whistling gale"},
      {"a kettle whistles on the stove",
       "A rising steam shriek pierces the kitchen"},
      {"someone knocks on a wooden door",
       "Three blunt raps land on the wooden door"},
      {"a cat purrs on the couch",
       "A feline rumble vibrates softly from the cushions"},
      {"thunder rumbles in the distance",
       "A far-off storm growls across the sky"},
      {"a violin plays a slow melody",
       "Long mournful bow strokes trace a slow tune"},
      {"footsteps echo in the hallway",
       "Hard heels click and reverberate down the corridor"},
      {"a baby laughs loudly",
       "Bright infant giggles burst out in peals"},
      {"a truck reverses with a beeping alarm",
       "A warning beeper pulses as the truck backs up"},
      {"birds chirp at dawn",
       "A twittering chorus of songbirds greets first light"},
      {"a helicopter hovers overhead",
       "Rotor blades chop the air directly above"},
      {"glass shatters on the floor",
       "A brittle crash scatters glass across the tiles"},
      {"a stream gurgles over rocks",
       "Water burbles and chatters through a rocky bed"},
      {"an owl hoots at night",
       "Low nocturnal hoots drift through the dark"},
      {"a train passes a level crossing",
       "Clattering wheels and a horn blast sweep past the crossing"},
      {"someone types on a keyboard",
       "A rapid plastic clatter of keystrokes continues"},
      {"a horse trots on cobblestones",
       "Hooves clip-clop in rhythm over the cobbles"},
      {"fireworks explode in the sky",
       "Aerial shells boom and crackle high above"},
      {"a phone rings in another room",
       "A muffled ringtone repeats behind the wall"},
      {"bees buzz around a hive",
       "A dense insect hum swirls near the hive"},
      {"a saw cuts through wood",
       "Toothed metal rasps back and forth through a plank"},
      {"children play in a park",
       "Squeals and laughter of children fill the playground"},
      {"a faucet drips into a sink",
       "Slow water drops plink into the basin"},
      {"a motorcycle accelerates away",
       "A two-wheeled engine snarls and fades into the distance"},
      {"applause fills the theater",
       "Clapping hands swell into a sustained ovation"},
      {"a flute plays a bright tune",
       "Airy flute notes skip through a cheerful melody"},
      {"paper tears slowly",
       "Fibers rip apart in one long slow tear"},
      {"a rooster crows at sunrise",
       "A hoarse cock-a-doodle-doo announces the morning"},
      {"sirens wail in the city",
       "Emergency sirens rise and fall between the buildings"},
      {"a fireplace crackles softly",
       "Burning logs pop and hiss in the hearth"},
      {"a drummer plays a fast beat",
       "Sticks rattle out a quick pattern on the drum kit"},
      {"a door creaks open",
       "Rusty hinges groan as the door swings wide"},
      {"a plane takes off from the runway",
       "Jet engines roar and climb away from the tarmac"},
      {"frogs croak near the pond",
       "A throaty amphibian chorus rises from the water's edge"},
      {"a zipper closes on a jacket",
       "Interlocking teeth zip shut in one quick pull"},
      {"a basketball bounces on the court",
       "A rubber ball thumps steadily against the hardwood"},
      {"wind chimes tinkle on the porch",
       "Light metal tubes clink together in the breeze"},
      {"a printer feeds a page",
       "Rollers whir as a sheet shuffles through the printer"},
      {"a cow moos in the field",
       "A long bovine low carries across the pasture"},
      {"ice cubes clink in a glass",
       "Frozen cubes knock and ring against the tumbler"},
      {"a skateboard rolls over pavement",
       "Urethane wheels grind along the concrete"},
      {"a harmonica plays the blues",
       "Reedy bent notes wheeze out a blues line"},
      {"a vacuum cleaner runs in the hall",
       "A droning suction motor sweeps back and forth"},
      {"a clock ticks in a quiet room",
       "A lone mechanical tick marks each second"},
  };
  return bank;
}

InContextBank load_bank(const std::string& path) {
  InContextBank bank;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("bank: cannot open " + path);
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string line = text.substr(
        start, end == std::string::npos ? std::string::npos : end - start);
    start = end == std::string::npos ? text.size() + 1 : end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(line_number) +
                               ": malformed document: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("original") ||
        !doc["original"].is_string() || !doc.contains("rewrite") ||
        !doc["rewrite"].is_string()) {
      throw std::runtime_error(path + " line " + std::to_string(line_number) +
                               ": expected {\"original\", \"rewrite\"}");
    }
    bank.pairs.emplace_back(doc["original"].get<std::string>(),
                            doc["rewrite"].get<std::string>());
  }
  bank.validate();
  return bank;
}

void save_bank(const InContextBank& bank, const std::string& path) {
  bank.validate();
  std::string out;
  for (const auto& [original, rewrite] : bank.pairs) {
    json doc{{"original", original}, {"rewrite", rewrite}};
    out += doc.dump() + "\n";
  }
  write_file_locked(path, out);
}

std::vector<std::string> FallbackGenerator::rewrite_captions(
    const std::string& caption, std::size_t k) {
  require_nonempty(caption, "caption");
  std::vector<std::string> rewrites;
  rewrites.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::string text =
        std::string(kFallbackPrefixes[i % kFallbackPrefixCount]) + caption;
    if (i >= kFallbackPrefixCount) {
      text += " (take " + std::to_string(i / kFallbackPrefixCount + 1) + ")";
    }
    rewrites.push_back(std::move(text));
  }
  return rewrites;
}

std::vector<std::string> FallbackGenerator::describe_label(
    const std::string& label, std::size_t t) {
  require_nonempty(label, "label");
  require_count(t, "t");
  std::vector<std::string> descriptions;
  descriptions.reserve(t);
  for (std::size_t i = 1; i <= t; ++i) {
    descriptions.push_back("the characteristic sound of " + label +
                           ", variant " + std::to_string(i));
  }
  return descriptions;
}

std::vector<std::string> FallbackGenerator::scene_prompts(
    const std::string& label, const std::string& description, std::size_t n) {
  require_nonempty(label, "label");
  require_nonempty(description, "description");
  require_count(n, "n");
  std::vector<std::string> prompts;
  prompts.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    prompts.push_back("In scene " + std::to_string(i) + ", " + description +
                      " of a " + label + " is heard.");
  }
  return prompts;
}

std::vector<std::string> parse_numbered_list(const std::string& text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string line = text.substr(
        start, end == std::string::npos ? std::string::npos : end - start);
    start = end == std::string::npos ? text.size() + 1 : end + 1;

    // Trim both ends.
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::size_t last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    // Strip a "1." / "1)" / "-" / "*" marker.
    std::size_t cursor = 0;
    while (cursor < line.size() && line[cursor] >= '0' &&
           line[cursor] <= '9') {
      ++cursor;
    }
    if (cursor > 0 && cursor < line.size() &&
        (line[cursor] == '.' || line[cursor] == ')')) {
      ++cursor;
    } else if (!line.empty() && (line[0] == '-' || line[0] == '*')) {
      cursor = 1;
    } else {
      throw std::runtime_error(
          "llm: cannot parse list item \"" + line +
          "\"; expected a numbered or bulleted list");
    }
    while (cursor < line.size() && (line[cursor] == ' ' ||
                                    line[cursor] == '\t')) {
      ++cursor;
    }
    if (cursor >= line.size()) {
      throw std::runtime_error("llm: empty list item in response");
    }
    items.push_back(line.substr(cursor));
  }
  if (items.empty()) {
    throw std::runtime_error("llm: response contained no list items");
  }
  return items;
}

LlmGenerator::LlmGenerator(LlmClient& client, InContextBank bank,
                           std::uint64_t seed)
    : client_(client), bank_(std::move(bank)), rng_(seed) {
  bank_.validate();
}

std::vector<std::string> LlmGenerator::rewrite_captions(
    const std::string& caption, std::size_t k) {
  require_nonempty(caption, "caption");
  if (k == 0) return {};

  std::vector<std::string> valid;
  std::set<std::string> seen;
  const std::size_t budget = 2 * k;
  std::size_t calls = 0;
  while (valid.size() < k && calls < budget) {
    std::string user = "Examples of good rewrites:\n";
    for (const auto& [original, rewrite] : bank_.sample(rng_)) {
      user += "Original: " + original + "\nRewrite: " + rewrite + "\n";
    }
    user += "\nWrite " + std::to_string(k - valid.size()) +
            " distinct rewrites of this caption:\n" + caption;
    ++calls;
    std::string response = client_.complete(kRewriteSystem, user);
    std::vector<std::string> candidates;
    try {
      candidates = parse_numbered_list(response);
    } catch (const std::exception&) {
      continue;  // unparseable response burns one attempt
    }
    for (const std::string& candidate : candidates) {
      if (valid.size() >= k) break;
      if (!preserves_content(caption, candidate)) continue;
      if (!seen.insert(normalize_text(candidate)).second) continue;
      valid.push_back(candidate);
    }
  }
  if (valid.size() < k) {
    throw std::runtime_error(
        "llm: only " + std::to_string(valid.size()) + " of " +
        std::to_string(k) + " valid rewrites for caption \"" + caption +
        "\" after " + std::to_string(calls) + " attempts");
  }
  return valid;
}

std::vector<std::string> LlmGenerator::describe_label(
    const std::string& label, std::size_t t) {
  require_nonempty(label, "label");
  require_count(t, "t");

  std::vector<std::string> valid;
  std::set<std::string> seen;
  const std::size_t budget = 2 * t;
  std::size_t calls = 0;
  while (valid.size() < t && calls < budget) {
    std::string user = "Describe the sound of \"" + label + "\" in " +
                       std::to_string(t - valid.size()) +
                       " distinct ways, each a short phrase about its "
                       "acoustic character.";
    ++calls;
    std::string response = client_.complete(kDescribeSystem, user);
    std::vector<std::string> candidates;
    try {
      candidates = parse_numbered_list(response);
    } catch (const std::exception&) {
      continue;
    }
    for (const std::string& candidate : candidates) {
      if (valid.size() >= t) break;
      if (tokenize(candidate, 2).empty()) continue;
      if (!seen.insert(normalize_text(candidate)).second) continue;
      valid.push_back(candidate);
    }
  }
  if (valid.size() < t) {
    throw std::runtime_error("llm: descriptions for label \"" + label +
                             "\" collapsed to " +
                             std::to_string(valid.size()) + " distinct of " +
                             std::to_string(t) + " requested after " +
                             std::to_string(calls) + " attempts");
  }
  return valid;
}

std::vector<std::string> LlmGenerator::scene_prompts(
    const std::string& label, const std::string& description, std::size_t n) {
  require_nonempty(label, "label");
  require_nonempty(description, "description");
  require_count(n, "n");

  std::vector<std::string> valid;
  std::set<std::string> seen;
  const std::size_t budget = 2 * n;
  std::size_t calls = 0;
  while (valid.size() < n && calls < budget) {
    std::string user = "Write " + std::to_string(n - valid.size()) +
                       " distinct scene captions in which " + description +
                       " of a " + label +
                       " is heard. Every caption must contain the phrase \"" +
                       description + "\".";
    ++calls;
    std::string response = client_.complete(kSceneSystem, user);
    std::vector<std::string> candidates;
    try {
      candidates = parse_numbered_list(response);
    } catch (const std::exception&) {
      continue;
    }
    for (const std::string& candidate : candidates) {
      if (valid.size() >= n) break;
      if (!covers_description(description, candidate)) continue;
      if (!seen.insert(normalize_text(candidate)).second) continue;
      valid.push_back(candidate);
    }
  }
  if (valid.size() < n) {
    throw std::runtime_error(
        "llm: only " + std::to_string(valid.size()) + " of " +
        std::to_string(n) + " valid scene captions for \"" + description +
        "\" after " + std::to_string(calls) + " attempts");
  }
  return valid;
}

LabelSpec build_label_spec(CaptionGenerator& generator,
                           const std::string& label, std::size_t t,
                           std::size_t n) {
  require_count(t, "t");
  require_count(n, "n");

  LabelSpec spec;
  spec.label = label;
  spec.descriptions = generator.describe_label(label, t);

  std::set<std::string> seen;
  for (std::size_t d = 0; d < spec.descriptions.size(); ++d) {
    std::size_t kept = 0;
    // A prompt that collides with an earlier description's pool gets one
    // regeneration round; deterministic generators never collide because
    // their prompts embed the (distinct) descriptions.
    for (std::size_t round = 0; round < 3 && kept < n; ++round) {
      std::vector<std::string> scenes =
          generator.scene_prompts(label, spec.descriptions[d], n);
      for (const std::string& scene : scenes) {
        if (kept >= n) break;
        if (!seen.insert(normalize_text(scene)).second) continue;
        spec.prompts.push_back(PromptEntry{scene, d});
        ++kept;
      }
    }
    if (kept < n) {
      throw std::runtime_error(
          "llm: could not assemble " + std::to_string(n) +
          " distinct prompts for label \"" + label + "\", description \"" +
          spec.descriptions[d] + "\"");
    }
  }
  spec.validate();
  return spec;
}

RewriteOutcome rewrite_manifest(std::vector<SampleRecord>& records,
                                CaptionGenerator& generator, std::size_t k) {
  RewriteOutcome outcome;
  for (SampleRecord& record : records) {
    try {
      record.rewrites = generator.rewrite_captions(record.caption, k);
      ++outcome.rewritten;
    } catch (const std::exception& e) {
      outcome.failures.push_back(RewriteFailure{record.id, e.what()});
    }
  }
  return outcome;
}

}  // namespace reclap
