// Command-line front end: every library module exposed as a subcommand
// with uniform CSV/JSON output, explicit seeds and reproducible runs.
//
// When --out is given, outputs land in files and a <out>.manifest.json
// is written beside them recording the subcommand, the full effective
// parameter list, the seed and an FNV-1a digest per output file.
// Re-invoking the binary with the manifest's argument list reproduces
// every output byte for byte.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nextscale/costmodel.hpp"
#include "nextscale/engine.hpp"
#include "nextscale/grpo.hpp"
#include "nextscale/loss.hpp"
#include "nextscale/packer.hpp"
#include "nextscale/position.hpp"
#include "nextscale/quantizer.hpp"
#include "nextscale/rng.hpp"
#include "nextscale/schedule.hpp"
#include "nextscale/sequence.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace nextscale;

constexpr const char* kArtifactVersion = "1.0.0";

// Bad parameter values detected after CLI11 parsing; mapped to the
// usage exit code (2) rather than the runtime one (1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Shortest decimal that parses back to the same double; used when
// echoing parameters into the manifest.
std::string fmt_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex_digest(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void check_format(const std::string& format, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (format == a) return;
  }
  std::string msg = "unsupported --format '" + format + "' (expected";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw UsageError(msg + ")");
}

int check_level(int level) {
  if (level != 256 && level != 512 && level != 1024) {
    throw UsageError("--level must be 256, 512 or 1024");
  }
  return level;
}

std::pair<int, int> parse_grid(const std::string& text) {
  std::size_t x = text.find('x');
  if (x == std::string::npos) x = text.find('X');
  if (x == std::string::npos || x == 0 || x + 1 >= text.size()) {
    throw UsageError("--grid expects HxW, e.g. 16x16");
  }
  int h = 0;
  int w = 0;
  try {
    std::size_t used = 0;
    h = std::stoi(text.substr(0, x), &used);
    if (used != x) throw UsageError("");
    std::string rest = text.substr(x + 1);
    w = std::stoi(rest, &used);
    if (used != rest.size()) throw UsageError("");
  } catch (const std::exception&) {
    throw UsageError("--grid expects HxW with integer sides, e.g. 16x16");
  }
  if (h < 1 || w < 1) throw UsageError("--grid sides must be positive");
  return {h, w};
}

// NEXTSCALE_SEED overrides --seed when set, so batch environments can
// re-seed a pipeline without editing every invocation.
std::uint64_t resolve_seed(std::uint64_t flag_seed) {
  const char* env = std::getenv("NEXTSCALE_SEED");
  if (env == nullptr || *env == '\0') return flag_seed;
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw UsageError("");
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw UsageError("NEXTSCALE_SEED must be an unsigned integer");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Outputs {
  std::string stdout_text;                                // no --out: printed
  std::vector<std::pair<std::string, std::string>> files; // --out: (path, bytes)
};

// Writes files plus the manifest, or prints to stdout when no file
// outputs were requested.
void emit(const Outputs& outputs, const std::string& subcommand,
          const std::vector<std::string>& argv,
          std::optional<std::uint64_t> seed) {
  if (outputs.files.empty()) {
    std::cout << outputs.stdout_text;
    return;
  }
  json manifest;
  manifest["artifact"] = "nextscale";
  manifest["version"] = kArtifactVersion;
  manifest["subcommand"] = subcommand;
  manifest["arguments"] = argv;
  if (seed.has_value()) {
    manifest["seed"] = *seed;
  } else {
    manifest["seed"] = nullptr;
  }
  json digests = json::array();
  for (const auto& [path, bytes] : outputs.files) {
    std::ofstream out(path, std::ios::binary);
    if (!out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
      throw std::runtime_error("cannot write " + path);
    }
    digests.push_back({{"path", path},
                       {"bytes", bytes.size()},
                       {"fnv1a64", hex_digest(fnv1a64(bytes.data(), bytes.size()))}});
  }
  manifest["outputs"] = digests;
  std::string manifest_path = outputs.files.front().first + ".manifest.json";
  std::ofstream out(manifest_path, std::ios::binary);
  std::string body = manifest.dump(2) + "\n";
  if (!out.write(body.data(), static_cast<std::streamsize>(body.size()))) {
    throw std::runtime_error("cannot write " + manifest_path);
  }
}

// ---------------------------------------------------------------- schedule

struct ScheduleDumpArgs {
  double ratio = 1.0;
  int level = 1024;
  std::string format = "csv";
  std::string out;
};

void run_schedule_dump(const ScheduleDumpArgs& a) {
  check_format(a.format, {"csv", "json"});
  const auto sched = schedule::truncate_for_level(
      schedule::select_schedule(a.ratio), check_level(a.level));

  std::string text;
  if (a.format == "csv") {
    text = "k,h,w,tokens,cumulative_tokens\n";
    long long cum = 0;
    for (std::size_t k = 0; k < sched.steps.size(); ++k) {
      cum += sched.steps[k].area();
      text += std::to_string(k + 1) + "," + std::to_string(sched.steps[k].h) + "," +
              std::to_string(sched.steps[k].w) + "," +
              std::to_string(sched.steps[k].area()) + "," + std::to_string(cum) + "\n";
    }
  } else {
    json doc;
    doc["ratio"] = sched.aspect_ratio;
    doc["label"] = sched.label();
    doc["level"] = a.level;
    doc["pixels_h"] = sched.pixels_h;
    doc["pixels_w"] = sched.pixels_w;
    json steps = json::array();
    long long cum = 0;
    for (std::size_t k = 0; k < sched.steps.size(); ++k) {
      cum += sched.steps[k].area();
      steps.push_back({{"k", k + 1},
                       {"h", sched.steps[k].h},
                       {"w", sched.steps[k].w},
                       {"tokens", sched.steps[k].area()},
                       {"cumulative_tokens", cum}});
    }
    doc["steps"] = std::move(steps);
    doc["total_tokens"] = cum;
    text = doc.dump(2) + "\n";
  }

  Outputs outputs;
  if (a.out.empty()) {
    outputs.stdout_text = std::move(text);
  } else {
    outputs.files.emplace_back(a.out, std::move(text));
  }
  emit(outputs, "schedule dump",
       {"schedule", "dump", "--ratio", fmt_exact(a.ratio), "--level",
        std::to_string(a.level), "--format", a.format, "--out", a.out},
       std::nullopt);
}

struct ScheduleValidateArgs {
  std::string format = "csv";
  std::string out;
};

void run_schedule_validate(const ScheduleValidateArgs& a) {
  check_format(a.format, {"csv", "json"});

  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  for (const auto& sched : schedule::builtin_schedules()) {
    auto report = schedule::validate(sched);
    for (const auto& v : report.violations) violations.push_back(sched.label() + ": " + v);
    for (const auto& w : report.warnings) warnings.push_back(sched.label() + ": " + w);
  }
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
    throw std::runtime_error("schedule validation failed");
  }

  const auto cross = schedule::cross_schedule_report();
  std::string text;
  if (a.format == "csv") {
    text = "scale,min_area,max_area,rel_spread\n";
    for (const auto& s : cross.spreads) {
      text += std::to_string(s.scale) + "," + std::to_string(s.min_area) + "," +
              std::to_string(s.max_area) + "," + fmt(s.rel_spread) + "\n";
    }
  } else {
    json doc;
    doc["schedule_count"] = schedule::builtin_schedules().size();
    doc["violations"] = violations;
    doc["warnings"] = warnings;
    json spreads = json::array();
    for (const auto& s : cross.spreads) {
      spreads.push_back({{"scale", s.scale},
                         {"min_area", s.min_area},
                         {"max_area", s.max_area},
                         {"rel_spread", s.rel_spread}});
    }
    doc["spreads"] = std::move(spreads);
    doc["max_rel_spread"] = cross.max_rel_spread;
    text = doc.dump(2) + "\n";
  }

  Outputs outputs;
  if (a.out.empty()) {
    outputs.stdout_text = std::move(text);
  } else {
    outputs.files.emplace_back(a.out, std::move(text));
  }
  emit(outputs, "schedule validate",
       {"schedule", "validate", "--format", a.format, "--out", a.out}, std::nullopt);
}

// ---------------------------------------------------------------- position

struct PositionDumpArgs {
  std::string grid;
  double scale = 0.0;
  double range = position::kDefaultRange;
  std::string format = "csv";
  std::string out;
};

void run_position_dump(const PositionDumpArgs& a) {
  check_format(a.format, {"csv", "json"});
  auto [h, w] = parse_grid(a.grid);
  auto triples = position::vision_positions(h, w, a.scale, a.range);

  std::string text;
  if (a.format == "csv") {
    text = "i,j,p_x,p_y,p_s\n";
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const auto& t = triples[static_cast<std::size_t>(i) * w + j];
        text += std::to_string(i) + "," + std::to_string(j) + "," + fmt(t.x) + "," +
                fmt(t.y) + "," + fmt(t.s) + "\n";
      }
    }
  } else {
    json doc;
    doc["h"] = h;
    doc["w"] = w;
    doc["scale"] = a.scale;
    doc["range"] = a.range;
    json rows = json::array();
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const auto& t = triples[static_cast<std::size_t>(i) * w + j];
        rows.push_back({{"i", i}, {"j", j}, {"p_x", t.x}, {"p_y", t.y}, {"p_s", t.s}});
      }
    }
    doc["positions"] = std::move(rows);
    text = doc.dump(2) + "\n";
  }

  Outputs outputs;
  if (a.out.empty()) {
    outputs.stdout_text = std::move(text);
  } else {
    outputs.files.emplace_back(a.out, std::move(text));
  }
  emit(outputs, "position dump",
       {"position", "dump", "--grid", a.grid, "--scale", fmt_exact(a.scale),
        "--range", fmt_exact(a.range), "--format", a.format, "--out", a.out},
       std::nullopt);
}

// ---------------------------------------------------------------- quantize

struct QuantizeRoundtripArgs {
  std::string grid;
  int codebook = 256;
  int scales = 6;
  int sem_dim = 8;
  int pix_dim = 8;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
};

// Linear ramp from 1x1 to the target grid over `scales` steps, the
// stand-in schedule for arbitrary grids.
schedule::ScaleSchedule ramp_schedule(int h, int w, int scales) {
  schedule::ScaleSchedule sched;
  sched.pixels_h = 16 * h;
  sched.pixels_w = 16 * w;
  for (int t = 0; t < scales; ++t) {
    double frac = scales > 1 ? static_cast<double>(t) / (scales - 1) : 1.0;
    int gh = static_cast<int>(std::lround(1.0 + (h - 1) * frac));
    int gw = static_cast<int>(std::lround(1.0 + (w - 1) * frac));
    sched.steps.push_back({gh, gw});
  }
  return sched;
}

void run_quantize_roundtrip(const QuantizeRoundtripArgs& a) {
  check_format(a.format, {"csv", "json"});
  auto [h, w] = parse_grid(a.grid);
  if (a.codebook < 1) throw UsageError("--codebook must be positive");
  if (a.scales < 1) throw UsageError("--scales must be positive");
  if (a.sem_dim < 1 || a.pix_dim < 1) throw UsageError("feature dims must be positive");
  std::uint64_t seed = resolve_seed(a.seed);

  auto sched = ramp_schedule(h, w, a.scales);
  auto cb = quant::CodebookPair::seeded(a.codebook, a.sem_dim, a.pix_dim, seed);
  quant::FeatureMap features(h, w, a.pix_dim);
  Rng feature_rng(mix64(seed + 1));
  for (auto& v : features.values) v = feature_rng.next_gaussian();

  auto codes = quant::encode_multiscale(features, sched, cb);

  // Reconstruction error after each scale prefix.
  std::vector<double> errors;
  quant::MultiScaleCodes prefix;
  for (const auto& grid : codes.scales) {
    prefix.scales.push_back(grid);
    auto rec = quant::decode_multiscale(prefix, cb, h, w);
    double sq = 0.0;
    for (std::size_t i = 0; i < rec.values.size(); ++i) {
      double d = rec.values[i] - features.values[i];
      sq += d * d;
    }
    errors.push_back(std::sqrt(sq / static_cast<double>(rec.values.size())));
  }

  std::string text;
  if (a.format == "csv") {
    text = "scale,h,w,rms_error\n";
    for (std::size_t k = 0; k < errors.size(); ++k) {
      text += std::to_string(k + 1) + "," + std::to_string(sched.steps[k].h) + "," +
              std::to_string(sched.steps[k].w) + "," + fmt(errors[k]) + "\n";
    }
  } else {
    json doc;
    doc["grid"] = {{"h", h}, {"w", w}};
    doc["codebook"] = a.codebook;
    doc["sem_dim"] = a.sem_dim;
    doc["pix_dim"] = a.pix_dim;
    doc["seed"] = seed;
    json rows = json::array();
    for (std::size_t k = 0; k < errors.size(); ++k) {
      rows.push_back({{"scale", k + 1},
                      {"h", sched.steps[k].h},
                      {"w", sched.steps[k].w},
                      {"rms_error", errors[k]}});
    }
    doc["per_scale"] = std::move(rows);
    text = doc.dump(2) + "\n";
  }

  Outputs outputs;
  if (a.out.empty()) {
    outputs.stdout_text = std::move(text);
  } else {
    outputs.files.emplace_back(a.out, std::move(text));
  }
  emit(outputs, "quantize roundtrip",
       {"quantize", "roundtrip", "--grid", a.grid, "--codebook",
        std::to_string(a.codebook), "--scales", std::to_string(a.scales),
        "--sem-dim", std::to_string(a.sem_dim), "--pix-dim",
        std::to_string(a.pix_dim), "--seed", std::to_string(seed), "--format",
        a.format, "--out", a.out},
       seed);
}

// -------------------------------------------------------------------- loss

struct LossWeightsArgs {
  double ratio = 1.0;
  int level = 1024;
  double alpha = 0.9;
  std::string format = "csv";
  std::string out;
};

void run_loss_weights(const LossWeightsArgs& a) {
  check_format(a.format, {"csv", "json"});
  const auto sched = schedule::truncate_for_level(
      schedule::select_schedule(a.ratio), check_level(a.level));
  const auto weights = loss::scale_weights(sched, a.alpha);

  std::string text;
  if (a.format == "csv") {
    text = "scale,h,w,raw,normalized\n";
    for (std::size_t k = 0; k < sched.steps.size(); ++k) {
      text += std::to_string(k + 1) + "," + std::to_string(sched.steps[k].h) + "," +
              std::to_string(sched.steps[k].w) + "," + fmt(weights.raw[k]) + "," +
              fmt(weights.normalized[k]) + "\n";
    }
  } else {
    json doc;
    doc["ratio"] = sched.aspect_ratio;
    doc["level"] = a.level;
    doc["alpha"] = a.alpha;
    json rows = json::array();
    for (std::size_t k = 0; k < sched.steps.size(); ++k) {
      rows.push_back({{"scale", k + 1},
                      {"h", sched.steps[k].h},
                      {"w", sched.steps[k].w},
                      {"raw", weights.raw[k]},
                      {"normalized", weights.normalized[k]}});
    }
    doc["weights"] = std::move(rows);
    text = doc.dump(2) + "\n";
  }

  Outputs outputs;
  if (a.out.empty()) {
    outputs.stdout_text = std::move(text);
  } else {
    outputs.files.emplace_back(a.out, std::move(text));
  }
  emit(outputs, "loss weights",
       {"loss", "weights", "--ratio", fmt_exact(a.ratio), "--level",
        std::to_string(a.level), "--alpha", fmt_exact(a.alpha), "--format",
        a.format, "--out", a.out},
       std::nullopt);
}

// -------------------------------------------------------------------- grpo

struct GrpoStepArgs {
  std::string group_file;
  double epsilon = 0.2;
  double beta = 0.0;
  int prefix = 0;  // 0 = all scales
  bool kl_full_range = false;
  std::string format = "json";
  std::string out;
};

std::vector<std::vector<double>> read_matrix(const json& doc, const char* key) {
  if (!doc.contains(key)) throw std::runtime_error(std::string("missing key ") + key);
  return doc.at(key).get<std::vector<std::vector<double>>>();
}

void run_grpo_step(const GrpoStepArgs& a) {
  check_format(a.format, {"csv", "json"});
  json doc = json::parse(read_file(a.group_file));

  grpo::RolloutGroup group;
  if (!doc.contains("rewards")) throw std::runtime_error("missing key rewards");
  group.rewards = doc.at("rewards").get<std::vector<double>>();
  group.logprobs_new = read_matrix(doc, "logprobs_new");
  group.logprobs_old = read_matrix(doc, "logprobs_old");
  group.logprobs_ref = doc.contains("logprobs_ref")
                           ? read_matrix(doc, "logprobs_ref")
                           : group.logprobs_old;

  std::size_t scales =
      group.logprobs_new.empty() ? 0 : group.logprobs_new.front().size();

  grpo::GrpoConfig cfg;
  cfg.epsilon = a.epsilon;
  cfg.beta = a.beta;
  if (a.prefix < 0) throw UsageError("--prefix must be non-negative");
  cfg.prefix_len = a.prefix == 0 ? scales : static_cast<std::size_t>(a.prefix);
  cfg.kl_full_range = a.kl_full_range;
  if (doc.contains("scale_weights")) {
    cfg.scale_weights = doc.at("scale_weights").get<std::vector<double>>();
  } else {
    cfg.scale_weights.assign(scales, 1.0);
  }

  auto advantages = grpo::group_advantages(group.rewards);
  auto result = grpo::grpo_objective(group, cfg);

  std::string text;
  if (a.format == "json") {
    json outdoc;
    outdoc["group_size"] = group.rewards.size();
    outdoc["scales"] = scales;
    outdoc["prefix"] = cfg.prefix_len;
    outdoc["epsilon"] = cfg.epsilon;
    outdoc["beta"] = cfg.beta;
    outdoc["objective"] = result.objective;
    outdoc["surrogate"] = result.surrogate;
    outdoc["kl"] = result.kl;
    outdoc["advantages"] = advantages;
    json per_scale = json::array();
    for (std::size_t t = 0; t < result.per_scale.size(); ++t) {
      per_scale.push_back({{"scale", t + 1},
                           {"mean_ratio", result.per_scale[t].mean_ratio},
                           {"clip_fraction", result.per_scale[t].clip_fraction}});
    }
    outdoc["per_scale"] = std::move(per_scale);
    text = outdoc.dump(2) + "\n";
  } else {
    text = "metric,scale,value\n";
    text += "objective,," + fmt(result.objective) + "\n";
    text += "surrogate,," + fmt(result.surrogate) + "\n";
    text += "kl,," + fmt(result.kl) + "\n";
    for (std::size_t i = 0; i < advantages.size(); ++i) {
      text += "advantage," + std::to_string(i + 1) + "," + fmt(advantages[i]) + "\n";
    }
    for (std::size_t t = 0; t < result.per_scale.size(); ++t) {
      text += "mean_ratio," + std::to_string(t + 1) + "," +
              fmt(result.per_scale[t].mean_ratio) + "\n";
      text += "clip_fraction," + std::to_string(t + 1) + "," +
              fmt(result.per_scale[t].clip_fraction) + "\n";
    }
  }

  Outputs outputs;
  if (a.out.empty()) {
    outputs.stdout_text = std::move(text);
  } else {
    outputs.files.emplace_back(a.out, std::move(text));
  }
  std::vector<std::string> argv{"grpo",      "step",
                                "--group-file", a.group_file,
                                "--epsilon", fmt_exact(a.epsilon),
                                "--beta",    fmt_exact(a.beta),
                                "--prefix",  std::to_string(cfg.prefix_len)};
  if (a.kl_full_range) argv.push_back("--kl-full-range");
  argv.insert(argv.end(), {"--format", a.format, "--out", a.out});
  emit(outputs, "grpo step", argv, std::nullopt);
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  double ratio = 1.0;
  int level = 1024;
  int prompt_len = 0;
  std::uint64_t seed = 0;
  int top_k = 1;
  double top_p = 1.0;
  double temperature = 1.0;
  std::string scorer = "mock";
  int codebook = 256;
  std::uint64_t codebook_seed = 1;
  int text_vocab = 100;
  int sem_dim = 8;
  int pix_dim = 8;
  double range = position::kDefaultRange;
  std::string format = "json";
  std::string out;
  std::string accounts;
};

void run_generate(const GenerateArgs& a) {
  check_format(a.format, {"csv", "json"});
  if (a.prompt_len < 0) throw UsageError("--prompt-len must be non-negative");
  if (a.codebook < 1 || a.text_vocab < 1) throw UsageError("vocab sizes must be positive");
  std::uint64_t seed = resolve_seed(a.seed);

  const auto sched = schedule::truncate_for_level(
      schedule::select_schedule(a.ratio), check_level(a.level));
  const auto cb =
      quant::CodebookPair::seeded(a.codebook, a.sem_dim, a.pix_dim, a.codebook_seed);
  const engine::Vocabulary vocab{a.text_vocab, a.codebook};

  // Fixed repeating prompt; the ids only matter as hash context.
  std::vector<std::int32_t> prompt(static_cast<std::size_t>(a.prompt_len));
  for (std::size_t i = 0; i < prompt.size(); ++i) {
    prompt[i] = static_cast<std::int32_t>(i % static_cast<std::size_t>(a.text_vocab));
  }

  std::unique_ptr<engine::Scorer> scorer;
  if (a.scorer == "mock") {
    scorer = std::make_unique<engine::HashScorer>();
  } else if (a.scorer == "linear") {
    scorer = std::make_unique<engine::LinearScorer>(engine::LinearScorer::seeded(
        vocab.total(), a.pix_dim + 1, a.codebook_seed + 1));
  } else if (a.scorer.rfind("linear:", 0) == 0) {
    scorer = std::make_unique<engine::LinearScorer>(
        engine::LinearScorer::load(a.scorer.substr(7)));
  } else {
    throw UsageError("--scorer must be mock, linear or linear:weights.bin");
  }

  engine::SamplingConfig sampling;
  sampling.top_k = a.top_k;
  sampling.top_p = a.top_p;
  sampling.temperature = a.temperature;

  auto result =
      engine::generate_image(prompt, sched, *scorer, sampling, cb, vocab, seed, a.range);

  json doc;
  doc["ratio"] = sched.aspect_ratio;
  doc["label"] = sched.label();
  doc["level"] = a.level;
  doc["seed"] = seed;
  doc["prompt_len"] = a.prompt_len;
  doc["scorer"] = a.scorer;
  doc["sampling"] = {{"top_k", a.top_k}, {"top_p", a.top_p}, {"temperature", a.temperature}};
  doc["codebook"] = {{"size", a.codebook},
                     {"sem_dim", a.sem_dim},
                     {"pix_dim", a.pix_dim},
                     {"seed", a.codebook_seed}};
  json scales = json::array();
  long long total = 0;
  for (std::size_t k = 0; k < result.codes.scales.size(); ++k) {
    const auto& grid = result.codes.scales[k];
    total += static_cast<long long>(grid.codes.size());
    scales.push_back({{"scale", k + 1},
                      {"h", grid.h},
                      {"w", grid.w},
                      {"codes", grid.codes}});
  }
  doc["scales"] = std::move(scales);
  doc["total_tokens"] = total;
  doc["final_s_kv"] = result.accounts.back().s_kv;
  std::string codes_text = doc.dump(2) + "\n";

  std::string accounts_text = "step,s_q,s_kv\n";
  for (const auto& acct : result.accounts) {
    accounts_text += std::to_string(acct.step) + "," + std::to_string(acct.s_q) + "," +
                     std::to_string(acct.s_kv) + "\n";
  }

  Outputs outputs;
  std::string accounts_path = a.accounts;
  if (!a.out.empty()) {
    if (accounts_path.empty()) accounts_path = a.out + ".accounts.csv";
    outputs.files.emplace_back(a.out, std::move(codes_text));
    outputs.files.emplace_back(accounts_path, std::move(accounts_text));
  } else {
    outputs.stdout_text = a.format == "json" ? std::move(codes_text)
                                             : std::move(accounts_text);
    if (!accounts_path.empty()) {
      outputs.files.emplace_back(accounts_path, accounts_text);
    }
  }

  std::vector<std::string> argv{"generate",
                                "--ratio", fmt_exact(a.ratio),
                                "--level", std::to_string(a.level),
                                "--prompt-len", std::to_string(a.prompt_len),
                                "--seed", std::to_string(seed),
                                "--top-k", std::to_string(a.top_k),
                                "--top-p", fmt_exact(a.top_p),
                                "--temperature", fmt_exact(a.temperature),
                                "--scorer", a.scorer,
                                "--codebook", std::to_string(a.codebook),
                                "--codebook-seed", std::to_string(a.codebook_seed),
                                "--text-vocab", std::to_string(a.text_vocab),
                                "--sem-dim", std::to_string(a.sem_dim),
                                "--pix-dim", std::to_string(a.pix_dim),
                                "--range", fmt_exact(a.range),
                                "--format", a.format,
                                "--out", a.out};
  if (!accounts_path.empty()) {
    argv.push_back("--accounts");
    argv.push_back(accounts_path);
  }
  emit(outputs, "generate", argv, seed);
}

// -------------------------------------------------------------------- cost

struct CostCompareArgs {
  long long hidden = 2048;
  long long layers = 1;
  long long prompt = 100;
  std::string mode = "realistic";
  std::vector<int> resolutions{16, 32, 64};
  std::string format = "csv";
  std::string out;
};

void run_cost_compare(const CostCompareArgs& a) {
  check_format(a.format, {"csv", "json"});
  cost::CompareMode mode;
  if (a.mode == "uniform") {
    mode = cost::CompareMode::uniform;
  } else if (a.mode == "realistic") {
    mode = cost::CompareMode::realistic;
  } else {
    throw UsageError("--mode must be uniform or realistic");
  }

  cost::CostConfig cfg;
  cfg.hidden = a.hidden;
  cfg.layers = a.layers;
  cfg.prompt_len = a.prompt;
  auto rows = cost::compare(a.resolutions, mode, cfg);

  std::string text;
  if (a.format == "csv") {
    text = "resolution,steps,fixed_flops,nextscale_flops,ratio\n";
    for (const auto& row : rows) {
      text += std::to_string(row.resolution) + "," + std::to_string(row.steps) + "," +
              std::to_string(row.fixed_flops) + "," +
              std::to_string(row.nextscale_flops) + "," + fmt4(row.ratio) + "\n";
    }
  } else {
    json doc;
    doc["hidden"] = a.hidden;
    doc["layers"] = a.layers;
    doc["prompt"] = a.prompt;
    doc["mode"] = a.mode;
    json out_rows = json::array();
    for (const auto& row : rows) {
      out_rows.push_back({{"resolution", row.resolution},
                          {"steps", row.steps},
                          {"fixed_flops", row.fixed_flops},
                          {"nextscale_flops", row.nextscale_flops},
                          {"ratio", row.ratio}});
    }
    doc["rows"] = std::move(out_rows);
    text = doc.dump(2) + "\n";
  }

  std::vector<std::string> argv{"cost",      "compare",
                                "--hidden",  std::to_string(a.hidden),
                                "--layers",  std::to_string(a.layers),
                                "--prompt",  std::to_string(a.prompt),
                                "--mode",    a.mode};
  for (int r : a.resolutions) {
    argv.push_back("--resolution");
    argv.push_back(std::to_string(r));
  }
  argv.insert(argv.end(), {"--format", a.format, "--out", a.out});

  Outputs outputs;
  if (a.out.empty()) {
    outputs.stdout_text = std::move(text);
  } else {
    outputs.files.emplace_back(a.out, std::move(text));
  }
  emit(outputs, "cost compare", argv, std::nullopt);
}

// -------------------------------------------------------------------- pack

struct PackRunArgs {
  std::string input;
  std::string strategy;
  long long budget = 0;
  long long capacity = 0;
  int batch = 0;
  long long hidden = 2048;
  long long layers = 1;
  std::string report = "csv";
  std::string out;
};

void run_pack_run(const PackRunArgs& a) {
  check_format(a.report, {"csv", "json"});

  std::vector<pack::WorkItem> items;
  std::istringstream in(read_file(a.input));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line);
    pack::WorkItem item;
    item.id = j.at("id").get<std::int64_t>();
    item.kind = pack::work_kind_from_string(j.at("kind").get<std::string>());
    item.token_len = j.at("token_len").get<long long>();
    items.push_back(item);
  }

  cost::CostConfig cfg;
  cfg.hidden = a.hidden;
  cfg.layers = a.layers;
  pack::fill_costs(items, cfg);

  std::vector<pack::PackedBin> bins;
  if (a.strategy == "budget") {
    if (a.budget < 1) throw UsageError("--budget must be positive for strategy budget");
    bins = pack::pack_budget(items, a.budget);
  } else if (a.strategy == "fixed") {
    if (a.capacity < 1) throw UsageError("--capacity must be positive for strategy fixed");
    bins = pack::pack_fixed_length(items, a.capacity);
  } else if (a.strategy == "padding") {
    if (a.batch < 1) throw UsageError("--batch must be positive for strategy padding");
    bins = pack::pack_padding(items, a.batch);
  } else {
    throw UsageError("--strategy must be budget, fixed or padding");
  }
  auto report = pack::imbalance_report(bins);

  std::string text;
  if (a.report == "csv") {
    text = "worker,items,total_tokens,total_cost,effective_cost,oversize\n";
    for (const auto& bin : bins) {
      text += std::to_string(bin.worker) + "," + std::to_string(bin.items.size()) + "," +
              std::to_string(bin.total_tokens) + "," + std::to_string(bin.total_cost) +
              "," + std::to_string(bin.effective_cost) + "," +
              (bin.oversize ? "1" : "0") + "\n";
    }
    text += "\nmetric,value\n";
    text += "bins," + std::to_string(bins.size()) + "\n";
    text += "max_cost," + std::to_string(report.max_cost) + "\n";
    text += "min_cost," + std::to_string(report.min_cost) + "\n";
    text += "mean_cost," + fmt(report.mean_cost) + "\n";
    text += "imbalance," + fmt(report.imbalance) + "\n";
    text += "idle_fraction," + fmt(report.idle_fraction) + "\n";
    text += "padding_waste," + fmt(report.padding_waste) + "\n";
  } else {
    json doc;
    doc["strategy"] = a.strategy;
    json out_bins = json::array();
    for (const auto& bin : bins) {
      out_bins.push_back({{"worker", bin.worker},
                          {"items", bin.items},
                          {"total_tokens", bin.total_tokens},
                          {"total_cost", bin.total_cost},
                          {"effective_cost", bin.effective_cost},
                          {"oversize", bin.oversize}});
    }
    doc["bins"] = std::move(out_bins);
    doc["report"] = {{"max_cost", report.max_cost},
                     {"min_cost", report.min_cost},
                     {"mean_cost", report.mean_cost},
                     {"imbalance", report.imbalance},
                     {"idle_fraction", report.idle_fraction},
                     {"padding_waste", report.padding_waste}};
    text = doc.dump(2) + "\n";
  }

  std::vector<std::string> argv{"pack", "run", "--input", a.input, "--strategy", a.strategy};
  if (a.strategy == "budget") {
    argv.insert(argv.end(), {"--budget", std::to_string(a.budget)});
  } else if (a.strategy == "fixed") {
    argv.insert(argv.end(), {"--capacity", std::to_string(a.capacity)});
  } else {
    argv.insert(argv.end(), {"--batch", std::to_string(a.batch)});
  }
  argv.insert(argv.end(), {"--hidden", std::to_string(a.hidden), "--layers",
                           std::to_string(a.layers), "--report", a.report, "--out", a.out});

  Outputs outputs;
  if (a.out.empty()) {
    outputs.stdout_text = std::move(text);
  } else {
    outputs.files.emplace_back(a.out, std::move(text));
  }
  emit(outputs, "pack run", argv, std::nullopt);
}

struct PackSynthArgs {
  std::size_t count = 1000;
  std::string mix = "text:0.25,t2i:0.6,interleaved:0.15";
  std::uint64_t seed = 0;
  std::string format = "jsonl";
  std::string out;
};

pack::MixSpec parse_mix(const std::string& text) {
  pack::MixSpec mix;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (part.empty()) continue;
    std::size_t colon = part.find(':');
    if (colon == std::string::npos) {
      throw UsageError("--mix expects kind:weight pairs, e.g. text:0.25,t2i:0.75");
    }
    double weight = 0.0;
    try {
      std::size_t used = 0;
      weight = std::stod(part.substr(colon + 1), &used);
      if (used != part.size() - colon - 1) throw UsageError("");
    } catch (const std::exception&) {
      throw UsageError("--mix weight is not a number in '" + part + "'");
    }
    if (weight < 0.0) throw UsageError("--mix weights must be non-negative");
    pack::WorkKind kind;
    try {
      kind = pack::work_kind_from_string(part.substr(0, colon));
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    switch (kind) {
      case pack::WorkKind::text: mix.text = weight; break;
      case pack::WorkKind::t2i: mix.t2i = weight; break;
      case pack::WorkKind::interleaved: mix.interleaved = weight; break;
      case pack::WorkKind::edit: mix.edit = weight; break;
    }
  }
  return mix;
}

void run_pack_synth(const PackSynthArgs& a) {
  check_format(a.format, {"jsonl", "csv", "json"});
  std::uint64_t seed = resolve_seed(a.seed);
  auto mix = parse_mix(a.mix);
  auto items = pack::synth_workload(a.count, mix, seed);

  std::string text;
  if (a.format == "jsonl") {
    for (const auto& item : items) {
      json j{{"id", item.id},
             {"kind", pack::to_string(item.kind)},
             {"token_len", item.token_len}};
      text += j.dump() + "\n";
    }
  } else if (a.format == "csv") {
    text = "id,kind,token_len\n";
    for (const auto& item : items) {
      text += std::to_string(item.id) + "," + pack::to_string(item.kind) + "," +
              std::to_string(item.token_len) + "\n";
    }
  } else {
    json arr = json::array();
    for (const auto& item : items) {
      arr.push_back({{"id", item.id},
                     {"kind", pack::to_string(item.kind)},
                     {"token_len", item.token_len}});
    }
    text = arr.dump(2) + "\n";
  }

  Outputs outputs;
  if (a.out.empty()) {
    outputs.stdout_text = std::move(text);
  } else {
    outputs.files.emplace_back(a.out, std::move(text));
  }
  emit(outputs, "pack synth",
       {"pack", "synth", "--count", std::to_string(a.count), "--mix", a.mix,
        "--seed", std::to_string(seed), "--format", a.format, "--out", a.out},
       seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Next-scale generation toolkit: schedules, positions, quantization, "
               "losses, GRPO math, generation accounting, cost model and packing."};
  app.require_subcommand(1);

  // schedule
  auto* schedule_cmd = app.add_subcommand("schedule", "Progressive scale schedules");
  schedule_cmd->require_subcommand(1);
  ScheduleDumpArgs sd;
  auto* sd_cmd = schedule_cmd->add_subcommand("dump", "Emit one schedule step by step");
  sd_cmd->add_option("--ratio", sd.ratio, "Target aspect ratio (h/w)")->capture_default_str();
  sd_cmd->add_option("--level", sd.level, "Resolution level: 256, 512 or 1024")
      ->capture_default_str();
  sd_cmd->add_option("--format", sd.format, "csv or json")->capture_default_str();
  sd_cmd->add_option("--out", sd.out, "Write output (and manifest) to this path");
  sd_cmd->callback([&] { run_schedule_dump(sd); });

  ScheduleValidateArgs sv;
  auto* sv_cmd = schedule_cmd->add_subcommand(
      "validate", "Check every built-in schedule and report cross-schedule spread");
  sv_cmd->add_option("--format", sv.format, "csv or json")->capture_default_str();
  sv_cmd->add_option("--out", sv.out, "Write output (and manifest) to this path");
  sv_cmd->callback([&] { run_schedule_validate(sv); });

  // position
  auto* position_cmd = app.add_subcommand("position", "Rotary position triples");
  position_cmd->require_subcommand(1);
  PositionDumpArgs pd;
  auto* pd_cmd = position_cmd->add_subcommand("dump", "Emit triples for one token grid");
  pd_cmd->add_option("--grid", pd.grid, "Grid as HxW, e.g. 16x16")->required();
  pd_cmd->add_option("--scale", pd.scale, "Scale-axis coordinate")->capture_default_str();
  pd_cmd->add_option("--range", pd.range, "Coordinate range C")->capture_default_str();
  pd_cmd->add_option("--format", pd.format, "csv or json")->capture_default_str();
  pd_cmd->add_option("--out", pd.out, "Write output (and manifest) to this path");
  pd_cmd->callback([&] { run_position_dump(pd); });

  // quantize
  auto* quantize_cmd = app.add_subcommand("quantize", "Multi-scale residual quantization");
  quantize_cmd->require_subcommand(1);
  QuantizeRoundtripArgs qr;
  auto* qr_cmd = quantize_cmd->add_subcommand(
      "roundtrip", "Encode a random feature map and report per-scale error");
  qr_cmd->add_option("--grid", qr.grid, "Final grid as HxW")->required();
  qr_cmd->add_option("--codebook", qr.codebook, "Codebook entries")->capture_default_str();
  qr_cmd->add_option("--scales", qr.scales, "Scale count")->capture_default_str();
  qr_cmd->add_option("--sem-dim", qr.sem_dim, "Semantic feature dim")->capture_default_str();
  qr_cmd->add_option("--pix-dim", qr.pix_dim, "Pixel feature dim")->capture_default_str();
  qr_cmd->add_option("--seed", qr.seed, "Codebook and feature seed")->capture_default_str();
  qr_cmd->add_option("--format", qr.format, "csv or json")->capture_default_str();
  qr_cmd->add_option("--out", qr.out, "Write output (and manifest) to this path");
  qr_cmd->callback([&] { run_quantize_roundtrip(qr); });

  // loss
  auto* loss_cmd = app.add_subcommand("loss", "Scale-reweighted loss utilities");
  loss_cmd->require_subcommand(1);
  LossWeightsArgs lw;
  auto* lw_cmd = loss_cmd->add_subcommand("weights", "Per-scale loss weights");
  lw_cmd->add_option("--ratio", lw.ratio, "Target aspect ratio (h/w)")->capture_default_str();
  lw_cmd->add_option("--level", lw.level, "Resolution level: 256, 512 or 1024")
      ->capture_default_str();
  lw_cmd->add_option("--alpha", lw.alpha, "Area-damping exponent")->capture_default_str();
  lw_cmd->add_option("--format", lw.format, "csv or json")->capture_default_str();
  lw_cmd->add_option("--out", lw.out, "Write output (and manifest) to this path");
  lw_cmd->callback([&] { run_loss_weights(lw); });

  // grpo
  auto* grpo_cmd = app.add_subcommand("grpo", "Group-relative policy optimization");
  grpo_cmd->require_subcommand(1);
  GrpoStepArgs gs;
  auto* gs_cmd = grpo_cmd->add_subcommand("step", "Objective and diagnostics for one group");
  gs_cmd->add_option("--group-file", gs.group_file,
                     "JSON with rewards and logprobs_{new,old,ref} matrices")
      ->required();
  gs_cmd->add_option("--epsilon", gs.epsilon, "Clip radius")->capture_default_str();
  gs_cmd->add_option("--beta", gs.beta, "KL coefficient")->capture_default_str();
  gs_cmd->add_option("--prefix", gs.prefix, "Trainable scale prefix (0 = all)")
      ->capture_default_str();
  gs_cmd->add_flag("--kl-full-range", gs.kl_full_range,
                   "Compute the KL penalty over all scales, not just the prefix");
  gs_cmd->add_option("--format", gs.format, "csv or json")->capture_default_str();
  gs_cmd->add_option("--out", gs.out, "Write output (and manifest) to this path");
  gs_cmd->callback([&] { run_grpo_step(gs); });

  // generate
  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Sample one image's codes scale by scale");
  gen_cmd->add_option("--ratio", gen.ratio, "Target aspect ratio (h/w)")->capture_default_str();
  gen_cmd->add_option("--level", gen.level, "Resolution level: 256, 512 or 1024")
      ->capture_default_str();
  gen_cmd->add_option("--prompt-len", gen.prompt_len, "Conditioning prompt length")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Sampling seed")->capture_default_str();
  gen_cmd->add_option("--top-k", gen.top_k, "Keep the k best candidates (1 = greedy)")
      ->capture_default_str();
  gen_cmd->add_option("--top-p", gen.top_p, "Nucleus probability mass")->capture_default_str();
  gen_cmd->add_option("--temperature", gen.temperature, "Score divisor before softmax")
      ->capture_default_str();
  gen_cmd->add_option("--scorer", gen.scorer, "mock, linear or linear:weights.bin")
      ->capture_default_str();
  gen_cmd->add_option("--codebook", gen.codebook, "Visual codebook size")->capture_default_str();
  gen_cmd->add_option("--codebook-seed", gen.codebook_seed,
                      "Seed for the codebook (and the bare linear scorer)")
      ->capture_default_str();
  gen_cmd->add_option("--text-vocab", gen.text_vocab, "Text vocabulary size")
      ->capture_default_str();
  gen_cmd->add_option("--sem-dim", gen.sem_dim, "Semantic feature dim")->capture_default_str();
  gen_cmd->add_option("--pix-dim", gen.pix_dim, "Pixel feature dim")->capture_default_str();
  gen_cmd->add_option("--range", gen.range, "Position coordinate range C")
      ->capture_default_str();
  gen_cmd->add_option("--format", gen.format,
                      "Stdout content without --out: json (codes) or csv (accounts)")
      ->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Write codes JSON here, accounts CSV beside it");
  gen_cmd->add_option("--accounts", gen.accounts, "Explicit path for the accounts CSV");
  gen_cmd->callback([&] { run_generate(gen); });

  // cost
  auto* cost_cmd = app.add_subcommand("cost", "Analytic FLOPs model");
  cost_cmd->require_subcommand(1);
  CostCompareArgs cc;
  auto* cc_cmd = cost_cmd->add_subcommand(
      "compare", "Fixed-sequence baseline vs progressive generation");
  cc_cmd->add_option("--hidden", cc.hidden, "Model hidden size")->capture_default_str();
  cc_cmd->add_option("--layers", cc.layers, "Layer count")->capture_default_str();
  cc_cmd->add_option("--prompt", cc.prompt, "Prompt length")->capture_default_str();
  cc_cmd->add_option("--mode", cc.mode, "uniform or realistic")->capture_default_str();
  cc_cmd->add_option("--resolution", cc.resolutions,
                     "Final grid side(s); repeatable (16, 32, 64)")
      ->capture_default_str();
  cc_cmd->add_option("--format", cc.format, "csv or json")->capture_default_str();
  cc_cmd->add_option("--out", cc.out, "Write output (and manifest) to this path");
  cc_cmd->callback([&] { run_cost_compare(cc); });

  // pack
  auto* pack_cmd = app.add_subcommand("pack", "Computation-balanced workload packing");
  pack_cmd->require_subcommand(1);
  PackRunArgs pr;
  auto* pr_cmd = pack_cmd->add_subcommand("run", "Pack a JSONL workload file");
  pr_cmd->add_option("--input", pr.input, "JSONL of {id, kind, token_len}")->required();
  pr_cmd->add_option("--strategy", pr.strategy, "budget, fixed or padding")->required();
  pr_cmd->add_option("--budget", pr.budget, "FLOPs budget per bin (strategy budget)");
  pr_cmd->add_option("--capacity", pr.capacity, "Token capacity per bin (strategy fixed)");
  pr_cmd->add_option("--batch", pr.batch, "Batch size (strategy padding)");
  pr_cmd->add_option("--hidden", pr.hidden, "Model hidden size for costs")
      ->capture_default_str();
  pr_cmd->add_option("--layers", pr.layers, "Layer count for costs")->capture_default_str();
  pr_cmd->add_option("--report,--format", pr.report, "csv or json")->capture_default_str();
  pr_cmd->add_option("--out", pr.out, "Write output (and manifest) to this path");
  pr_cmd->callback([&] { run_pack_run(pr); });

  PackSynthArgs ps;
  auto* ps_cmd = pack_cmd->add_subcommand("synth", "Generate a synthetic workload");
  ps_cmd->add_option("--count", ps.count, "Item count")->capture_default_str();
  ps_cmd->add_option("--mix", ps.mix, "kind:weight list, e.g. text:0.25,t2i:0.75")
      ->capture_default_str();
  ps_cmd->add_option("--seed", ps.seed, "Workload seed")->capture_default_str();
  ps_cmd->add_option("--format", ps.format, "jsonl, csv or json")->capture_default_str();
  ps_cmd->add_option("--out", ps.out, "Write output (and manifest) to this path");
  ps_cmd->callback([&] { run_pack_synth(ps); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
