#include "nextscale/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "nextscale/rng.hpp"

namespace nextscale::engine {

std::vector<StepAccount> kv_accounting(const schedule::ScaleSchedule& sched,
                                       long long prompt_len) {
  if (prompt_len < 0) throw std::invalid_argument("kv_accounting: prompt_len must be >= 0");
  std::vector<StepAccount> accounts;
  long long attended = prompt_len;
  if (prompt_len > 0) accounts.push_back({0, prompt_len, prompt_len});
  int step = 1;
  for (const auto& s : sched.steps) {
    long long q = s.area();
    attended += q;
    accounts.push_back({step++, q, attended});
  }
  return accounts;
}

void HashScorer::score(const ScorerContext& ctx, const Vocabulary& vocab,
                       std::span<double> out) const {
  std::size_t n = static_cast<std::size_t>(ctx.h) * ctx.w;
  if (out.size() != n * static_cast<std::size_t>(vocab.total())) {
    throw std::invalid_argument("HashScorer: output span has wrong size");
  }
  // One digest covers everything the score may depend on except the
  // (cell, candidate) pair, which is mixed in per entry below.
  std::uint64_t base = fnv1a64(ctx.prompt.data(),
                               ctx.prompt.size() * sizeof(std::int32_t), salt_ ^ 0x9e3779b9ull);
  base = fnv1a64(&ctx.scale_index, sizeof(ctx.scale_index), base);
  if (ctx.features != nullptr) {
    base = fnv1a64(ctx.features->values.data(),
                   ctx.features->values.size() * sizeof(double), base);
  }
  for (std::size_t cell = 0; cell < n; ++cell) {
    double* row = out.data() + cell * vocab.total();
    for (std::int32_t v = 0; v < vocab.total(); ++v) {
      std::uint64_t bits = mix64(base ^ mix64(cell * 0x10001ull + static_cast<std::uint64_t>(v)));
      // Map to (-4, 4): arbitrary bounded logit-ish range.
      row[v] = (static_cast<double>(bits >> 11) * 0x1.0p-53 - 0.5) * 8.0;
    }
  }
}

LinearScorer::LinearScorer(int rows, int cols, std::vector<float> weights)
    : rows_(rows), cols_(cols), weights_(std::move(weights)) {
  if (rows_ < 1 || cols_ < 1) {
    throw std::invalid_argument("LinearScorer: dims must be positive");
  }
  if (weights_.size() != static_cast<std::size_t>(rows_) * cols_) {
    throw std::invalid_argument("LinearScorer: weight count does not match dims");
  }
}

namespace {

constexpr char kWeightMagic[4] = {'N', 'F', 'L', 'W'};
constexpr std::uint32_t kWeightVersion = 1;

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32le(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

LinearScorer LinearScorer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("LinearScorer: cannot open " + path.string());
  unsigned char header[16];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || std::memcmp(header, kWeightMagic, 4) != 0) {
    throw std::runtime_error("LinearScorer: bad magic in " + path.string());
  }
  std::uint32_t version = read_u32le(header + 4);
  if (version != kWeightVersion) {
    throw std::runtime_error("LinearScorer: unsupported weight version");
  }
  std::uint32_t rows = read_u32le(header + 8);
  std::uint32_t cols = read_u32le(header + 12);
  if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24)) {
    throw std::runtime_error("LinearScorer: implausible dims in weight header");
  }
  std::size_t count = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> raw(count * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw std::runtime_error("LinearScorer: truncated weight file");

  std::vector<float> weights(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = read_u32le(raw.data() + i * 4);
    float f;
    std::memcpy(&f, &bits, 4);
    weights[i] = f;
  }
  return LinearScorer(static_cast<int>(rows), static_cast<int>(cols), std::move(weights));
}

void LinearScorer::save(const std::filesystem::path& path, int rows, int cols,
                        std::span<const float> weights) {
  if (weights.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("LinearScorer::save: weight count does not match dims");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("LinearScorer::save: cannot open " + path.string());
  out.write(kWeightMagic, 4);
  write_u32le(out, kWeightVersion);
  write_u32le(out, static_cast<std::uint32_t>(rows));
  write_u32le(out, static_cast<std::uint32_t>(cols));
  for (float f : weights) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32le(out, bits);
  }
  if (!out) throw std::runtime_error("LinearScorer::save: write failed");
}

LinearScorer LinearScorer::seeded(int rows, int cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("LinearScorer::seeded: dims must be positive");
  Rng rng(seed);
  std::vector<float> weights(static_cast<std::size_t>(rows) * cols);
  for (float& w : weights) w = static_cast<float>(rng.next_gaussian());
  return LinearScorer(rows, cols, std::move(weights));
}

void LinearScorer::score(const ScorerContext& ctx, const Vocabulary& vocab,
                         std::span<double> out) const {
  std::size_t n = static_cast<std::size_t>(ctx.h) * ctx.w;
  if (out.size() != n * static_cast<std::size_t>(vocab.total())) {
    throw std::invalid_argument("LinearScorer: output span has wrong size");
  }
  if (rows_ != vocab.total()) {
    throw std::invalid_argument("LinearScorer: weight rows must equal vocabulary size");
  }
  int feat_dim = cols_ - 1;
  if (ctx.features != nullptr &&
      (ctx.features->channels != feat_dim || ctx.features->h != ctx.h ||
       ctx.features->w != ctx.w)) {
    throw std::invalid_argument("LinearScorer: feature map shape mismatch");
  }
  for (std::size_t cell = 0; cell < n; ++cell) {
    const double* feat = ctx.features != nullptr
                             ? ctx.features->values.data() + cell * feat_dim
                             : nullptr;
    double* row = out.data() + cell * vocab.total();
    for (int v = 0; v < rows_; ++v) {
      const float* wrow = weights_.data() + static_cast<std::size_t>(v) * cols_;
      double acc = wrow[feat_dim];  // bias column
      if (feat != nullptr) {
        for (int c = 0; c < feat_dim; ++c) acc += wrow[c] * feat[c];
      }
      row[v] = acc;
    }
  }
}

std::vector<std::int32_t> sample_scale(std::span<const double> scores, int range,
                                       const SamplingConfig& cfg, std::uint64_t seed) {
  if (range < 1) throw std::invalid_argument("sample_scale: range must be positive");
  if (cfg.top_k < 1) throw std::invalid_argument("sample_scale: top_k must be >= 1");
  if (!(cfg.top_p > 0.0 && cfg.top_p <= 1.0)) {
    throw std::invalid_argument("sample_scale: top_p must be in (0, 1]");
  }
  if (!(cfg.temperature > 0.0)) {
    throw std::invalid_argument("sample_scale: temperature must be positive");
  }
  if (scores.size() % static_cast<std::size_t>(range) != 0) {
    throw std::invalid_argument("sample_scale: scores size must be a multiple of range");
  }

  std::size_t n = scores.size() / range;
  int keep_k = std::min(cfg.top_k, range);
  Rng rng(seed);

  std::vector<std::int32_t> out(n);
  std::vector<int> order(range);
  std::vector<double> probs(keep_k);

  for (std::size_t t = 0; t < n; ++t) {
    const double* row = scores.data() + t * range;
    std::iota(order.begin(), order.end(), 0);
    // Descending score; equal scores keep ascending id so argmax and
    // truncation both prefer the smaller index.
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return row[a] > row[b]; });

    if (keep_k == 1) {
      out[t] = order[0];
      continue;
    }

    double max_scaled = row[order[0]] / cfg.temperature;
    double denom = 0.0;
    for (int r = 0; r < keep_k; ++r) {
      probs[r] = std::exp(row[order[r]] / cfg.temperature - max_scaled);
      denom += probs[r];
    }
    int kept = keep_k;
    double cum = 0.0;
    for (int r = 0; r < keep_k; ++r) {
      cum += probs[r] / denom;
      // First prefix whose mass reaches top_p; the epsilon absorbs
      // accumulated rounding when top_p is exactly 1.
      if (cum >= cfg.top_p - 1e-12) {
        kept = r + 1;
        break;
      }
    }
    out[t] = order[rng.next_weighted(std::span<const double>(probs.data(), kept))];
  }
  return out;
}

GenerationResult generate_image(std::span<const std::int32_t> prompt,
                                const schedule::ScaleSchedule& sched,
                                const Scorer& scorer, const SamplingConfig& sampling,
                                const quant::CodebookPair& cb, const Vocabulary& vocab,
                                std::uint64_t seed, double position_range) {
  if (sched.steps.empty()) throw std::invalid_argument("generate_image: empty schedule");
  if (vocab.visual_size != cb.size) {
    throw std::invalid_argument("generate_image: vocabulary visual range must match codebook");
  }

  GenerationResult result;
  result.accounts = kv_accounting(sched, static_cast<long long>(prompt.size()));

  quant::FeatureMap features;  // previous scale's lookup, upsampled
  std::vector<double> scores;
  std::vector<position::PositionTriple> positions;

  for (std::size_t k = 0; k < sched.steps.size(); ++k) {
    const auto& step = sched.steps[k];
    std::size_t n = static_cast<std::size_t>(step.h) * step.w;

    if (k > 0) {
      const auto& prev = result.codes.scales.back();
      features = quant::residual_features(prev, cb, step.h, step.w);
    }
    positions = position::vision_positions(step.h, step.w, static_cast<double>(k),
                                           position_range);

    ScorerContext ctx;
    ctx.prompt = prompt;
    ctx.scale_index = static_cast<int>(k);
    ctx.h = step.h;
    ctx.w = step.w;
    ctx.features = k > 0 ? &features : nullptr;
    ctx.positions = positions;

    scores.assign(n * static_cast<std::size_t>(vocab.total()), 0.0);
    scorer.score(ctx, vocab, scores);

    // Visual slice only; text and marker ids are never sampled here.
    std::vector<double> visual(n * static_cast<std::size_t>(vocab.visual_size));
    for (std::size_t cell = 0; cell < n; ++cell) {
      const double* row = scores.data() + cell * vocab.total() + vocab.visual_base();
      std::copy(row, row + vocab.visual_size,
                visual.data() + cell * vocab.visual_size);
    }

    // Per-scale seed: deterministic, and insensitive to how many
    // draws earlier scales consumed.
    std::uint64_t scale_seed = mix64(seed ^ mix64(k + 1));
    quant::CodeGrid grid{step.h, step.w,
                         sample_scale(visual, vocab.visual_size, sampling, scale_seed)};
    result.codes.scales.push_back(std::move(grid));
  }
  return result;
}

}  // namespace nextscale::engine
