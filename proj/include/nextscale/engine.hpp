#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nextscale/position.hpp"
#include "nextscale/quantizer.hpp"
#include "nextscale/sequence.hpp"

namespace nextscale::engine {

// Attention bookkeeping for one decoding step. With KV caching, a
// step scores s_q new tokens against s_kv cached-plus-new tokens.
struct StepAccount {
  int step = 0;          // 0 = prompt prefill, then 1-based scale index
  long long s_q = 0;     // new tokens this step
  long long s_kv = 0;    // tokens attended (cumulative)
};

// Accounts for one image generation: an optional prefill step
// (s_q = s_kv = prompt_len, only when prompt_len > 0), then one step
// per scale with s_q = h_k*w_k and s_kv = prompt_len + all image
// tokens emitted through scale k.
std::vector<StepAccount> kv_accounting(const schedule::ScaleSchedule& sched,
                                       long long prompt_len);

// Everything a scorer may condition on for one scale prediction.
// For the first scale there are no residual features (the 1x1 grid is
// predicted from the prompt/boi context alone); from the second scale
// on, `features` holds the previous scale's code lookup upsampled to
// the current grid, and positions carry the current grid's triples.
struct ScorerContext {
  std::span<const std::int32_t> prompt;
  int scale_index = 0;  // 0-based step within the image
  int h = 0;
  int w = 0;
  const quant::FeatureMap* features = nullptr;  // null at scale_index 0
  std::span<const position::PositionTriple> positions;
};

// Stand-in for the transformer: fills one score row over the unified
// vocabulary per next-step token (h*w rows of vocab.total() scores,
// row-major). Implementations must be pure functions of the context.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual void score(const ScorerContext& ctx, const Vocabulary& vocab,
                     std::span<double> out) const = 0;
};

// Deterministic pseudo-random scores derived by hashing the full
// context (prompt, scale, cell, candidate id, features). Useful as a
// fixed arbitrary policy in tests.
class HashScorer final : public Scorer {
 public:
  explicit HashScorer(std::uint64_t salt = 0) : salt_(salt) {}
  void score(const ScorerContext& ctx, const Vocabulary& vocab,
             std::span<double> out) const override;

 private:
  std::uint64_t salt_;
};

// Affine map from residual features to scores: row v of the weight
// matrix scores vocabulary id v from the feature vector extended with
// a constant 1 (so cols = feature channels + 1). At the first scale
// the feature part is zero and only the bias column acts.
class LinearScorer final : public Scorer {
 public:
  LinearScorer(int rows, int cols, std::vector<float> weights);

  // Weight file: 16-byte header (magic "NFLW", u32 version, u32 rows,
  // u32 cols, all little-endian) followed by rows*cols little-endian
  // f32 values, row-major. Throws std::runtime_error on malformed
  // files.
  static LinearScorer load(const std::filesystem::path& path);
  static void save(const std::filesystem::path& path, int rows, int cols,
                   std::span<const float> weights);

  // Deterministic random weights, for tests and demo runs.
  static LinearScorer seeded(int rows, int cols, std::uint64_t seed);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  void score(const ScorerContext& ctx, const Vocabulary& vocab,
             std::span<double> out) const override;

 private:
  int rows_;
  int cols_;
  std::vector<float> weights_;  // rows x cols
};

struct SamplingConfig {
  int top_k = 1;
  double top_p = 1.0;
  double temperature = 1.0;
};

// Independent per-token sampling: scale scores by 1/temperature, keep
// the top_k best (ties prefer smaller ids), keep the smallest prefix
// of those reaching cumulative probability top_p, renormalize, draw.
// scores is token-major, `range` entries per token; returns one index
// in [0, range) per token. top_k = 1 reduces to argmax and ignores
// the seed. Throws std::invalid_argument on invalid parameters.
std::vector<std::int32_t> sample_scale(std::span<const double> scores, int range,
                                       const SamplingConfig& cfg, std::uint64_t seed);

struct GenerationResult {
  quant::MultiScaleCodes codes;
  std::vector<StepAccount> accounts;
};

// Coarse-to-fine image generation. Scale 1 is scored from the prompt
// context; scale k >= 2 is scored from scale k-1's codes looked up in
// the codebook and upsampled to the scale-k grid. Each scale's visual
// token slice of the scores is sampled with `sampling`; accounts match
// kv_accounting(sched, prompt.size()) exactly.
GenerationResult generate_image(std::span<const std::int32_t> prompt,
                                const schedule::ScaleSchedule& sched,
                                const Scorer& scorer, const SamplingConfig& sampling,
                                const quant::CodebookPair& cb, const Vocabulary& vocab,
                                std::uint64_t seed,
                                double position_range = position::kDefaultRange);

}  // namespace nextscale::engine
