#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nextscale/schedule.hpp"

namespace nextscale::quant {

// Paired codebooks sharing one index space: entry v has a semantic
// vector sem[v] (dim sem_dim) and a pixel vector pix[v] (dim pix_dim).
// Joint quantization scores a query against both tables at once.
struct CodebookPair {
  int size = 0;      // entry count V
  int sem_dim = 0;
  int pix_dim = 0;
  std::vector<double> sem;  // size x sem_dim, row-major
  std::vector<double> pix;  // size x pix_dim, row-major
  double w_sem = 1.0;
  double w_pix = 1.0;

  std::span<const double> sem_entry(int v) const {
    return {sem.data() + static_cast<std::size_t>(v) * sem_dim,
            static_cast<std::size_t>(sem_dim)};
  }
  std::span<const double> pix_entry(int v) const {
    return {pix.data() + static_cast<std::size_t>(v) * pix_dim,
            static_cast<std::size_t>(pix_dim)};
  }

  // Gaussian-filled codebook with entry 0 zeroed out, so an all-zero
  // residual always has an exact match and reconstruction error cannot
  // grow as scales are added.
  static CodebookPair seeded(int size, int sem_dim, int pix_dim, std::uint64_t seed);
};

// Dense h x w feature grid, channel-last.
struct FeatureMap {
  int h = 0;
  int w = 0;
  int channels = 0;
  std::vector<double> values;  // h*w*channels

  FeatureMap() = default;
  FeatureMap(int h_, int w_, int channels_)
      : h(h_), w(w_), channels(channels_),
        values(static_cast<std::size_t>(h_) * w_ * channels_, 0.0) {}

  double* cell(int i, int j) {
    return values.data() + (static_cast<std::size_t>(i) * w + j) * channels;
  }
  const double* cell(int i, int j) const {
    return values.data() + (static_cast<std::size_t>(i) * w + j) * channels;
  }
};

// One quantized grid: code indices in row-major order.
struct CodeGrid {
  int h = 0;
  int w = 0;
  std::vector<std::int32_t> codes;  // h*w
};

// Per-scale code grids aligned with a schedule's steps.
struct MultiScaleCodes {
  std::vector<CodeGrid> scales;
};

// Nearest-neighbor resampling. Destination cell (i, j) reads source
// cell (floor((i+0.5)*src_h/dst_h), floor((j+0.5)*src_w/dst_w)).
FeatureMap upsample_nearest(const FeatureMap& src, int h, int w);

// Box-average downsampling over the partition induced by the same
// index map, so downsample(upsample(x)) == x exactly.
FeatureMap downsample_area(const FeatureMap& src, int h, int w);

// Index of the codebook entry minimizing
//   w_sem * ||sem_feat - sem[v]||^2 + w_pix * ||pix_feat - pix[v]||^2.
// Ties resolve to the smallest index. Feature spans must match the
// codebook dims (std::invalid_argument otherwise).
std::int32_t quantize_joint(std::span<const double> sem_feat,
                            std::span<const double> pix_feat,
                            const CodebookPair& cb);

// Coarse-to-fine residual encoding of a pixel-space feature map. Each
// step downsamples the running residual to the step grid, quantizes
// every cell against the pixel table (w_sem treated as 0 here; there is
// no semantic query for interior residuals), and subtracts the
// upsampled lookup from the residual.
MultiScaleCodes encode_multiscale(const FeatureMap& features,
                                  const schedule::ScaleSchedule& sched,
                                  const CodebookPair& cb);

// Sum of upsampled pixel-table lookups over all scales, the
// reconstruction matching encode_multiscale.
FeatureMap decode_multiscale(const MultiScaleCodes& codes, const CodebookPair& cb,
                             int h, int w);

// Upsampled pixel-table lookup of a single scale, no accumulation.
// This is what conditions the next prediction step.
FeatureMap residual_features(const CodeGrid& grid, const CodebookPair& cb, int h, int w);

// Residual encoding with training-time code corruption. At each scale,
// a seeded coin selects ~token_fraction of positions; a selected
// position's input code is drawn from the neighbor_count nearest
// entries, weighted exp(-d / tau) where d is the squared joint distance
// and tau is the mean of the neighbors' d, while its target stays the
// true nearest. The drawn code, not the target, is what propagates into
// the residual, so later scales learn to absorb earlier sampling error.
struct SelfCorrectionResult {
  MultiScaleCodes input_codes;
  MultiScaleCodes target_codes;
  std::vector<std::vector<std::uint8_t>> corrupted;  // per scale, 1 = resampled position
};
SelfCorrectionResult self_correct_encode(const FeatureMap& features,
                                         const schedule::ScaleSchedule& sched,
                                         const CodebookPair& cb, int neighbor_count,
                                         double token_fraction, std::uint64_t seed);

}  // namespace nextscale::quant
