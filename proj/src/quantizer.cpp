#include "nextscale/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nextscale/rng.hpp"

namespace nextscale::quant {

CodebookPair CodebookPair::seeded(int size, int sem_dim, int pix_dim,
                                  std::uint64_t seed) {
  if (size < 1 || sem_dim < 1 || pix_dim < 1) {
    throw std::invalid_argument("CodebookPair::seeded: dims must be positive");
  }
  CodebookPair cb;
  cb.size = size;
  cb.sem_dim = sem_dim;
  cb.pix_dim = pix_dim;
  cb.sem.resize(static_cast<std::size_t>(size) * sem_dim);
  cb.pix.resize(static_cast<std::size_t>(size) * pix_dim);
  Rng rng(seed);
  // Entry 0 stays zero (see header). Fill the rest.
  for (int v = 1; v < size; ++v) {
    for (int d = 0; d < sem_dim; ++d) cb.sem[static_cast<std::size_t>(v) * sem_dim + d] = rng.next_gaussian();
    for (int d = 0; d < pix_dim; ++d) cb.pix[static_cast<std::size_t>(v) * pix_dim + d] = rng.next_gaussian();
  }
  return cb;
}

namespace {

// Source row/column for destination index i when resampling n_src -> n_dst.
inline int src_index(int i, int n_src, int n_dst) {
  // floor((i + 0.5) * n_src / n_dst) without float rounding trouble
  return static_cast<int>((static_cast<long long>(2 * i + 1) * n_src) / (2 * n_dst));
}

void check_grid(const char* who, int h, int w) {
  if (h < 1 || w < 1) {
    throw std::invalid_argument(std::string(who) + ": grid dims must be positive");
  }
}

}  // namespace

FeatureMap upsample_nearest(const FeatureMap& src, int h, int w) {
  check_grid("upsample_nearest", h, w);
  FeatureMap dst(h, w, src.channels);
  for (int i = 0; i < h; ++i) {
    int si = src_index(i, src.h, h);
    for (int j = 0; j < w; ++j) {
      int sj = src_index(j, src.w, w);
      const double* from = src.cell(si, sj);
      double* to = dst.cell(i, j);
      for (int c = 0; c < src.channels; ++c) to[c] = from[c];
    }
  }
  return dst;
}

FeatureMap downsample_area(const FeatureMap& src, int h, int w) {
  check_grid("downsample_area", h, w);
  FeatureMap dst(h, w, src.channels);
  std::vector<int> counts(static_cast<std::size_t>(h) * w, 0);
  // Accumulate every source cell into the destination cell that would
  // have produced it under nearest-neighbor upsampling, then average.
  for (int i = 0; i < src.h; ++i) {
    int di = src_index(i, h, src.h);
    for (int j = 0; j < src.w; ++j) {
      int dj = src_index(j, w, src.w);
      const double* from = src.cell(i, j);
      double* to = dst.cell(di, dj);
      for (int c = 0; c < src.channels; ++c) to[c] += from[c];
      ++counts[static_cast<std::size_t>(di) * w + dj];
    }
  }
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      int n = counts[static_cast<std::size_t>(i) * w + j];
      double* to = dst.cell(i, j);
      if (n > 0) {
        for (int c = 0; c < src.channels; ++c) to[c] /= n;
      } else {
        // Destination finer than source: fall back to the nearest
        // source cell so no cell is left undefined.
        const double* from = src.cell(src_index(i, src.h, h), src_index(j, src.w, w));
        for (int c = 0; c < src.channels; ++c) to[c] = from[c];
      }
    }
  }
  return dst;
}

namespace {

double joint_distance(std::span<const double> sem_feat, std::span<const double> pix_feat,
                      const CodebookPair& cb, int v) {
  double d = 0.0;
  if (cb.w_sem != 0.0) {
    auto entry = cb.sem_entry(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < entry.size(); ++i) {
      double diff = sem_feat[i] - entry[i];
      acc += diff * diff;
    }
    d += cb.w_sem * acc;
  }
  if (cb.w_pix != 0.0) {
    auto entry = cb.pix_entry(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < entry.size(); ++i) {
      double diff = pix_feat[i] - entry[i];
      acc += diff * diff;
    }
    d += cb.w_pix * acc;
  }
  return d;
}

// Weighted distance of a pixel-only query (w_sem side skipped entirely).
double pix_distance(const double* feat, const CodebookPair& cb, int v) {
  auto entry = cb.pix_entry(v);
  double acc = 0.0;
  for (std::size_t i = 0; i < entry.size(); ++i) {
    double diff = feat[i] - entry[i];
    acc += diff * diff;
  }
  return cb.w_pix * acc;
}

std::int32_t nearest_pix(const double* feat, const CodebookPair& cb) {
  std::int32_t best = 0;
  double best_d = pix_distance(feat, cb, 0);
  for (int v = 1; v < cb.size; ++v) {
    double d = pix_distance(feat, cb, v);
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

}  // namespace

std::int32_t quantize_joint(std::span<const double> sem_feat,
                            std::span<const double> pix_feat,
                            const CodebookPair& cb) {
  if (cb.size < 1) throw std::invalid_argument("quantize_joint: empty codebook");
  if (cb.w_sem != 0.0 && static_cast<int>(sem_feat.size()) != cb.sem_dim) {
    throw std::invalid_argument("quantize_joint: semantic feature dim mismatch");
  }
  if (cb.w_pix != 0.0 && static_cast<int>(pix_feat.size()) != cb.pix_dim) {
    throw std::invalid_argument("quantize_joint: pixel feature dim mismatch");
  }
  std::int32_t best = 0;
  double best_d = joint_distance(sem_feat, pix_feat, cb, 0);
  for (int v = 1; v < cb.size; ++v) {
    double d = joint_distance(sem_feat, pix_feat, cb, v);
    if (d < best_d) {  // strict: ties keep the smaller index
      best_d = d;
      best = v;
    }
  }
  return best;
}

namespace {

void check_encode_args(const FeatureMap& features, const schedule::ScaleSchedule& sched,
                       const CodebookPair& cb, const char* who) {
  if (features.channels != cb.pix_dim) {
    throw std::invalid_argument(std::string(who) + ": feature channels must match pix_dim");
  }
  if (sched.steps.empty()) {
    throw std::invalid_argument(std::string(who) + ": empty schedule");
  }
  if (cb.size < 1) {
    throw std::invalid_argument(std::string(who) + ": empty codebook");
  }
}

}  // namespace

MultiScaleCodes encode_multiscale(const FeatureMap& features,
                                  const schedule::ScaleSchedule& sched,
                                  const CodebookPair& cb) {
  check_encode_args(features, sched, cb, "encode_multiscale");
  MultiScaleCodes out;
  FeatureMap residual = features;
  for (const auto& step : sched.steps) {
    FeatureMap down = downsample_area(residual, step.h, step.w);
    CodeGrid grid{step.h, step.w, {}};
    grid.codes.resize(static_cast<std::size_t>(step.h) * step.w);
    for (int i = 0; i < step.h; ++i) {
      for (int j = 0; j < step.w; ++j) {
        grid.codes[static_cast<std::size_t>(i) * step.w + j] = nearest_pix(down.cell(i, j), cb);
      }
    }
    FeatureMap approx = residual_features(grid, cb, features.h, features.w);
    for (std::size_t n = 0; n < residual.values.size(); ++n) {
      residual.values[n] -= approx.values[n];
    }
    out.scales.push_back(std::move(grid));
  }
  return out;
}

FeatureMap decode_multiscale(const MultiScaleCodes& codes, const CodebookPair& cb,
                             int h, int w) {
  check_grid("decode_multiscale", h, w);
  FeatureMap sum(h, w, cb.pix_dim);
  for (const auto& grid : codes.scales) {
    FeatureMap part = residual_features(grid, cb, h, w);
    for (std::size_t n = 0; n < sum.values.size(); ++n) sum.values[n] += part.values[n];
  }
  return sum;
}

FeatureMap residual_features(const CodeGrid& grid, const CodebookPair& cb, int h, int w) {
  if (static_cast<std::size_t>(grid.h) * grid.w != grid.codes.size()) {
    throw std::invalid_argument("residual_features: code count does not match grid dims");
  }
  FeatureMap looked(grid.h, grid.w, cb.pix_dim);
  for (int i = 0; i < grid.h; ++i) {
    for (int j = 0; j < grid.w; ++j) {
      std::int32_t v = grid.codes[static_cast<std::size_t>(i) * grid.w + j];
      if (v < 0 || v >= cb.size) {
        throw std::invalid_argument("residual_features: code index out of range");
      }
      auto entry = cb.pix_entry(v);
      double* to = looked.cell(i, j);
      for (int c = 0; c < cb.pix_dim; ++c) to[c] = entry[c];
    }
  }
  return upsample_nearest(looked, h, w);
}

SelfCorrectionResult self_correct_encode(const FeatureMap& features,
                                         const schedule::ScaleSchedule& sched,
                                         const CodebookPair& cb, int neighbor_count,
                                         double token_fraction, std::uint64_t seed) {
  check_encode_args(features, sched, cb, "self_correct_encode");
  if (neighbor_count < 1 || neighbor_count > cb.size) {
    throw std::invalid_argument("self_correct_encode: neighbor_count out of range");
  }
  if (!(token_fraction >= 0.0 && token_fraction <= 1.0)) {
    throw std::invalid_argument("self_correct_encode: token_fraction outside [0, 1]");
  }

  SelfCorrectionResult out;
  Rng rng(seed);
  FeatureMap residual = features;
  std::vector<double> dist(cb.size);
  std::vector<int> order(cb.size);
  std::vector<double> weights(neighbor_count);

  for (const auto& step : sched.steps) {
    FeatureMap down = downsample_area(residual, step.h, step.w);
    CodeGrid input{step.h, step.w, {}};
    CodeGrid target{step.h, step.w, {}};
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(step.h) * step.w, 0);
    input.codes.resize(mask.size());
    target.codes.resize(mask.size());

    for (int i = 0; i < step.h; ++i) {
      for (int j = 0; j < step.w; ++j) {
        std::size_t n = static_cast<std::size_t>(i) * step.w + j;
        const double* feat = down.cell(i, j);
        for (int v = 0; v < cb.size; ++v) dist[v] = pix_distance(feat, cb, v);

        // Top-1 is always the target. A partial sort would do; codebooks
        // here are small enough that full argsort is not worth avoiding.
        for (int v = 0; v < cb.size; ++v) order[v] = v;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return dist[a] < dist[b]; });
        target.codes[n] = order[0];

        std::int32_t chosen = order[0];
        if (rng.next_bernoulli(token_fraction)) {
          mask[n] = 1;
          double tau = 0.0;
          for (int r = 0; r < neighbor_count; ++r) tau += dist[order[r]];
          tau /= neighbor_count;
          if (tau > 0.0) {
            for (int r = 0; r < neighbor_count; ++r) {
              weights[r] = std::exp(-dist[order[r]] / tau);
            }
          } else {
            // All candidates are exact matches; pick uniformly.
            for (int r = 0; r < neighbor_count; ++r) weights[r] = 1.0;
          }
          chosen = order[rng.next_weighted(weights)];
        }
        input.codes[n] = chosen;
      }
    }

    // The drawn code is what the next scale sees.
    FeatureMap approx = residual_features(input, cb, features.h, features.w);
    for (std::size_t n = 0; n < residual.values.size(); ++n) {
      residual.values[n] -= approx.values[n];
    }
    out.input_codes.scales.push_back(std::move(input));
    out.target_codes.scales.push_back(std::move(target));
    out.corrupted.push_back(std::move(mask));
  }
  return out;
}

}  // namespace nextscale::quant
