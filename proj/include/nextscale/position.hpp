#pragma once

#include <vector>

#include "nextscale/sequence.hpp"

namespace nextscale::position {

inline constexpr double kDefaultRange = 64.0;

// One rotary position: two spatial axes and a scale axis. Text tokens
// sit on the diagonal (t, t, t); vision tokens spread over [0, C] per
// axis (square grids; tall or wide grids stretch one axis by up to
// sqrt(h/w)) with the step index on the scale axis.
struct PositionTriple {
  double x = 0.0;
  double y = 0.0;
  double s = 0.0;

  friend bool operator==(const PositionTriple&, const PositionTriple&) = default;
};

PositionTriple text_position(long long index);

// Row-major grid of triples for one h x w step at scale index s:
// entry (i, j) = (C/sqrt(h*w) * (i+0.5), C/sqrt(h*w) * (j+0.5), s).
// The shared 1/sqrt(h*w) normalizer keeps coordinates comparable
// across steps of any size.
std::vector<PositionTriple> vision_positions(int h, int w, double scale_index,
                                             double range = kDefaultRange);

// Triples for every content token of an interleaved sequence, in
// order: text tokens count along the diagonal; each image emits
// vision_positions per scale (scale indices restart at 0 per image);
// after an image the text counter resumes at
// ceil(max coordinate emitted so far) + 1 so no later text index can
// collide with an image coordinate. Begin/end image markers carry no
// position and are not represented here.
std::vector<PositionTriple> assign_sequence_positions(const engine::InterleavedSequence& seq,
                                                      double range = kDefaultRange);

// Sinusoidal embedding of a scale count: entry 2t is
// sin(n / 10000^(2t/dim)), entry 2t+1 the matching cosine. dim must be
// even and positive, num_scales >= 1 (std::invalid_argument otherwise).
// Lets a model distinguish a 12-step prefix from a 16-step one.
std::vector<double> scale_length_embedding(int num_scales, int dim);

}  // namespace nextscale::position
