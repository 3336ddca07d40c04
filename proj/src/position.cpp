#include "nextscale/position.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nextscale::position {

PositionTriple text_position(long long index) {
  if (index < 0) throw std::invalid_argument("text_position: index must be non-negative");
  double v = static_cast<double>(index);
  return {v, v, v};
}

std::vector<PositionTriple> vision_positions(int h, int w, double scale_index,
                                             double range) {
  if (h < 1 || w < 1) throw std::invalid_argument("vision_positions: grid dims must be positive");
  if (!(range > 0.0)) throw std::invalid_argument("vision_positions: range must be positive");
  double unit = range / std::sqrt(static_cast<double>(h) * w);
  std::vector<PositionTriple> out;
  out.reserve(static_cast<std::size_t>(h) * w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      out.push_back({unit * (i + 0.5), unit * (j + 0.5), scale_index});
    }
  }
  return out;
}

std::vector<PositionTriple> assign_sequence_positions(const engine::InterleavedSequence& seq,
                                                      double range) {
  std::vector<PositionTriple> out;
  long long counter = 0;
  double max_seen = -1.0;  // largest coordinate emitted so far, any axis

  for (const auto& segment : seq.segments) {
    if (const auto* text = std::get_if<engine::TextSegment>(&segment)) {
      for (std::size_t n = 0; n < text->tokens.size(); ++n) {
        out.push_back(text_position(counter));
        max_seen = std::max(max_seen, static_cast<double>(counter));
        ++counter;
      }
    } else {
      const auto& image = std::get<engine::ImageSegment>(segment);
      for (std::size_t k = 0; k < image.codes.scales.size(); ++k) {
        const auto& grid = image.codes.scales[k];
        auto triples = vision_positions(grid.h, grid.w, static_cast<double>(k), range);
        for (const auto& t : triples) {
          max_seen = std::max({max_seen, t.x, t.y, t.s});
          out.push_back(t);
        }
      }
      counter = static_cast<long long>(std::ceil(max_seen)) + 1;
    }
  }
  return out;
}

std::vector<double> scale_length_embedding(int num_scales, int dim) {
  if (dim < 2 || dim % 2 != 0) {
    throw std::invalid_argument("scale_length_embedding: dim must be even and positive");
  }
  if (num_scales < 1) {
    throw std::invalid_argument("scale_length_embedding: num_scales must be >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(dim));
  for (int t = 0; 2 * t < dim; ++t) {
    double freq = std::pow(10000.0, -2.0 * t / dim);
    out[2 * t] = std::sin(num_scales * freq);
    out[2 * t + 1] = std::cos(num_scales * freq);
  }
  return out;
}

}  // namespace nextscale::position
