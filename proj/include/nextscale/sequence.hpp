#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nextscale/quantizer.hpp"
#include "nextscale/schedule.hpp"

namespace nextscale::engine {

// Unified token id layout:
//   [0, text_size)                      text tokens
//   [text_size, text_size+visual_size)  visual codes, offset by text_size
//   text_size+visual_size               image-begin marker
//   text_size+visual_size+1             image-end marker
struct Vocabulary {
  std::int32_t text_size = 0;
  std::int32_t visual_size = 0;

  std::int32_t visual_base() const { return text_size; }
  std::int32_t boi() const { return text_size + visual_size; }
  std::int32_t eoi() const { return boi() + 1; }
  std::int32_t total() const { return text_size + visual_size + 2; }
};

struct TextSegment {
  std::vector<std::int32_t> tokens;  // text ids, already in [0, text_size)
};

// An image is its multi-scale codes plus the schedule describing their
// grids. The schedule may be a truncation of a built-in.
struct ImageSegment {
  quant::MultiScaleCodes codes;
  schedule::ScaleSchedule sched;
};

struct InterleavedSequence {
  std::vector<std::variant<TextSegment, ImageSegment>> segments;
};

struct ParseError : std::runtime_error {
  std::size_t offset;  // token position the error was detected at
  ParseError(std::string msg, std::size_t offset_)
      : std::runtime_error(std::move(msg)), offset(offset_) {}
};

// Flatten to token ids: text as-is, each image as boi, the code grids
// scale by scale in row-major order (offset by visual_base), then eoi.
std::vector<std::int32_t> assemble(const InterleavedSequence& seq, const Vocabulary& vocab);

// Inverse of assemble. The visual token count between one boi/eoi pair
// is matched against prefixes of the built-in schedules (table order,
// first match wins) to recover grid shapes. Throws ParseError on ids
// outside the vocabulary, unbalanced or nested markers, or a count no
// schedule prefix produces.
InterleavedSequence parse(std::span<const std::int32_t> tokens, const Vocabulary& vocab);

}  // namespace nextscale::engine
