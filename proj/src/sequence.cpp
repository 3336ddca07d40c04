#include "nextscale/sequence.hpp"

namespace nextscale::engine {

std::vector<std::int32_t> assemble(const InterleavedSequence& seq, const Vocabulary& vocab) {
  if (vocab.text_size < 0 || vocab.visual_size < 1) {
    throw std::invalid_argument("assemble: vocabulary needs visual_size >= 1");
  }
  std::vector<std::int32_t> out;
  for (const auto& segment : seq.segments) {
    if (const auto* text = std::get_if<TextSegment>(&segment)) {
      for (std::int32_t t : text->tokens) {
        if (t < 0 || t >= vocab.text_size) {
          throw std::invalid_argument("assemble: text token outside [0, text_size)");
        }
        out.push_back(t);
      }
    } else {
      const auto& image = std::get<ImageSegment>(segment);
      out.push_back(vocab.boi());
      for (const auto& grid : image.codes.scales) {
        for (std::int32_t code : grid.codes) {
          if (code < 0 || code >= vocab.visual_size) {
            throw std::invalid_argument("assemble: visual code outside [0, visual_size)");
          }
          out.push_back(vocab.visual_base() + code);
        }
      }
      out.push_back(vocab.eoi());
    }
  }
  return out;
}

namespace {

// Recover grid shapes from a visual token count: the first built-in
// schedule with a step prefix summing to exactly `count` wins.
const schedule::ScaleSchedule* match_prefix(long long count, std::size_t* prefix_len) {
  for (const auto& s : schedule::builtin_schedules()) {
    long long sum = 0;
    for (std::size_t k = 0; k < s.steps.size(); ++k) {
      sum += s.steps[k].area();
      if (sum == count) {
        *prefix_len = k + 1;
        return &s;
      }
      if (sum > count) break;
    }
  }
  return nullptr;
}

}  // namespace

InterleavedSequence parse(std::span<const std::int32_t> tokens, const Vocabulary& vocab) {
  InterleavedSequence seq;
  TextSegment pending;
  std::size_t i = 0;

  auto flush_text = [&] {
    if (!pending.tokens.empty()) {
      seq.segments.emplace_back(std::move(pending));
      pending = TextSegment{};
    }
  };

  while (i < tokens.size()) {
    std::int32_t t = tokens[i];
    if (t == vocab.boi()) {
      flush_text();
      std::size_t begin = i + 1;
      std::size_t end = begin;
      while (end < tokens.size() && tokens[end] != vocab.eoi()) {
        if (tokens[end] == vocab.boi()) {
          throw ParseError("parse: nested image-begin marker", end);
        }
        if (tokens[end] < vocab.visual_base() || tokens[end] >= vocab.boi()) {
          throw ParseError("parse: non-visual token inside image", end);
        }
        ++end;
      }
      if (end == tokens.size()) {
        throw ParseError("parse: image-begin without matching image-end", i);
      }
      long long count = static_cast<long long>(end - begin);
      std::size_t prefix_len = 0;
      const auto* sched = match_prefix(count, &prefix_len);
      if (sched == nullptr) {
        throw ParseError("parse: visual token count " + std::to_string(count) +
                             " matches no schedule prefix",
                         begin);
      }
      ImageSegment image;
      image.sched = *sched;
      image.sched.steps.assign(sched->steps.begin(), sched->steps.begin() + prefix_len);
      std::size_t pos = begin;
      for (const auto& step : image.sched.steps) {
        quant::CodeGrid grid{step.h, step.w, {}};
        grid.codes.reserve(step.area());
        for (long long n = 0; n < step.area(); ++n) {
          grid.codes.push_back(tokens[pos++] - vocab.visual_base());
        }
        image.codes.scales.push_back(std::move(grid));
      }
      seq.segments.emplace_back(std::move(image));
      i = end + 1;
    } else if (t == vocab.eoi()) {
      throw ParseError("parse: image-end without image-begin", i);
    } else if (t >= 0 && t < vocab.text_size) {
      pending.tokens.push_back(t);
      ++i;
    } else if (t >= vocab.visual_base() && t < vocab.boi()) {
      throw ParseError("parse: visual token outside image markers", i);
    } else {
      throw ParseError("parse: token id outside vocabulary", i);
    }
  }
  flush_text();
  return seq;
}

}  // namespace nextscale::engine
