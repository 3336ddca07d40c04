#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nextscale/position.hpp"

using namespace nextscale;
using namespace nextscale::position;

TEST_CASE("text positions sit on the diagonal") {
  CHECK(text_position(0) == PositionTriple{0, 0, 0});
  CHECK(text_position(3) == PositionTriple{3, 3, 3});
  CHECK(text_position(17) == PositionTriple{17, 17, 17});
  CHECK_THROWS_AS(text_position(-1), std::invalid_argument);
}

TEST_CASE("vision positions follow the normalized grid formula") {
  SUBCASE("2x2 at range 2") {
    auto grid = vision_positions(2, 2, 1.0, 2.0);
    REQUIRE(grid.size() == 4);
    CHECK(grid[0] == PositionTriple{0.5, 0.5, 1.0});
    CHECK(grid[1] == PositionTriple{0.5, 1.5, 1.0});  // row-major: j varies first
    CHECK(grid[2] == PositionTriple{1.5, 0.5, 1.0});
    CHECK(grid[3] == PositionTriple{1.5, 1.5, 1.0});
  }
  SUBCASE("1x1 centers the range") {
    auto grid = vision_positions(1, 1, 0.0, 64.0);
    REQUIRE(grid.size() == 1);
    CHECK(grid[0].x == doctest::Approx(32.0));
    CHECK(grid[0].y == doctest::Approx(32.0));
    CHECK(grid[0].s == 0.0);
  }
  SUBCASE("16x16 and 32x32 share the same range") {
    auto g16 = vision_positions(16, 16, 11.0, 64.0);
    auto g32 = vision_positions(32, 32, 15.0, 64.0);
    CHECK(g16.front().x == doctest::Approx(2.0));
    CHECK(g16.back().x == doctest::Approx(62.0));
    CHECK(g32.front().x == doctest::Approx(1.0));
    CHECK(g32.back().x == doctest::Approx(63.0));
  }
  CHECK_THROWS_AS(vision_positions(0, 4, 0.0, 64.0), std::invalid_argument);
  CHECK_THROWS_AS(vision_positions(4, 4, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("square grids cover exactly [0, range]") {
  // Tall or wide grids stretch one axis past the range (a 2x1 grid
  // reaches 1.5/sqrt(2) of it), so the tight [0, C] box is a
  // square-grid property; general grids obey the sqrt(h/w) bound.
  for (int side = 1; side <= 64; ++side) {
    auto grid = vision_positions(side, side, 0.0, 64.0);
    for (const auto& p : grid) {
      CHECK(p.x >= 0.0);
      CHECK(p.x <= 64.0);
      CHECK(p.y >= 0.0);
      CHECK(p.y <= 64.0);
    }
  }
  for (int h : {1, 2, 5, 17, 64}) {
    for (int w : {1, 3, 8, 33}) {
      auto grid = vision_positions(h, w, 0.0, 64.0);
      double x_bound = 64.0 * std::sqrt(static_cast<double>(h) / w) + 1e-9;
      double y_bound = 64.0 * std::sqrt(static_cast<double>(w) / h) + 1e-9;
      for (const auto& p : grid) {
        CHECK(p.x <= x_bound);
        CHECK(p.y <= y_bound);
      }
    }
  }
}

TEST_CASE("grid means have the closed form") {
  for (auto [h, w] : {std::pair{3, 5}, {16, 16}, {7, 2}}) {
    auto grid = vision_positions(h, w, 2.0, 64.0);
    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : grid) {
      mx += p.x;
      my += p.y;
    }
    mx /= grid.size();
    my /= grid.size();
    double unit = 64.0 / std::sqrt(static_cast<double>(h) * w);
    CHECK(mx == doctest::Approx(unit * h / 2.0));
    CHECK(my == doctest::Approx(unit * w / 2.0));
  }
}

namespace {

engine::ImageSegment make_image(std::initializer_list<schedule::ScaleStep> steps) {
  engine::ImageSegment image;
  for (const auto& s : steps) {
    image.sched.steps.push_back(s);
    quant::CodeGrid grid{s.h, s.w, {}};
    grid.codes.assign(static_cast<std::size_t>(s.h) * s.w, 0);
    image.codes.scales.push_back(grid);
  }
  return image;
}

}  // namespace

TEST_CASE("sequence positions: counter resumes past image coordinates") {
  engine::InterleavedSequence seq;
  seq.segments.emplace_back(engine::TextSegment{{7}});          // "a"
  seq.segments.emplace_back(make_image({{2, 2}}));              // one 2x2 scale
  seq.segments.emplace_back(engine::TextSegment{{8}});          // "b"

  auto triples = assign_sequence_positions(seq, 2.0);
  REQUIRE(triples.size() == 1 + 4 + 1);
  CHECK(triples[0] == PositionTriple{0, 0, 0});
  CHECK(triples[1] == PositionTriple{0.5, 0.5, 0});
  // Largest image coordinate is 1.5, so "b" resumes at ceil(1.5)+1.
  CHECK(triples[5] == PositionTriple{3, 3, 3});
}

TEST_CASE("sequence positions: pure text and empty input") {
  engine::InterleavedSequence seq;
  seq.segments.emplace_back(engine::TextSegment{{1, 2, 3, 4}});
  auto triples = assign_sequence_positions(seq);
  REQUIRE(triples.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(triples[i] == PositionTriple{static_cast<double>(i), static_cast<double>(i),
                                       static_cast<double>(i)});
  }
  CHECK(assign_sequence_positions(engine::InterleavedSequence{}).empty());
}

TEST_CASE("sequence positions: text counter strictly increases across images") {
  engine::InterleavedSequence seq;
  seq.segments.emplace_back(engine::TextSegment{{0, 1}});
  seq.segments.emplace_back(make_image({{1, 1}, {2, 2}}));
  seq.segments.emplace_back(engine::TextSegment{{2}});
  seq.segments.emplace_back(make_image({{1, 1}}));
  seq.segments.emplace_back(engine::TextSegment{{3, 4}});

  auto triples = assign_sequence_positions(seq, 64.0);
  double last_text = -1.0;
  for (const auto& p : triples) {
    if (p.x == p.y && p.y == p.s) {  // text triple
      CHECK(p.x > last_text);
      last_text = p.x;
    }
  }
  // Scale indices restart per image.
  CHECK(triples[2].s == 0.0);   // first image, first scale
  CHECK(triples[3].s == 1.0);   // first image, second scale
  CHECK(triples[8].s == 0.0);   // second image
}

TEST_CASE("scale length embedding") {
  SUBCASE("dim 2 is a single sin/cos pair") {
    auto e = scale_length_embedding(5, 2);
    REQUIRE(e.size() == 2);
    CHECK(e[0] == doctest::Approx(std::sin(5.0)));
    CHECK(e[1] == doctest::Approx(std::cos(5.0)));
  }
  SUBCASE("frequency ladder uses base 10000") {
    auto e = scale_length_embedding(12, 8);
    REQUIRE(e.size() == 8);
    for (int t = 0; 2 * t < 8; ++t) {
      double freq = std::pow(10000.0, -2.0 * t / 8.0);
      CHECK(e[2 * t] == doctest::Approx(std::sin(12.0 * freq)));
      CHECK(e[2 * t + 1] == doctest::Approx(std::cos(12.0 * freq)));
    }
  }
  SUBCASE("different scale counts are distinguishable") {
    auto a = scale_length_embedding(12, 16);
    auto b = scale_length_embedding(16, 16);
    double dist = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dist += (a[i] - b[i]) * (a[i] - b[i]);
    CHECK(dist > 1e-3);
  }
  CHECK_THROWS_AS(scale_length_embedding(5, 3), std::invalid_argument);
  CHECK_THROWS_AS(scale_length_embedding(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(scale_length_embedding(0, 4), std::invalid_argument);
}
