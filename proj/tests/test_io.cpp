// Copyright 2026 The SketchSmoke Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iterator>

#include "doctest.h"
#include "sketchsmoke/error.hpp"
#include "sketchsmoke/image.hpp"
#include "sketchsmoke/strokes.hpp"
#include "test_util.hpp"

using namespace sks;

TEST_CASE("png round trip") {
  for (int trial = 0; trial < 10; ++trial) {
    const int w = 1 + static_cast<int>(sks::testing::uniform(0, 40));
    const int h = 1 + static_cast<int>(sks::testing::uniform(0, 40));
    GrayImage img(w, h, 0);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(sks::testing::uniform(0, 256));
    CHECK(decode_png(encode_png(img)) == img);
  }
}

TEST_CASE("png encoding is deterministic and carries the signature") {
  GrayImage img(16, 9, 255);
  img.at(3, 4) = 0;
  const auto a = encode_png(img);
  CHECK(a == encode_png(img));
  REQUIRE(a.size() > 8);
  CHECK(a[0] == 0x89);
  CHECK(a[1] == 'P');
  CHECK(a[2] == 'N');
  CHECK(a[3] == 'G');
}

TEST_CASE("png errors") {
  const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK_THROWS_AS(decode_png(junk), Error);
  GrayImage img(4, 4, 0);
  auto bytes = encode_png(img);
  bytes.resize(bytes.size() / 2);
  CHECK_THROWS_AS(decode_png(bytes), Error);
  CHECK_THROWS_AS(encode_png(GrayImage{}), Error);
  CHECK_THROWS_AS(write_png("/nonexistent-dir/x.png", img), Error);
}

TEST_CASE("png file round trip") {
  sks::testing::ScratchDir dir("png");
  GrayImage img(5, 3, 17);
  img.at(4, 2) = 200;
  write_png(dir.file("a.png"), img);
  std::ifstream in(dir.file("a.png"), std::ios::binary);
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
  CHECK(decode_png(bytes) == img);
}

TEST_CASE("cell field rendering puts the domain top in row 0") {
  ScalarField f(Grid{2, 2, 1.0}, Siting::kCell);
  f.at(0, 1) = 1.0;  // top-left cell
  f.at(1, 0) = 0.5;
  const GrayImage img = render_cell_field(f);
  CHECK(img.width == 2);
  CHECK(img.height == 2);
  CHECK(img.at(0, 0) == 255);
  CHECK(img.at(1, 1) == 128);
  CHECK(img.at(0, 1) == 0);
  CHECK(img.at(1, 0) == 0);
}

TEST_CASE("strokes JSON round trip") {
  StrokeSet set;
  set.domain = {2.0, 1.5};
  set.strokes.push_back({{{0.1, 0.2}, {0.3, 0.4}}, 2.5});
  set.strokes.push_back({{{1.9, 1.4}}, 1.0});
  const StrokeSet back = parse_strokes_json(strokes_to_json(set));
  CHECK(back.domain.x == 2.0);
  CHECK(back.domain.y == 1.5);
  REQUIRE(back.strokes.size() == 2);
  CHECK(back.strokes[0].speed == 2.5);
  CHECK(back.strokes[0].points[1].y == 0.4);
  CHECK(back.strokes[1].points.size() == 1);
  CHECK(strokes_to_json(back) == strokes_to_json(set));

  sks::testing::ScratchDir dir("strokes");
  write_strokes(dir.file("s.json"), set);
  CHECK(strokes_to_json(read_strokes(dir.file("s.json"))) == strokes_to_json(set));
}

TEST_CASE("strokes JSON defaults and errors") {
  const StrokeSet d = parse_strokes_json(R"({"strokes": [{"points": [[0.5, 0.5], [0.6, 0.5]]}]})");
  CHECK(d.domain.x == 1.0);
  CHECK(d.strokes[0].speed == 1.0);
  CHECK(parse_strokes_json("{}").strokes.empty());

  auto code = [](const char* text) {
    try {
      parse_strokes_json(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode{};
  };
  CHECK(code("[1, 2]") == ErrorCode::kParse);
  CHECK(code("{") == ErrorCode::kParse);
  CHECK(code(R"({"domain": [1.0]})") == ErrorCode::kParse);
  CHECK(code(R"({"domain": [0.0, 1.0]})") == ErrorCode::kParse);
  CHECK(code(R"({"strokes": {}})") == ErrorCode::kParse);
  CHECK(code(R"({"strokes": [{"points": []}]})") == ErrorCode::kParse);
  CHECK(code(R"({"strokes": [{"points": [[1, 2, 3]]}]})") == ErrorCode::kParse);
  CHECK(code(R"({"strokes": [{}]})") == ErrorCode::kParse);
  CHECK_THROWS_AS(read_strokes("/nonexistent/strokes.json"), Error);
}

TEST_CASE("reversing strokes twice is the identity") {
  StrokeSet set;
  set.strokes.push_back({{{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.1}}, 1.0});
  const StrokeSet r = reversed(set);
  CHECK(r.strokes[0].points[0].x == 0.5);
  CHECK(strokes_to_json(reversed(r)) == strokes_to_json(set));
}
