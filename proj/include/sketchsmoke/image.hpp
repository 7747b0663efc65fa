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

#ifndef SKETCHSMOKE_IMAGE_HPP_
#define SKETCHSMOKE_IMAGE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sketchsmoke/fields.hpp"

namespace sks {

// 8-bit grayscale, row 0 at the top.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill) : width(w), height(h), pixels(std::size_t(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

std::vector<std::uint8_t> encode_png(const GrayImage& image);
GrayImage decode_png(std::span<const std::uint8_t> bytes);
void write_png(const std::string& path, const GrayImage& image);

// Cell field rendered one pixel per cell with the domain top in row 0,
// after normalize01 scaling to [0, 255].
GrayImage render_cell_field(const ScalarField& field);

}  // namespace sks

#endif  // SKETCHSMOKE_IMAGE_HPP_
