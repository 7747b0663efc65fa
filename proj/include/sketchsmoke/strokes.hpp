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

// Directed vector strokes and their JSON form:
//   {"domain":[Lx,Ly],"strokes":[{"points":[[x,y],...],"speed":s},...]}
// Point order is the direction of travel.

#ifndef SKETCHSMOKE_STROKES_HPP_
#define SKETCHSMOKE_STROKES_HPP_

#include <string>
#include <vector>

#include "sketchsmoke/fields.hpp"

namespace sks {

struct Stroke {
  std::vector<Vec2> points;
  double speed = 1.0;
};

struct StrokeSet {
  Vec2 domain{1.0, 1.0};
  std::vector<Stroke> strokes;
};

// Parsing only checks structure (numbers finite, >= 1 point per stroke).
StrokeSet parse_strokes_json(const std::string& text);
std::string strokes_to_json(const StrokeSet& strokes);

StrokeSet read_strokes(const std::string& path);
void write_strokes(const std::string& path, const StrokeSet& strokes);

/// Checks the stricter invariants needed for fitting: >= 2 points per stroke,
/// no repeated consecutive points, all points inside the domain, speed > 0.
/// Throws Error(kInvalidArgument) naming the offending stroke.
void validate_for_fit(const StrokeSet& strokes);

/// Same strokes traversed in the opposite direction.
StrokeSet reversed(const StrokeSet& strokes);

}  // namespace sks

#endif  // SKETCHSMOKE_STROKES_HPP_
