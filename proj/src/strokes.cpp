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

#include "sketchsmoke/strokes.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sketchsmoke/error.hpp"

namespace sks {

using nlohmann::json;

StrokeSet parse_strokes_json(const std::string& text) {
  StrokeSet set;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::kParse, "strokes JSON must be an object");
    if (j.contains("domain")) {
      const auto d = j.at("domain").get<std::vector<double>>();
      if (d.size() != 2 || !(d[0] > 0.0) || !(d[1] > 0.0) || !std::isfinite(d[0]) ||
          !std::isfinite(d[1])) {
        throw Error(ErrorCode::kParse, "domain must be [Lx, Ly] with positive extents");
      }
      set.domain = {d[0], d[1]};
    }
    if (!j.contains("strokes")) return set;
    const json& arr = j.at("strokes");
    if (!arr.is_array()) throw Error(ErrorCode::kParse, "strokes must be an array");
    for (std::size_t s = 0; s < arr.size(); ++s) {
      const json& sj = arr[s];
      Stroke stroke;
      stroke.speed = sj.value("speed", 1.0);
      for (const auto& pt : sj.at("points")) {
        const auto xy = pt.get<std::vector<double>>();
        if (xy.size() != 2 || !std::isfinite(xy[0]) || !std::isfinite(xy[1])) {
          throw Error(ErrorCode::kParse, "stroke " + std::to_string(s) + ": points must be [x, y]");
        }
        stroke.points.push_back({xy[0], xy[1]});
      }
      if (stroke.points.empty()) {
        throw Error(ErrorCode::kParse, "stroke " + std::to_string(s) + " has no points");
      }
      if (!std::isfinite(stroke.speed)) {
        throw Error(ErrorCode::kParse, "stroke " + std::to_string(s) + ": speed must be finite");
      }
      set.strokes.push_back(std::move(stroke));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("invalid strokes JSON: ") + e.what());
  }
  return set;
}

std::string strokes_to_json(const StrokeSet& set) {
  json j;
  j["domain"] = {set.domain.x, set.domain.y};
  j["strokes"] = json::array();
  for (const Stroke& s : set.strokes) {
    json pts = json::array();
    for (const Vec2& p : s.points) pts.push_back({p.x, p.y});
    j["strokes"].push_back({{"points", std::move(pts)}, {"speed", s.speed}});
  }
  return j.dump();
}

StrokeSet read_strokes(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kIo, "file not found: " + path);
  }
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_strokes_json(buffer.str());
}

void write_strokes(const std::string& path, const StrokeSet& strokes) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path);
  out << strokes_to_json(strokes) << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

void validate_for_fit(const StrokeSet& set) {
  for (std::size_t s = 0; s < set.strokes.size(); ++s) {
    const Stroke& stroke = set.strokes[s];
    const std::string name = "stroke " + std::to_string(s);
    if (stroke.points.size() < 2) {
      throw Error(ErrorCode::kInvalidArgument, name + " needs at least 2 points");
    }
    if (!(stroke.speed > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, name + " speed must be positive");
    }
    for (std::size_t k = 0; k < stroke.points.size(); ++k) {
      const Vec2 p = stroke.points[k];
      if (p.x < 0.0 || p.y < 0.0 || p.x > set.domain.x || p.y > set.domain.y) {
        throw Error(ErrorCode::kInvalidArgument, name + " leaves the domain");
      }
      if (k > 0 && p.x == stroke.points[k - 1].x && p.y == stroke.points[k - 1].y) {
        throw Error(ErrorCode::kInvalidArgument, name + " repeats a point");
      }
    }
  }
}

StrokeSet reversed(const StrokeSet& set) {
  StrokeSet out = set;
  for (Stroke& s : out.strokes) std::reverse(s.points.begin(), s.points.end());
  return out;
}

}  // namespace sks
