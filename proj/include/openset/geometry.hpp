/* Copyright 2026 The openset-eval Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <compare>

namespace openset {

// Axis-aligned rectangle in image pixel coordinates. Boxes are treated as
// half-open [x, x + width) x [y, y + height), so edge-touching boxes overlap
// with zero area. Width and height are strictly positive for any box that
// made it past the parsers.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const noexcept { return x + width; }
  double bottom() const noexcept { return y + height; }
  double area() const noexcept { return width * height; }
  double center_x() const noexcept { return x + 0.5 * width; }
  double center_y() const noexcept { return y + 0.5 * height; }

  // True when all coordinates are finite and both extents are positive.
  bool valid() const noexcept;

  friend auto operator<=>(const BoundingBox&, const BoundingBox&) = default;
};

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept;

double union_area(const BoundingBox& a, const BoundingBox& b) noexcept;

// Standard intersection over union; symmetric.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

// Overlap of a detection with a ground-truth region whose union term is
// relaxed for detections smaller than the ground truth:
//
//   J(G, D) = |G n D| / (max(|G| / 4, |G n D|) + |D| - |G n D|)
//
// A detection contained in G and covering at least a quarter of it scores 1.
// Not symmetric: `gt` must be the ground-truth box.
double modified_jaccard(const BoundingBox& gt, const BoundingBox& det) noexcept;

// Scales `box` about its center by `factor` in both dimensions.
BoundingBox scale_about_center(const BoundingBox& box, double factor) noexcept;

// Minimum acceptance overlap for a detection to count as a face.
inline constexpr double kOverlapAcceptance = 0.5;

}  // namespace openset
