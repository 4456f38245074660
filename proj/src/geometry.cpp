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
#include "openset/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace openset {

bool BoundingBox::valid() const noexcept {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(width) &&
         std::isfinite(height) && width > 0.0 && height > 0.0;
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double union_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  return a.area() + b.area() - intersection_area(a, b);
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

double modified_jaccard(const BoundingBox& gt,
                        const BoundingBox& det) noexcept {
  const double inter = intersection_area(gt, det);
  if (inter <= 0.0) return 0.0;
  const double quarter = 0.25 * gt.area();
  const double denom =
      quarter > inter ? (quarter - inter) + det.area() : det.area();
  // Rounding can push the ratio a few ulps over 1 for contained boxes.
  return std::min(1.0, inter / denom);
}

BoundingBox scale_about_center(const BoundingBox& box, double factor) noexcept {
  const double w = box.width * factor;
  const double h = box.height * factor;
  return {box.center_x() - 0.5 * w, box.center_y() - 0.5 * h, w, h};
}

}  // namespace openset
