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

// Brute-force reference computations. Nothing here calls into the geometry,
// matching or curves implementations; the data types are shared, the code
// paths are not. Quadratic (or worse) by construction, for desk-scale
// verification only.

#include <cstddef>
#include <span>
#include <vector>

#include "openset/curves.hpp"
#include "openset/matching.hpp"
#include "openset/protocol.hpp"

namespace openset::oracle {

// Overlap of a detection with a ground-truth box, straight from the
// formula with the union term relaxed by a quarter of the ground truth.
double overlap(const BoundingBox& gt, const BoundingBox& det);
double plain_iou(const BoundingBox& a, const BoundingBox& b);

ScorePartition match_detections(const ProtocolManifest& manifest,
                                const std::vector<DetectionRecord>& records);

ScorePartition match_recognitions(const ProtocolManifest& manifest,
                                  const std::vector<RecognitionRecord>& records);

// Sweeps every distinct score (and +inf) as a threshold and counts
// positives and negatives directly.
Curve curve(const ScorePartition& partition,
            std::span<const std::size_t> budgets, CurveKind kind);

Curve rejection_curve(const ScorePartition& partition, NegativeTag tag,
                      std::span<const std::size_t> grid);

}  // namespace openset::oracle
