# Copyright 2026 The openset-eval Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
import math

import pytest

import openset_eval as oe


def test_modified_jaccard_small_detection():
    gt = oe.BoundingBox(0, 0, 32, 32)
    assert oe.modified_jaccard(gt, oe.BoundingBox(8, 8, 16, 16)) == 1.0
    assert oe.iou(gt, oe.BoundingBox(8, 8, 16, 16)) == 0.25


def test_manifest_counts():
    m = oe.manifest_with_counts(oe.Split.TEST, 5, 3, 1, 2)
    assert m.total_faces == 11
    assert m.known_faces == 5
    assert m.count(oe.MaskingCategory.MASKED_NOT_IN_TRAINING) == 2


def test_detection_curve():
    face = oe.FaceAnnotation("a", "d1", oe.BoundingBox(0, 0, 40, 40), -1,
                             oe.MaskingCategory.UNKNOWN)
    manifest = oe.ProtocolManifest(oe.Split.TEST, [face])
    detections = [
        oe.DetectionRecord("a", oe.BoundingBox(0, 0, 40, 40), 0.9),
        oe.DetectionRecord("a", oe.BoundingBox(200, 200, 40, 40), 0.5),
    ]
    part = oe.partition_detection_scores(manifest, detections)
    assert part.positives == [0.9]
    assert part.negatives == [0.5]
    curve = oe.build_curve(part, [1, 10], oe.CurveKind.FROC)
    assert [p.rate for p in curve.points] == [1.0, 1.0]
    assert curve.points[1].saturated


def test_threshold_and_crr():
    assert oe.calibrate_threshold([3.0, 1.0, 2.0], 2, [1.0, 2.0, 3.0]) == 3.0
    assert math.isinf(oe.calibrate_threshold([3.0], 1, [3.0]))
    part = oe.ScorePartition([0.9, 0.8], [0.85, 0.1], 2,
                             {oe.NegativeTag.FALSE_ACCEPT: [0.85, 0.1]})
    crr = oe.correct_rejection_curve(part, oe.NegativeTag.FALSE_ACCEPT, [1, 2])
    assert [p.rate for p in crr.points] == [1.0, 0.5]


def test_errors_are_typed(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("IMAGE_ID,X,Y,WIDTH,HEIGHT,CONFIDENCE\na,0,0,-4,4,1\n")
    with pytest.raises(oe.ValidationError, match=":2:"):
        oe.read_detections(bad)
    with pytest.raises(oe.IoError):
        oe.read_detections(tmp_path / "missing.csv")
    with pytest.raises(oe.ValidationError):
        oe.RecognitionRecord("a", oe.BoundingBox(0, 0, 1, 1), [(0, 1.0)])


def test_synthesize_round_trip(tmp_path):
    written = oe.synthesize(7, 5, tmp_path)
    assert (tmp_path / "test.csv") in written
    manifest = oe.load_manifest(tmp_path / "test.csv")
    assert manifest.total_faces > 0
    oe.write_manifest(tmp_path / "copy.json", manifest)
    assert oe.load_manifest(tmp_path / "copy.json") == manifest
