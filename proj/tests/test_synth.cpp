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
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "openset/curves.hpp"
#include "openset/error.hpp"
#include "openset/io.hpp"
#include "openset/oracle.hpp"
#include "openset/synth.hpp"

using namespace openset;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("spec validation") {
  ScenarioSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.image_count = 0;
  CHECK_THROWS_AS(generate_scenario(spec), InvalidArgument);
  spec = {};
  spec.known_fraction = 0.9;
  spec.masked_not_in_training_fraction = 0.2;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec = {};
  spec.detectors[0].miss_rate = 1.5;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec = {};
  spec.recognizers[0].detector = 3;
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
}

TEST_CASE("equal seeds give identical scenarios") {
  ScenarioSpec spec;
  spec.seed = 77;
  spec.crowded = true;
  const Scenario a = generate_scenario(spec);
  const Scenario b = generate_scenario(spec);
  CHECK(a.train == b.train);
  CHECK(a.test.manifest == b.test.manifest);
  CHECK(a.test.detections == b.test.detections);
  CHECK(a.test.recognitions == b.test.recognitions);
  spec.seed = 78;
  CHECK_FALSE(generate_scenario(spec).test.detections == a.test.detections);

  const fs::path root = fs::temp_directory_path() / "openset_synth_tests";
  fs::remove_all(root);
  const auto files_a = write_scenario(a, root / "a");
  const auto files_b = write_scenario(b, root / "b");
  REQUIRE(files_a.size() == files_b.size());
  for (std::size_t i = 0; i < files_a.size(); ++i) {
    CHECK(fs::relative(files_a[i], root / "a") == fs::relative(files_b[i], root / "b"));
    CHECK(slurp(files_a[i]) == slurp(files_b[i]));
  }
  CHECK(read_manifest(root / "a/test.csv").annotations() == a.test.manifest.annotations());
}

TEST_CASE("perfect detector") {
  ScenarioSpec spec;
  spec.seed = 3;
  spec.detectors[0].miss_rate = 0.0;
  spec.detectors[0].false_accepts_per_image = 0.0;
  const Scenario s = generate_scenario(spec);
  const ScorePartition p =
      partition_detection_scores(s.test.manifest, s.test.detections.begin()->second);
  CHECK(p.negatives.empty());
  CHECK(p.positives.size() == s.test.manifest.total_faces());
  const Curve c = build_curve(p, default_budgets(), CurveKind::FROC);
  CHECK(*c.points[0].rate == 1.0);
}

TEST_CASE("perfect recognizer") {
  ScenarioSpec spec;
  spec.seed = 4;
  spec.detectors[0].miss_rate = 0.0;
  spec.recognizers[0].rank1_accuracy = 1.0;
  spec.recognizers[0].unknown_rejection = 1.0;
  spec.recognizers[0].false_accept_rejection = 1.0;
  const Scenario s = generate_scenario(spec);
  const ScorePartition p =
      partition_recognition_scores(s.test.manifest, s.test.recognitions.begin()->second);
  CHECK(p.negatives.empty());
  const Curve c = build_curve(p, std::vector<std::size_t>{1}, CurveKind::DIR);
  CHECK(*c.points[0].rate == 1.0);
}

TEST_CASE("partitions match the generator's bookkeeping") {
  ScenarioSpec spec;
  spec.seed = 21;
  spec.image_count = 150;
  spec.faces_min = 5;
  spec.faces_max = 9;
  spec.unlabeled_fraction = 0.1;
  spec.detectors[0].duplicate_rate = 0.25;
  const Scenario s = generate_scenario(spec);
  CHECK(s.test.manifest.total_faces() + s.test.hidden_faces.size() >= 1000);
  const auto& dets = s.test.detections.begin()->second;
  const auto& truth = s.test.detection_truth.begin()->second;
  std::set<std::size_t> detected;
  std::size_t false_accepts = 0, duplicates = 0;
  for (const auto& t : truth) {
    if (t.face) {
      detected.insert(*t.face);
      duplicates += t.duplicate ? 1 : 0;
    } else {
      ++false_accepts;
    }
  }
  const Evaluation e = evaluate_detections(s.test.manifest, dets);
  CHECK(e.partition.positives.size() == detected.size());
  CHECK(e.partition.negatives.size() == false_accepts);
  CHECK(e.match.diagnostics.get(Disposition::Duplicate) == duplicates);
  CHECK(e.partition == oracle::match_detections(s.test.manifest, dets));
}

TEST_CASE("training days cover every known identity of a split") {
  ScenarioSpec spec;
  spec.seed = 12;
  const Scenario s = generate_scenario(spec);
  for (const auto* m : {&s.validation.manifest, &s.test.manifest}) {
    for (const auto& a : m->annotations()) {
      if (a.category == MaskingCategory::Known) {
        CHECK(m->training_days().count(a.label.value()) == 1);
      }
    }
  }
  std::vector<FaceAnnotation> known;
  for (const auto& a : s.test.manifest.annotations()) {
    if (a.category == MaskingCategory::Known) known.push_back(a);
  }
  const DaySplit split = day_split(s.test.manifest, known);
  CHECK(split.same_day.size() + split.different_day.size() == known.size());
  CHECK_FALSE(split.different_day.empty());
}

TEST_CASE("manifest with exact category counts") {
  const auto m = manifest_with_counts(Split::Validation, 3, 2, 1, 1);
  CHECK(m.total_faces() == 7);
  CHECK(m.known_faces() == 3);
  CHECK(m.count(MaskingCategory::MaskedNotInTraining) == 1);
}

TEST_CASE("reference curve edge cases") {
  ScorePartition p{{1, 3}, {}, {}, 5};
  const Curve c = oracle::curve(p, default_budgets(), CurveKind::DIR);
  for (const auto& pt : c.points) {
    CHECK(pt.saturated);
    CHECK(*pt.rate == doctest::Approx(0.4));
  }
}
