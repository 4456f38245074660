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
// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Optional argument: path to the
// openset-eval executable for the command-line determinism check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "openset/consensus.hpp"
#include "openset/curves.hpp"
#include "openset/error.hpp"
#include "openset/geometry.hpp"
#include "openset/io.hpp"
#include "openset/matching.hpp"
#include "openset/oracle.hpp"
#include "openset/synth.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace openset;

namespace {

constexpr double kJaccardTolerance = 1e-12;
constexpr double kJaccardSeconds = 1.0;
constexpr double kMatchingSeconds = 30.0;
constexpr double kCurveSeconds = 30.0;
constexpr double kDeterminismSeconds = 10.0;
constexpr std::size_t kRandomPairs = 1000;
constexpr std::size_t kScenarios = 100;
constexpr std::size_t kPartitions = 1000;
constexpr std::size_t kDeterminismRecords = 10000;
constexpr std::size_t kRoundTripRecords = 1000;

using Clock = std::chrono::steady_clock;

struct Check {
  std::size_t failures = 0;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures < 5) notes.push_back(what);
    ++failures;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool report(int id, const std::string& title, const Check& c, double elapsed,
            double limit, const std::string& detail) {
  const bool ok = c.failures == 0 && (limit <= 0 || elapsed < limit);
  std::printf("[%s] %d. %s: %s, %.3f s", ok ? "PASS" : "FAIL", id, title.c_str(),
              detail.c_str(), elapsed);
  if (limit > 0) std::printf(" (limit %.0f s)", limit);
  std::printf(", %zu violation(s)\n", c.failures);
  for (const auto& n : c.notes) std::printf("       %s\n", n.c_str());
  std::fflush(stdout);
  return ok;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Relative path -> bytes for every regular file below `dir`.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  }
  return out;
}

ScenarioSpec crowded_spec(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 1);
  std::uniform_int_distribution<std::size_t> images(1, 50);
  std::uniform_int_distribution<std::size_t> faces(1, 20);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ScenarioSpec spec;
  spec.seed = seed;
  spec.image_count = images(rng);
  spec.faces_min = 1;
  spec.faces_max = faces(rng);
  spec.crowded = true;
  spec.unlabeled_fraction = 0.1 * unit(rng);
  spec.image_width = 400;
  spec.image_height = 300;
  spec.face_min_size = 16;
  spec.face_max_size = 80;
  spec.detectors.clear();
  spec.recognizers.clear();
  for (int d = 0; d < 2; ++d) {
    DetectorModel m;
    m.name = "det" + std::to_string(d);
    m.miss_rate = 0.2 * unit(rng);
    m.false_accepts_per_image = 3.0 * unit(rng);
    m.jitter = 0.4 * unit(rng);
    m.shrink_min = 0.3;
    m.shrink_max = 1.0;
    m.duplicate_rate = 0.3 * unit(rng);
    spec.detectors.push_back(m);
    RecognizerModel r;
    r.name = "rec" + std::to_string(d);
    r.detector = static_cast<std::size_t>(d);
    r.rank1_accuracy = unit(rng);
    spec.recognizers.push_back(r);
  }
  return spec;
}

// 1. Modified Jaccard.
bool criterion_jaccard() {
  const auto start = Clock::now();
  Check c;
  const BoundingBox gt{0, 0, 40, 40};
  c.expect(modified_jaccard(gt, {10, 10, 20, 20}) == 1.0, "quarter-size inner box");
  c.expect(modified_jaccard(gt, {0, 0, 40, 40}) == 1.0, "identical box");
  c.expect(modified_jaccard(gt, {5, 5, 20, 10}) == 0.5, "eighth-size inner box");
  c.expect(modified_jaccard(gt, {100, 100, 20, 20}) == 0.0, "disjoint box");
  c.expect(modified_jaccard(gt, {40, 0, 40, 40}) == 0.0, "edge-touching box");

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(0.0, 100.0);
  std::uniform_real_distribution<double> size(0.5, 60.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t identity_cases = 0;
  for (std::size_t i = 0; i < kRandomPairs; ++i) {
    const BoundingBox g{pos(rng), pos(rng), size(rng), size(rng)};
    BoundingBox d{pos(rng), pos(rng), size(rng), size(rng)};
    if (i % 3 == 0) {
      d.width = g.width * (0.2 + 0.8 * unit(rng));
      d.height = g.height * (0.2 + 0.8 * unit(rng));
      d.x = g.x + (g.width - d.width) * unit(rng);
      d.y = g.y + (g.height - d.height) * unit(rng);
    } else if (i % 3 == 1) {
      d.x = g.x + (unit(rng) - 0.5) * g.width;
      d.y = g.y + (unit(rng) - 0.5) * g.height;
    }
    const double j = modified_jaccard(g, d);
    const double u = iou(g, d);
    c.expect(0.0 <= u && u <= j + kJaccardTolerance && j <= 1.0 + kJaccardTolerance,
             "bounds violated at pair " + std::to_string(i));
    c.expect(std::abs(j - oracle::overlap(g, d)) <= kJaccardTolerance,
             "oracle mismatch at pair " + std::to_string(i));
    const double inter = intersection_area(g, d);
    if (inter >= g.area() / 4.0) {
      ++identity_cases;
      c.expect(std::abs(j - inter / d.area()) <= kJaccardTolerance,
               "identity violated at pair " + std::to_string(i));
    }
  }
  c.expect(identity_cases >= kRandomPairs / 4, "too few pairs exercise the identity");
  return report(1, "modified Jaccard suite", c, seconds_since(start), kJaccardSeconds,
                std::to_string(kRandomPairs) + " pairs, " + std::to_string(identity_cases) +
                    " in the quarter-coverage regime");
}

// 2 and 3. Matching and curves against the reference implementation.
bool criterion_oracle(std::vector<ScorePartition>& partitions, double& curve_seconds,
                      bool& curves_ok) {
  const auto start = Clock::now();
  Check c;
  std::size_t records = 0;
  for (std::size_t s = 1; s <= kScenarios; ++s) {
    const Scenario sc = generate_scenario(crowded_spec(s));
    for (const auto& [name, dets] : sc.test.detections) {
      records += dets.size();
      const ScorePartition fast = partition_detection_scores(sc.test.manifest, dets);
      c.expect(fast == oracle::match_detections(sc.test.manifest, dets),
               "detection mismatch, scenario " + std::to_string(s) + " " + name);
      partitions.push_back(fast);
    }
    for (const auto& [name, recs] : sc.test.recognitions) {
      records += recs.size();
      const ScorePartition fast = partition_recognition_scores(sc.test.manifest, recs);
      c.expect(fast == oracle::match_recognitions(sc.test.manifest, recs),
               "recognition mismatch, scenario " + std::to_string(s) + " " + name);
      partitions.push_back(fast);
    }
  }
  const bool ok = report(2, "matching equals reference", c, seconds_since(start),
                         kMatchingSeconds,
                         std::to_string(kScenarios) + " scenarios, " + std::to_string(records) +
                             " records");

  const auto curve_start = Clock::now();
  Check cc;
  const std::vector<std::size_t> table = default_budgets();
  const std::vector<std::size_t> dense = log_spaced_budgets(10, 100000, 50);
  std::size_t points = 0;
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    const CurveKind kind = i % 2 == 0 ? CurveKind::FROC : CurveKind::DIR;
    for (const auto* grid : {&table, &dense}) {
      if (partitions[i].denominator == 0) continue;
      const Curve fast = build_curve(partitions[i], *grid, kind);
      cc.expect(fast == oracle::curve(partitions[i], *grid, kind),
                "curve mismatch on partition " + std::to_string(i));
      points += fast.points.size();
    }
  }
  curve_seconds = seconds_since(curve_start);
  curves_ok = report(3, "curves equal reference", cc, curve_seconds, kCurveSeconds,
                     std::to_string(points) + " operating points");
  return ok;
}

// 4. Monotonicity and invariance.
bool criterion_properties() {
  const auto start = Clock::now();
  Check c;
  std::mt19937_64 rng(4);
  std::vector<std::size_t> grid = default_budgets();
  const auto dense = log_spaced_budgets(1, 100000, 50);
  grid.insert(grid.end(), dense.begin(), dense.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const std::vector<std::function<double(double)>> transforms{
      [](double x) { return std::exp(x); }, [](double x) { return 8.0 * x + 1.0; },
      [](double x) { return std::ldexp(x, -3) - 100.0; }};
  std::size_t applied = 0;

  for (std::size_t n = 0; n < kPartitions; ++n) {
    ScorePartition p = testing::random_partition(rng);
    const std::string at = " (partition " + std::to_string(n) + ")";
    const CurveKind kind = n % 2 == 0 ? CurveKind::FROC : CurveKind::DIR;
    const Curve curve = build_curve(p, grid, kind);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      const auto& a = curve.points[i - 1];
      const auto& b = curve.points[i];
      c.expect(*a.rate <= *b.rate, "rate decreased" + at);
      c.expect(a.threshold >= b.threshold, "threshold increased" + at);
    }

    std::vector<double> all = p.positives;
    all.insert(all.end(), p.negatives.begin(), p.negatives.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    for (const auto& f : transforms) {
      bool strictly_increasing = true;
      for (std::size_t i = 1; i < all.size(); ++i) {
        strictly_increasing = strictly_increasing && f(all[i - 1]) < f(all[i]);
      }
      c.expect(strictly_increasing, "transform not strictly increasing on sample" + at);
      if (!strictly_increasing) continue;
      ++applied;
      ScorePartition q = p;
      for (auto& v : q.positives) v = f(v);
      for (auto& v : q.negatives) v = f(v);
      for (auto& [tag, scores] : q.tagged_negatives) {
        for (auto& v : scores) v = f(v);
      }
      const Curve moved = build_curve(q, grid, kind);
      for (std::size_t i = 0; i < curve.points.size(); ++i) {
        c.expect(moved.points[i].rate == curve.points[i].rate &&
                     moved.points[i].positive_count == curve.points[i].positive_count &&
                     moved.points[i].saturated == curve.points[i].saturated,
                 "rate changed under transform" + at);
      }
    }

    for (NegativeTag tag : kAllNegativeTags) {
      const auto& subset = p.tagged(tag);
      if (subset.empty()) continue;
      std::vector<double> sweep{-kInfinity, kInfinity};
      sweep.insert(sweep.end(), subset.begin(), subset.end());
      sweep.insert(sweep.end(), p.positives.begin(), p.positives.end());
      std::sort(sweep.begin(), sweep.end());
      double previous = -1.0;
      for (double theta : sweep) {
        const double r = correct_rejection_rate(subset, theta);
        c.expect(r >= previous, "CRR decreased in threshold" + at);
        previous = r;
      }
      c.expect(correct_rejection_rate(subset, subset.front()) == 0.0, "CRR lower endpoint" + at);
      c.expect(correct_rejection_rate(subset, -kInfinity) == 0.0, "CRR at -inf" + at);
      c.expect(correct_rejection_rate(subset, kInfinity) == 1.0, "CRR at +inf" + at);

      std::vector<std::size_t> ks;
      for (std::size_t k = 1; k <= p.positives.size() + 2; ++k) ks.push_back(k);
      if (ks.empty()) continue;
      const Curve crr = correct_rejection_curve(p, tag, ks);
      for (std::size_t i = 1; i < crr.points.size(); ++i) {
        const auto& a = crr.points[i - 1];
        const auto& b = crr.points[i];
        c.expect(a.threshold >= b.threshold, "CRR threshold increased with k" + at);
        c.expect(*a.rate >= *b.rate, "CRR not monotone in threshold" + at);
      }
    }
  }
  return report(4, "monotonicity and invariance", c, seconds_since(start), 0,
                std::to_string(kPartitions) + " partitions, " + std::to_string(applied) +
                    " transformed copies");
}

// 5. Saturated summary cells.
bool criterion_saturation() {
  const auto start = Clock::now();
  Check c;
  ScorePartition p;
  for (int i = 0; i < 37; ++i) p.negatives.push_back(0.01 * i);
  p.tagged_negatives[NegativeTag::FalseAccept] = p.negatives;
  for (int i = 0; i < 500; ++i) p.positives.push_back(0.2 + 0.001 * i);
  p.denominator = 1000;
  p.canonicalize();
  const Curve curve = build_curve(p, default_budgets(), CurveKind::FROC);
  for (const auto& pt : curve.points) {
    const std::string at = " at budget " + std::to_string(pt.budget);
    if (pt.budget >= 100) {
      c.expect(pt.saturated, "missing saturation flag" + at);
      c.expect(pt.positive_count == p.positives.size(), "not the total count" + at);
      c.expect(pt.threshold == p.negatives.front(), "threshold not the minimum score" + at);
    } else {
      c.expect(!pt.saturated, "unexpected saturation" + at);
      c.expect(pt.negative_count == 9, "budget of 10 admits 9 negatives" + at);
    }
  }

  // A participant with fewer than ten false accepts and 37 detected faces.
  ScorePartition few;
  for (int i = 0; i < 6; ++i) few.negatives.push_back(0.1 * i);
  for (int i = 0; i < 37; ++i) few.positives.push_back(1.0 + i);
  few.denominator = 15312;
  few.canonicalize();
  const SummaryTable table = summary_table(
      {{"participant", build_curve(few, default_budgets(), CurveKind::FROC)},
       {"baseline", build_curve(p, default_budgets(), CurveKind::FROC)}});
  const auto column = std::find(table.participants.begin(), table.participants.end(),
                                "participant") -
                      table.participants.begin();
  for (std::size_t row = 0; row < table.budgets.size(); ++row) {
    const SummaryCell& cell = table.cells[row][static_cast<std::size_t>(column)];
    c.expect(cell.count == 37 && cell.saturated, "37-face cell at budget " +
                                                    std::to_string(table.budgets[row]));
  }
  std::ostringstream csv;
  write_summary_csv(csv, table);
  c.expect(csv.str().find("\n10,") != std::string::npos &&
               csv.str().find("37^") != std::string::npos,
           "summary file lacks the saturated 37 cell");
  return report(5, "saturated summary semantics", c, seconds_since(start), 0,
                "37 false accepts, 500 positives");
}

// 6. Consensus fixture.
bool criterion_consensus() {
  const auto start = Clock::now();
  Check c;
  const auto f = testing::consensus_fixture();
  const ConsensusConfig config;
  const auto run = [&](unsigned workers) {
    return run_consensus(f.validation, f.validation_detections, f.target, f.target_detections,
                         f.recognitions, config, workers);
  };
  const ConsensusOutcome first = run(1);
  const ConsensusOutcome second = run(1);
  const ConsensusOutcome parallel = run(4);

  const auto& faces = first.manifest.annotations();
  const auto covers = [&](double x, double y) {
    return std::any_of(faces.begin(), faces.end(), [&](const FaceAnnotation& a) {
      return a.image_id == "t1" && a.box.x <= x && x <= a.box.x + a.box.width && a.box.y <= y &&
             y <= a.box.y + a.box.height;
    });
  };
  c.expect(covers(120, 120), "three-detector face not added");
  c.expect(!covers(320, 320), "two-detector region added");

  ConsensusCluster cluster;
  cluster.image_id = "x";
  cluster.members.push_back({"A", {"x", {10, 10, 20, 20}, 1.0}, 1.0});
  cluster.members.push_back({"B", {"x", {10, 10, 20, 20}, 1.0}, 0.5});
  cluster.members.push_back({"C", {"x", {10, 10, 20, 20}, 1.0}, 0.0});
  const BoundingBox fused = fuse_cluster(cluster, config).box;
  c.expect(fused == BoundingBox{8, 8, 24, 24}, "upscaled box is not (8,8,24,24)");
  c.expect(scale_about_center({10, 10, 20, 20}, 1.2) == BoundingBox{8, 8, 24, 24},
           "scale_about_center is not exact");

  const auto label_at = [&](double x, double y) -> int {
    for (const auto& a : faces) {
      if (a.image_id == "t1" && a.box.x == x && a.box.y == y) return a.label.value();
    }
    return 0;
  };
  c.expect(label_at(700, 100) == 17, "{L,L,L} not assigned");
  c.expect(label_at(700, 300) == -1, "{L,L,-1} assigned");
  c.expect(label_at(900, 100) == 77, "masked face relabeled");
  c.expect(first.audit.str() == second.audit.str(), "audit log differs across runs");
  c.expect(first.audit.str() == parallel.audit.str(), "audit log differs across workers");
  c.expect(first.manifest == second.manifest && first.manifest == parallel.manifest,
           "augmented manifest differs across runs");
  return report(6, "consensus fixture", c, seconds_since(start), 0,
                std::to_string(first.faces_added) + " face(s) added, " +
                    std::to_string(first.identities_assigned) + " identity assigned, " +
                    std::to_string(first.audit.lines().size()) + " audit lines");
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string command = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
  return std::system(command.c_str());
}

// 7. End-to-end determinism.
bool criterion_determinism(const std::string& cli) {
  const auto start = Clock::now();
  Check c;
  ScenarioSpec spec;
  spec.seed = 7;
  spec.image_count = 1800;
  spec.faces_max = 10;
  spec.detectors[0].false_accepts_per_image = 1.5;
  spec.detectors[0].duplicate_rate = 0.1;
  spec.detectors[0].jitter = 0.2;
  const Scenario sc = generate_scenario(spec);
  auto dets = sc.test.detections.begin()->second;
  auto recs = sc.test.recognitions.begin()->second;
  c.expect(dets.size() >= kDeterminismRecords && recs.size() >= kDeterminismRecords,
           "scenario too small");
  dets.resize(std::min(dets.size(), kDeterminismRecords));
  recs.resize(std::min(recs.size(), kDeterminismRecords));

  const fs::path root = fs::temp_directory_path() / ("openset_acceptance_" +
                                                     std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> library_runs;
  for (unsigned workers : {1u, 4u, 1u, 4u}) {
    const fs::path out = root / ("library_" + std::to_string(library_runs.size()));
    const Evaluation de = evaluate_detections(sc.test.manifest, dets, workers);
    const Evaluation re = evaluate_recognitions(sc.test.manifest, recs, workers);
    emit_report({{"synthetic", build_curve(de.partition, default_budgets(), CurveKind::FROC)}},
                out, {"froc", true, true, "FROC"});
    emit_report({{"synthetic", build_curve(re.partition, default_budgets(), CurveKind::DIR)}},
                out, {"dir", true, true, "DIR"});
    library_runs.push_back(snapshot(out));
  }
  for (const auto& r : library_runs) {
    c.expect(r == library_runs.front() && r.size() == 6, "library reports differ");
  }

  std::string cli_detail = "command line skipped";
  if (!cli.empty()) {
    write_manifest(root / "manifest.csv", sc.test.manifest);
    write_detection_file(root / "synthetic_det.csv", dets);
    write_recognition_file(root / "synthetic_rec.csv", recs);
    std::vector<std::map<std::string, std::string>> cli_runs;
    for (const char* workers : {"1", "4", "1", "4"}) {
      const fs::path out = root / ("cli_" + std::to_string(cli_runs.size()));
      const std::string base = "--manifest \"" + (root / "manifest.csv").string() +
                               "\" --output-dir \"" + out.string() + "\" --workers " + workers;
      c.expect(run_cli(cli, "eval-detect " + base + " --detections synthetic=\"" +
                                (root / "synthetic_det.csv").string() + "\"") == 0,
               "eval-detect failed");
      c.expect(run_cli(cli, "eval-recognize " + base + " --recognitions synthetic=\"" +
                                (root / "synthetic_rec.csv").string() + "\"") == 0,
               "eval-recognize failed");
      cli_runs.push_back(snapshot(out));
    }
    for (const auto& r : cli_runs) {
      c.expect(r == cli_runs.front() && !r.empty(), "command line reports differ");
    }
    c.expect(cli_runs.front().at("froc_synthetic.csv") ==
                 library_runs.front().at("froc_synthetic.csv"),
             "command line and library curves differ");
    cli_detail = std::to_string(cli_runs.front().size()) + " files from the command line";
  }
  fs::remove_all(root);
  return report(7, "end-to-end determinism", c, seconds_since(start), kDeterminismSeconds,
                std::to_string(dets.size()) + " detections, " + std::to_string(recs.size()) +
                    " recognitions, " + cli_detail);
}

template <typename F>
std::size_t rejected_line(F&& parse) {
  try {
    parse();
  } catch (const ParseError& e) {
    return e.line();
  } catch (const Error&) {
  }
  return 0;
}

// 8. Round trips.
bool criterion_round_trip() {
  const auto start = Clock::now();
  Check c;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coord(-50.0, 2000.0);
  std::uniform_real_distribution<double> side(0.001, 400.0);
  std::normal_distribution<double> score(0.0, 10.0);
  std::uniform_int_distribution<int> label(1, 100000);
  std::uniform_int_distribution<int> pick(0, 9);
  const auto image = [&] { return "img_" + std::to_string(pick(rng) * 1000 + pick(rng)); };
  const auto box = [&] { return BoundingBox{coord(rng), coord(rng), side(rng), side(rng)}; };

  std::vector<FaceAnnotation> faces;
  for (std::size_t i = 0; i < kRoundTripRecords; ++i) {
    const int kind = pick(rng) % 4;
    const auto category = static_cast<MaskingCategory>(kind);
    const int l = category == MaskingCategory::Unknown ? -1 : label(rng);
    const std::string id = image();
    faces.push_back({id, "d0" + id.substr(id.size() - 1), box(), IdentityLabel(l), category});
  }
  const ProtocolManifest manifest(Split::Test, faces, {{"empty_image", "d01"}},
                                  {{5, {"d01", "d02"}}, {9, {}}});
  for (const char* ext : {"csv", "json"}) {
    std::stringstream s;
    if (std::string(ext) == "csv") {
      write_manifest_csv(s, manifest);
      // CSV manifests carry no training days.
      const ProtocolManifest flat(manifest.split(), manifest.annotations(), manifest.images());
      c.expect(parse_manifest_csv(s) == flat, "manifest csv round trip");
    } else {
      write_manifest_json(s, manifest);
      c.expect(parse_manifest_json(s) == manifest, "manifest json round trip");
    }
  }

  std::vector<DetectionRecord> dets;
  for (std::size_t i = 0; i < kRoundTripRecords; ++i) dets.push_back({image(), box(), score(rng)});
  std::stringstream ds;
  write_detections(ds, dets);
  c.expect(parse_detections(ds) == dets, "detection round trip");

  std::vector<RecognitionRecord> recs;
  for (std::size_t i = 0; i < kRoundTripRecords; ++i) {
    RecognitionRecord r{image(), box(), {}};
    const int n = 1 + pick(rng);
    std::set<int> labels;
    if (pick(rng) < 3) labels.insert(-1);
    while (labels.size() < static_cast<std::size_t>(n)) labels.insert(label(rng));
    std::vector<double> scores;
    for (int k = 0; k < n; ++k) scores.push_back(score(rng));
    std::sort(scores.rbegin(), scores.rend());
    std::size_t k = 0;
    for (int l : labels) r.candidates.push_back({IdentityLabel(l), scores[k++]});
    recs.push_back(std::move(r));
  }
  std::stringstream rs;
  write_recognitions(rs, recs);
  c.expect(parse_recognitions(rs) == recs, "recognition round trip");

  Curve curve;
  curve.kind = CurveKind::DIR;
  curve.denominator = 123456;
  for (std::size_t i = 0; i < kRoundTripRecords; ++i) {
    OperatingPoint pt;
    pt.budget = i + 1;
    pt.threshold = pick(rng) == 0 ? kInfinity : score(rng);
    pt.positive_count = static_cast<std::size_t>(label(rng));
    pt.rate = pick(rng) == 0 ? std::nullopt
                             : std::optional<double>(static_cast<double>(pt.positive_count) /
                                                     static_cast<double>(curve.denominator));
    pt.saturated = pick(rng) < 5;
    curve.points.push_back(pt);
  }
  std::stringstream cs;
  write_curve_csv(cs, curve);
  const Curve back = parse_curve_csv(cs);
  c.expect(back.kind == curve.kind && back.denominator == curve.denominator &&
               back.points.size() == curve.points.size(),
           "curve header round trip");
  for (std::size_t i = 0; i < std::min(back.points.size(), curve.points.size()); ++i) {
    const auto& a = curve.points[i];
    const auto& b = back.points[i];
    c.expect(a.budget == b.budget && a.threshold == b.threshold && a.rate == b.rate &&
                 a.positive_count == b.positive_count && a.saturated == b.saturated,
             "curve point " + std::to_string(i));
  }

  const auto det_line = [&](const std::string& text) {
    return rejected_line([&] {
      std::istringstream in(text);
      parse_detections(in);
    });
  };
  const auto rec_line = [&](const std::string& text) {
    return rejected_line([&] {
      std::istringstream in(text);
      parse_recognitions(in);
    });
  };
  c.expect(det_line("IMAGE_ID,X,Y,WIDTH,HEIGHT,CONFIDENCE\na,0,0,10,10,1\na,0,0,0,10,1\n") == 3,
           "zero width not rejected at line 3");
  std::string eleven = "IMAGE_ID,X,Y,WIDTH,HEIGHT";
  for (int k = 1; k <= 11; ++k) {
    eleven += ",LABEL_" + std::to_string(k) + ",SCORE_" + std::to_string(k);
  }
  eleven += "\nb,0,0,10,10";
  for (int k = 1; k <= 11; ++k) eleven += "," + std::to_string(k) + ",0.5";
  eleven += "\n";
  c.expect(rec_line(eleven) == 2, "11 candidates not rejected at line 2");
  c.expect(rec_line("IMAGE_ID,X,Y,WIDTH,HEIGHT,LABEL_1,SCORE_1\nb,0,0,10,10,3,0.5\n"
                    "b,0,0,10,10,0,0.5\n") == 3,
           "label 0 not rejected at line 3");
  return report(8, "round-trip I/O", c, seconds_since(start), 0,
                std::to_string(kRoundTripRecords) + " records per file type");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  bool ok = true;
  try {
    ok = criterion_jaccard() && ok;
    std::vector<ScorePartition> partitions;
    double curve_seconds = 0;
    bool curves_ok = false;
    ok = criterion_oracle(partitions, curve_seconds, curves_ok) && ok;
    ok = curves_ok && ok;
    ok = criterion_properties() && ok;
    ok = criterion_saturation() && ok;
    ok = criterion_consensus() && ok;
    ok = criterion_determinism(cli) && ok;
    ok = criterion_round_trip() && ok;
  } catch (const std::exception& e) {
    std::printf("[FAIL] unexpected exception: %s\n", e.what());
    return 1;
  }
  std::printf("%s\n", ok ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return ok ? 0 : 1;
}
