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
#include <cmath>
#include <random>

#include "doctest.h"
#include "openset/curves.hpp"
#include "openset/error.hpp"
#include "openset/oracle.hpp"
#include "test_util.hpp"

using namespace openset;

namespace {

ScorePartition make_partition(std::vector<double> pos, std::vector<double> neg, std::size_t den) {
  ScorePartition p;
  p.positives = std::move(pos);
  p.negatives = neg;
  p.tagged_negatives[NegativeTag::FalseAccept] = std::move(neg);
  p.denominator = den;
  p.canonicalize();
  return p;
}

}  // namespace

TEST_CASE("threshold calibration") {
  const std::vector<double> neg{0.9, 0.7, 0.5};
  CHECK(calibrate_threshold(neg, 4, neg) == 0.5);
  CHECK(calibrate_threshold(neg, 2, std::vector<double>{0.9, 0.8, 0.7, 0.5}) == 0.8);
  CHECK(calibrate_threshold({}, 3, std::vector<double>{0.4, 0.2}) == 0.2);
  CHECK(std::isinf(calibrate_threshold(neg, 1, neg)));
  CHECK(std::isinf(calibrate_threshold({}, 1, {})));
  CHECK_THROWS_AS(calibrate_threshold(neg, 0, neg), InvalidArgument);
}

TEST_CASE("a budget of ten admits nine negatives") {
  std::vector<double> neg;
  for (int i = 1; i <= 20; ++i) neg.push_back(i);
  const double t = calibrate_threshold(neg, 10, neg);
  CHECK(t == 12.0);
  std::size_t above = 0;
  for (double n : neg) above += n >= t ? 1 : 0;
  CHECK(above == 9);
}

TEST_CASE("detection and identification rates") {
  const std::vector<double> pos{0.9, 0.6, 0.3};
  CHECK(detection_rate(pos, -kInfinity, 4) == 0.75);
  CHECK(detection_rate(pos, kInfinity, 4) == 0.0);
  CHECK(detection_rate(pos, 0.6, 4) == 0.5);
  CHECK(identification_rate(std::vector<double>{5, 3, 1}, 3, 10) == 0.2);
  CHECK(identification_rate(std::vector<double>{5, 3, 1}, 0, 10) == 0.3);
  CHECK_THROWS_AS(detection_rate(pos, 0.5, 0), InvalidArgument);
  CHECK_THROWS_AS(identification_rate(pos, 0.5, 0), InvalidArgument);
}

TEST_CASE("correct rejection rate") {
  const std::vector<double> subset{8, 6, 4};
  CHECK(correct_rejection_rate(subset, 100) == 1.0);
  CHECK(correct_rejection_rate(subset, 4) == 0.0);
  CHECK(correct_rejection_rate(subset, 6) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(correct_rejection_rate({}, 1.0), InvalidArgument);
}

TEST_CASE("correct rejection curve") {
  ScorePartition p = make_partition({9, 7, 5}, {8, 6, 4}, 3);
  const std::vector<std::size_t> grid{1, 2, 3, 4};
  const Curve c = correct_rejection_curve(p, NegativeTag::FalseAccept, grid);
  CHECK(c.kind == CurveKind::CRR);
  CHECK(c.denominator == 3);
  REQUIRE(c.points.size() == 4);
  CHECK(c.points[0].threshold == 9);
  CHECK(*c.points[0].rate == 1.0);
  CHECK(c.points[1].threshold == 7);
  CHECK(*c.points[1].rate == doctest::Approx(2.0 / 3.0));
  CHECK(*c.points[2].rate == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(c.points[2].saturated);
  CHECK(c.points[3].saturated);
  CHECK(c.points[3].threshold == 5);
  CHECK(c == oracle::rejection_curve(p, NegativeTag::FalseAccept, grid));
  CHECK_THROWS_AS(correct_rejection_curve(p, NegativeTag::MaskedInTraining, grid),
                  InvalidArgument);
}

TEST_CASE("correct rejection without positives") {
  ScorePartition p = make_partition({}, {1, 2}, 3);
  const Curve c = correct_rejection_curve(p, NegativeTag::FalseAccept, std::vector<std::size_t>{1});
  CHECK(c.points[0].saturated);
  CHECK(std::isinf(c.points[0].threshold));
  CHECK(*c.points[0].rate == 1.0);
}

TEST_CASE("default and log-spaced budgets") {
  CHECK(default_budgets() == std::vector<std::size_t>{10, 100, 1000, 10000, 100000});
  const auto grid = log_spaced_budgets(10, 100000, 50);
  CHECK(grid.size() == 50);
  CHECK(grid.front() == 10);
  CHECK(grid.back() == 100000);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(log_spaced_budgets(1, 4, 10) == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK_THROWS_AS(log_spaced_budgets(0, 10, 3), InvalidArgument);
}

TEST_CASE("build curve over the default grid") {
  const ScorePartition p = make_partition({5, 4, 3}, {4.5, 2}, 10);
  const Curve c = build_curve(p, default_budgets(), CurveKind::FROC);
  REQUIRE(c.points.size() == 5);
  for (const auto& pt : c.points) {
    CHECK(pt.saturated);
    CHECK(pt.threshold == 2);
    CHECK(pt.positive_count == 3);
    CHECK(*pt.rate == doctest::Approx(0.3));
  }
  const Curve tight = build_curve(p, std::vector<std::size_t>{1, 2}, CurveKind::FROC);
  CHECK(tight.points[0].threshold == 5);
  CHECK(tight.points[0].positive_count == 1);
  CHECK(tight.points[0].negative_count == 0);
  CHECK(tight.points[1].threshold == 3);
  CHECK(tight.points[1].positive_count == 3);
  CHECK(tight.points[1].negative_count == 1);
  CHECK_FALSE(tight.points[1].saturated);
}

TEST_CASE("ties between positives and negatives count on both sides") {
  const ScorePartition p = make_partition({1, 2}, {2, 2, 1}, 2);
  const Curve c = build_curve(p, std::vector<std::size_t>{3}, CurveKind::DIR);
  CHECK(c.points[0].threshold == 2);
  CHECK(c.points[0].positive_count == 1);
  CHECK(c.points[0].negative_count == 2);
}

TEST_CASE("all-negative submission") {
  const ScorePartition p = make_partition({}, {1, 2, 3}, 7);
  for (const auto& pt : build_curve(p, default_budgets(), CurveKind::DIR).points) {
    CHECK(*pt.rate == 0.0);
  }
}

TEST_CASE("undefined rate for an empty denominator") {
  const Curve c = build_curve(make_partition({}, {1}, 0), default_budgets(), CurveKind::DIR);
  CHECK_FALSE(c.points[0].rate.has_value());
}

TEST_CASE("budget grid validation") {
  const ScorePartition p = make_partition({1}, {1}, 1);
  CHECK_THROWS_AS(build_curve(p, {}, CurveKind::FROC), InvalidArgument);
  CHECK_THROWS_AS(build_curve(p, std::vector<std::size_t>{10, 10}, CurveKind::FROC),
                  InvalidArgument);
  CHECK_THROWS_AS(build_curve(p, std::vector<std::size_t>{0, 10}, CurveKind::FROC),
                  InvalidArgument);
  CHECK_THROWS_AS(build_curve(p, default_budgets(), CurveKind::CRR), InvalidArgument);
}

TEST_CASE("summary table cells") {
  // A detector with 1008 positives above the 10th-largest negative.
  std::vector<double> pos, neg;
  for (int i = 0; i < 1008; ++i) pos.push_back(100.0 + i);
  for (int i = 0; i < 500; ++i) pos.push_back(i * 0.01);
  for (int i = 0; i < 20; ++i) neg.push_back(99.0 - i);
  const ScorePartition detector = make_partition(pos, neg, 36153);
  // An identifier whose 11276 positives are all reached at the largest budget.
  std::vector<double> ipos, ineg;
  for (int i = 0; i < 11276; ++i) ipos.push_back(1.0 + i * 1e-4);
  for (int i = 0; i < 150000; ++i) ineg.push_back(i * 1e-5);
  const ScorePartition identifier = make_partition(ipos, ineg, 12636);

  const auto budgets = default_budgets();
  const SummaryTable fa = summary_table({{"det", build_curve(detector, budgets, CurveKind::FROC)}});
  CHECK(fa.cells[0][0].count == 1008);
  CHECK_FALSE(fa.cells[0][0].saturated);
  CHECK(fa.cells[1][0].count == 1508);
  CHECK(fa.cells[1][0].saturated);

  const SummaryTable fi =
      summary_table({{"a", build_curve(identifier, budgets, CurveKind::DIR)},
                     {"b", build_curve(make_partition({1}, {}, 12636), budgets, CurveKind::DIR)}});
  CHECK(fi.participants == std::vector<std::string>{"a", "b"});
  CHECK(fi.cells[4][0].count == 11276);
  CHECK_FALSE(fi.cells[4][0].saturated);
  CHECK(fi.cells[4][0].best);
  CHECK_FALSE(fi.cells[4][1].best);
  CHECK(fi.cells[4][1].saturated);
  const Curve dir = build_curve(identifier, budgets, CurveKind::DIR);
  CHECK(dir.points[4].threshold == 50001 * 1e-5);
  CHECK(dir.points[4].negative_count == 99999);
}

TEST_CASE("summary table rejects mismatched curves") {
  const ScorePartition p = make_partition({1}, {1}, 1);
  CHECK_THROWS_AS(summary_table({{"a", build_curve(p, default_budgets(), CurveKind::FROC)},
                                 {"b", build_curve(p, std::vector<std::size_t>{10},
                                                   CurveKind::FROC)}}),
                  InvalidArgument);
  CHECK_THROWS_AS(summary_table({{"a", build_curve(p, default_budgets(), CurveKind::FROC)},
                                 {"b", build_curve(p, default_budgets(), CurveKind::DIR)}}),
                  InvalidArgument);
}

TEST_CASE("curve properties on random partitions") {
  std::mt19937_64 rng(2024);
  const auto dense = log_spaced_budgets(1, 300, 40);
  for (int trial = 0; trial < 300; ++trial) {
    const ScorePartition p = testing::random_partition(rng);
    const Curve c = build_curve(p, dense, CurveKind::FROC);
    CHECK(c == oracle::curve(p, dense, CurveKind::FROC));
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const auto& pt = c.points[i];
      if (!pt.saturated) CHECK(pt.negative_count < pt.budget);
      if (i > 0) {
        CHECK(pt.threshold <= c.points[i - 1].threshold);
        CHECK(pt.positive_count >= c.points[i - 1].positive_count);
      }
    }
    // Exactness: no smaller observed score satisfies the budget.
    for (const auto& pt : c.points) {
      for (double s : p.positives) {
        if (s < pt.threshold) {
          std::size_t n = 0;
          for (double v : p.negatives) n += v >= s ? 1 : 0;
          CHECK(n >= pt.budget);
        }
      }
    }
  }
}
