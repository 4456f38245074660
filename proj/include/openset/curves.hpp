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

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "openset/matching.hpp"

namespace openset {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class CurveKind { FROC, DIR, CRR };

std::string_view curve_kind_name(CurveKind kind) noexcept;
std::optional<CurveKind> curve_kind_from_name(std::string_view name);

struct OperatingPoint {
  // False-accept / false-identification budget, or the target number of
  // correct identifications for CRR curves.
  std::size_t budget = 0;
  double threshold = kInfinity;
  // nullopt when the curve denominator is zero.
  std::optional<double> rate;
  std::size_t positive_count = 0;
  // Negatives (or tagged subset members) scoring >= threshold.
  std::size_t negative_count = 0;
  // FROC/DIR: fewer negatives exist than the budget allows, so the point
  // reports every positive. CRR: the grid asks for more correct
  // identifications than exist.
  bool saturated = false;

  friend bool operator==(const OperatingPoint&,
                         const OperatingPoint&) = default;
};

struct Curve {
  CurveKind kind = CurveKind::FROC;
  std::vector<OperatingPoint> points;
  std::size_t denominator = 0;

  friend bool operator==(const Curve&, const Curve&) = default;
};

// Smallest value in candidates u {+inf} such that fewer than `budget`
// negatives score >= it. Throws InvalidArgument for budget 0.
double calibrate_threshold(std::span<const double> negatives,
                           std::size_t budget,
                           std::span<const double> candidates);

// |{c in positives : c >= threshold}| / total. Throws InvalidArgument when
// total is zero.
double detection_rate(std::span<const double> positives, double threshold,
                      std::size_t total_faces);
double identification_rate(std::span<const double> positives, double threshold,
                           std::size_t known_faces);

// Fraction of `subset` scoring strictly below threshold. Throws
// InvalidArgument for an empty subset.
double correct_rejection_rate(std::span<const double> subset,
                              double threshold);

// {10, 100, 1000, 10000, 100000}.
std::vector<std::size_t> default_budgets();

// `count` log-spaced integers from `first` to `last`, rounded, with
// duplicates removed.
std::vector<std::size_t> log_spaced_budgets(std::size_t first,
                                            std::size_t last,
                                            std::size_t count);

// One operating point per budget, thresholds calibrated over
// partition.negatives with candidates drawn from every observed score.
// `kind` must be FROC or DIR; budgets must be positive and strictly
// increasing.
Curve build_curve(const ScorePartition& partition,
                  std::span<const std::size_t> budgets, CurveKind kind);

// Correct rejection rate of one negative subset, with the threshold at the
// k-th largest positive score for each k in `grid`.
Curve correct_rejection_curve(const ScorePartition& partition, NegativeTag tag,
                              std::span<const std::size_t> grid);

struct SummaryCell {
  std::size_t count = 0;
  bool saturated = false;
  bool best = false;

  friend bool operator==(const SummaryCell&, const SummaryCell&) = default;
};

// Absolute positive counts per budget (rows) and participant (columns).
struct SummaryTable {
  CurveKind kind = CurveKind::FROC;
  std::vector<std::size_t> budgets;
  std::vector<std::string> participants;
  std::vector<std::vector<SummaryCell>> cells;

  friend bool operator==(const SummaryTable&, const SummaryTable&) = default;
};

// Throws InvalidArgument when the curves disagree on kind or budgets.
SummaryTable summary_table(const std::map<std::string, Curve>& curves);

}  // namespace openset
