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
#include "openset/curves.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "openset/error.hpp"

namespace openset {

std::string_view curve_kind_name(CurveKind kind) noexcept {
  switch (kind) {
    case CurveKind::FROC:
      return "FROC";
    case CurveKind::DIR:
      return "DIR";
    case CurveKind::CRR:
      return "CRR";
  }
  return "?";
}

std::optional<CurveKind> curve_kind_from_name(std::string_view name) {
  for (CurveKind k : {CurveKind::FROC, CurveKind::DIR, CurveKind::CRR}) {
    if (curve_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

// Threshold search over pre-sorted inputs: negatives descending, candidates
// ascending. count(n >= t) < budget  <=>  t > budget-th largest negative.
double threshold_sorted(const std::vector<double>& negatives_desc,
                        std::size_t budget,
                        const std::vector<double>& candidates_asc) {
  if (negatives_desc.size() < budget) {
    return candidates_asc.empty() ? kInfinity : candidates_asc.front();
  }
  const double bound = negatives_desc[budget - 1];
  auto it = std::upper_bound(candidates_asc.begin(), candidates_asc.end(), bound);
  return it == candidates_asc.end() ? kInfinity : *it;
}

// Elements of an ascending vector that are >= value.
std::size_t count_at_least(const std::vector<double>& asc, double value) {
  return static_cast<std::size_t>(
      asc.end() - std::lower_bound(asc.begin(), asc.end(), value));
}

std::vector<double> sorted(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return v;
}

void check_grid(std::span<const std::size_t> budgets, const char* what) {
  if (budgets.empty()) throw InvalidArgument(std::string("empty ") + what);
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] == 0) {
      throw InvalidArgument(std::string(what) + " entries must be >= 1");
    }
    if (i > 0 && budgets[i] <= budgets[i - 1]) {
      throw InvalidArgument(std::string(what) + " must be strictly increasing");
    }
  }
}

double rate_of(std::span<const double> positives, double threshold,
               std::size_t denominator) {
  if (denominator == 0) throw InvalidArgument("rate denominator is zero");
  std::size_t n = 0;
  for (double p : positives) n += p >= threshold ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(denominator);
}

}  // namespace

double calibrate_threshold(std::span<const double> negatives,
                           std::size_t budget,
                           std::span<const double> candidates) {
  if (budget == 0) throw InvalidArgument("budget must be >= 1");
  std::vector<double> neg(negatives.begin(), negatives.end());
  std::sort(neg.begin(), neg.end(), std::greater<>());
  return threshold_sorted(neg, budget, sorted(candidates));
}

double detection_rate(std::span<const double> positives, double threshold,
                      std::size_t total_faces) {
  return rate_of(positives, threshold, total_faces);
}

double identification_rate(std::span<const double> positives, double threshold,
                           std::size_t known_faces) {
  return rate_of(positives, threshold, known_faces);
}

double correct_rejection_rate(std::span<const double> subset,
                              double threshold) {
  if (subset.empty()) throw InvalidArgument("empty rejection subset");
  std::size_t n = 0;
  for (double s : subset) n += s < threshold ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(subset.size());
}

std::vector<std::size_t> default_budgets() {
  return {10, 100, 1000, 10000, 100000};
}

std::vector<std::size_t> log_spaced_budgets(std::size_t first,
                                            std::size_t last,
                                            std::size_t count) {
  if (first == 0 || last < first || count == 0) {
    throw InvalidArgument("log grid needs 1 <= first <= last and count >= 1");
  }
  std::vector<std::size_t> grid;
  if (count == 1) return {first};
  const double lo = std::log10(static_cast<double>(first));
  const double hi = std::log10(static_cast<double>(last));
  for (std::size_t i = 0; i < count; ++i) {
    const double e = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(count - 1);
    const auto v = static_cast<std::size_t>(std::llround(std::pow(10.0, e)));
    if (grid.empty() || v > grid.back()) grid.push_back(v);
  }
  return grid;
}

Curve build_curve(const ScorePartition& partition,
                  std::span<const std::size_t> budgets, CurveKind kind) {
  if (kind == CurveKind::CRR) {
    throw InvalidArgument("build_curve handles FROC and DIR curves only");
  }
  check_grid(budgets, "budgets");

  std::vector<double> neg_desc = partition.negatives;
  std::sort(neg_desc.begin(), neg_desc.end(), std::greater<>());
  const std::vector<double> pos_asc = sorted(partition.positives);
  std::vector<double> candidates = pos_asc;
  candidates.insert(candidates.end(), neg_desc.begin(), neg_desc.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  const std::vector<double> neg_asc(neg_desc.rbegin(), neg_desc.rend());

  Curve curve{kind, {}, partition.denominator};
  curve.points.reserve(budgets.size());
  for (std::size_t budget : budgets) {
    OperatingPoint p;
    p.budget = budget;
    p.threshold = threshold_sorted(neg_desc, budget, candidates);
    p.positive_count = count_at_least(pos_asc, p.threshold);
    p.negative_count = count_at_least(neg_asc, p.threshold);
    p.saturated = neg_desc.size() < budget;
    if (partition.denominator > 0) {
      p.rate = static_cast<double>(p.positive_count) /
               static_cast<double>(partition.denominator);
    }
    curve.points.push_back(p);
  }
  return curve;
}

Curve correct_rejection_curve(const ScorePartition& partition, NegativeTag tag,
                              std::span<const std::size_t> grid) {
  const std::vector<double>& subset = partition.tagged(tag);
  if (subset.empty()) {
    throw InvalidArgument("no false identifications tagged '" +
                          std::string(tag_name(tag)) + "'");
  }
  check_grid(grid, "grid");
  const std::vector<double> subset_asc = sorted(subset);
  const std::vector<double> pos_asc = sorted(partition.positives);

  Curve curve{CurveKind::CRR, {}, subset.size()};
  for (std::size_t k : grid) {
    OperatingPoint p;
    p.budget = k;
    p.saturated = k > pos_asc.size();
    if (!pos_asc.empty()) {
      const std::size_t rank = std::min(k, pos_asc.size());
      p.threshold = pos_asc[pos_asc.size() - rank];
    }
    p.positive_count = count_at_least(pos_asc, p.threshold);
    p.negative_count = count_at_least(subset_asc, p.threshold);
    p.rate = static_cast<double>(subset_asc.size() - p.negative_count) /
             static_cast<double>(subset_asc.size());
    curve.points.push_back(p);
  }
  return curve;
}

SummaryTable summary_table(const std::map<std::string, Curve>& curves) {
  SummaryTable table;
  if (curves.empty()) return table;
  const Curve& first = curves.begin()->second;
  table.kind = first.kind;
  for (const auto& p : first.points) table.budgets.push_back(p.budget);
  for (const auto& [name, curve] : curves) {
    if (curve.kind != first.kind) {
      throw InvalidArgument("curve '" + name + "' is " +
                            std::string(curve_kind_name(curve.kind)) +
                            ", expected " +
                            std::string(curve_kind_name(first.kind)));
    }
    if (curve.points.size() != table.budgets.size()) {
      throw InvalidArgument("curve '" + name + "' has mismatched budgets");
    }
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      if (curve.points[i].budget != table.budgets[i]) {
        throw InvalidArgument("curve '" + name + "' has mismatched budgets");
      }
    }
    table.participants.push_back(name);
  }
  table.cells.assign(table.budgets.size(),
                     std::vector<SummaryCell>(table.participants.size()));
  for (std::size_t row = 0; row < table.budgets.size(); ++row) {
    std::size_t col = 0;
    std::size_t best = 0;
    for (const auto& [name, curve] : curves) {
      const OperatingPoint& p = curve.points[row];
      table.cells[row][col] = {p.positive_count, p.saturated, false};
      best = std::max(best, p.positive_count);
      ++col;
    }
    for (auto& cell : table.cells[row]) cell.best = cell.count == best;
  }
  return table;
}

}  // namespace openset
