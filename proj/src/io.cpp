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
#include "openset/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "openset/error.hpp"

namespace openset {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kMagic = "openset-eval";

constexpr std::array<std::string_view, 8> kManifestColumns = {
    "IMAGE_ID", "DAY_ID", "X", "Y", "WIDTH", "HEIGHT", "LABEL", "CATEGORY"};
constexpr std::array<std::string_view, 6> kDetectionColumns = {
    "IMAGE_ID", "X", "Y", "WIDTH", "HEIGHT", "CONFIDENCE"};
constexpr std::array<std::string_view, 5> kCurveColumns = {
    "budget", "threshold", "count", "rate", "saturated"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

// Reads physical lines, stripping a trailing '\r' and counting line numbers.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source)
      : in_(in), source_(std::move(source)) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_ == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    return true;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(source_, line_, message);
  }
  [[noreturn]] void fail_at(std::size_t line, const std::string& message) const {
    throw ParseError(source_, line, message);
  }

  std::size_t line() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

using KeyValues = std::map<std::string, std::string>;

struct Preamble {
  std::vector<std::string> header;
  KeyValues kv;
  // Line of the version comment, 0 when absent.
  std::size_t comment_line = 0;
};

// Consumes the optional version comment and the header row. Returns the
// header fields and the key=value pairs of the version comment.
Preamble read_preamble(LineReader& reader, std::string_view kind) {
  Preamble p;
  std::string line;
  while (reader.next(line)) {
    if (line.starts_with("#")) {
      std::istringstream words(line.substr(1));
      std::string magic, file_kind, version;
      words >> magic;
      if (magic != kMagic) continue;
      words >> file_kind >> version;
      if (file_kind != kind) {
        reader.fail("expected a " + std::string(kind) + " file, found '" +
                    file_kind + "'");
      }
      if (version != "v1") reader.fail("unsupported format version '" + version + "'");
      std::string token;
      while (words >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) reader.fail("malformed version comment token '" + token + "'");
        p.kv[token.substr(0, eq)] = token.substr(eq + 1);
      }
      p.comment_line = reader.line();
      continue;
    }
    for (auto f : split_fields(line)) p.header.emplace_back(f);
    return p;
  }
  reader.fail("missing header row");
}

template <std::size_t N>
void expect_header(const LineReader& reader, const std::vector<std::string>& header,
                   const std::array<std::string_view, N>& columns) {
  if (header.size() != N) {
    reader.fail("header has " + std::to_string(header.size()) +
                " columns, expected " + std::to_string(N));
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (header[i] != columns[i]) {
      reader.fail("unexpected column '" + header[i] + "' (expected '" +
                  std::string(columns[i]) + "')");
    }
  }
}

double parse_real(const LineReader& reader, std::string_view field,
                  std::string_view column) {
  double value = 0.0;
  if (field.empty()) reader.fail("missing value for " + std::string(column));
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    reader.fail("malformed number '" + std::string(field) + "' in " +
                std::string(column));
  }
  if (!std::isfinite(value)) {
    reader.fail("non-finite " + std::string(column) + " '" + std::string(field) + "'");
  }
  return value;
}

long long parse_integer(const LineReader& reader, std::string_view field,
                        std::string_view column) {
  long long value = 0;
  if (field.empty()) reader.fail("missing value for " + std::string(column));
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    reader.fail("malformed integer '" + std::string(field) + "' in " +
                std::string(column));
  }
  return value;
}

IdentityLabel parse_label(const LineReader& reader, std::string_view field,
                          std::string_view column) {
  const long long v = parse_integer(reader, field, column);
  if (!IdentityLabel::is_valid_value(v) || v > std::numeric_limits<int>::max()) {
    reader.fail("invalid label " + std::string(field) + " in " +
                std::string(column) + " (expected a positive id or -1)");
  }
  return IdentityLabel(static_cast<int>(v));
}

BoundingBox parse_box(const LineReader& reader,
                      const std::vector<std::string_view>& f,
                      std::size_t first) {
  BoundingBox box{parse_real(reader, f[first], "X"),
                  parse_real(reader, f[first + 1], "Y"),
                  parse_real(reader, f[first + 2], "WIDTH"),
                  parse_real(reader, f[first + 3], "HEIGHT")};
  if (box.width <= 0.0) reader.fail("WIDTH must be positive");
  if (box.height <= 0.0) reader.fail("HEIGHT must be positive");
  return box;
}

std::string require_id(const LineReader& reader, std::string_view field,
                       std::string_view column) {
  if (field.empty()) reader.fail("empty " + std::string(column));
  return std::string(field);
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

void append_box(std::string& out, const BoundingBox& b) {
  out += format_number(b.x);
  out += ',';
  out += format_number(b.y);
  out += ',';
  out += format_number(b.width);
  out += ',';
  out += format_number(b.height);
}

template <typename Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ostringstream buffer;
  writer(buffer);
  write_text_file(path, buffer.str());
}

}  // namespace

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  if (value == 0.0) return "0";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// --- manifests --------------------------------------------------------------

ProtocolManifest parse_manifest_csv(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  auto [header, kv, comment_line] = read_preamble(reader, "manifest");
  expect_header(reader, header, kManifestColumns);
  Split split = Split::Unspecified;
  if (auto it = kv.find("split"); it != kv.end()) {
    auto s = split_from_name(it->second);
    if (!s) reader.fail_at(comment_line, "unknown split '" + it->second + "'");
    split = *s;
  }

  std::vector<FaceAnnotation> faces;
  std::map<std::string, std::string> images;
  std::set<std::tuple<std::string, double, double, double, double>> seen;
  std::string line;
  while (reader.next(line)) {
    const auto f = split_fields(line);
    if (f.size() != kManifestColumns.size()) {
      reader.fail("expected 8 fields, got " + std::to_string(f.size()));
    }
    std::string image = require_id(reader, f[0], "IMAGE_ID");
    std::string day(f[1]);
    auto [it, inserted] = images.emplace(image, day);
    if (!inserted && it->second != day) {
      reader.fail("image '" + image + "' already declared on day '" +
                  it->second + "'");
    }
    const bool face_less = std::all_of(f.begin() + 2, f.end(),
                                       [](std::string_view s) { return s.empty(); });
    if (face_less) continue;

    FaceAnnotation a;
    a.image_id = std::move(image);
    a.day_id = std::move(day);
    a.box = parse_box(reader, f, 2);
    a.label = parse_label(reader, f[6], "LABEL");
    auto category = category_from_code(f[7]);
    if (!category) reader.fail("unknown CATEGORY '" + std::string(f[7]) + "'");
    a.category = *category;
    if (a.category == MaskingCategory::Known && !a.label.is_known()) {
      reader.fail("category K requires a positive label");
    }
    if (a.category == MaskingCategory::Unknown && a.label.is_known()) {
      reader.fail("category U requires label -1");
    }
    if (!seen.emplace(a.image_id, a.box.x, a.box.y, a.box.width, a.box.height)
             .second) {
      reader.fail("duplicate annotation for image '" + a.image_id + "'");
    }
    faces.push_back(std::move(a));
  }
  return ProtocolManifest(split, std::move(faces), std::move(images));
}

ProtocolManifest parse_manifest_json(std::istream& in, const std::string& source,
                                     const fs::path& base_dir) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(source, 0, e.what());
  }
  try {
    if (doc.value("format", std::string()) != "openset-eval manifest") {
      throw ParseError(source, 0, "not an openset-eval manifest document");
    }
    if (doc.value("version", 0) != 1) {
      throw ParseError(source, 0, "unsupported manifest version");
    }
    Split split = Split::Unspecified;
    if (doc.contains("split")) {
      auto s = split_from_name(doc.at("split").get<std::string>());
      if (!s) throw ParseError(source, 0, "unknown split");
      split = *s;
    }

    std::vector<FaceAnnotation> faces;
    std::map<std::string, std::string> images;
    if (doc.contains("annotations_csv")) {
      const fs::path csv = base_dir / doc.at("annotations_csv").get<std::string>();
      ProtocolManifest inner = read_manifest(csv);
      faces = inner.annotations();
      images = inner.images();
    }
    if (doc.contains("annotations")) {
      for (const auto& a : doc.at("annotations")) {
        FaceAnnotation face;
        face.image_id = a.at("image_id").get<std::string>();
        face.day_id = a.value("day_id", std::string());
        const auto& box = a.at("box");
        if (!box.is_array() || box.size() != 4) {
          throw ParseError(source, 0, "box must be [x, y, width, height]");
        }
        face.box = {box[0].get<double>(), box[1].get<double>(),
                    box[2].get<double>(), box[3].get<double>()};
        if (!face.box.valid()) throw ParseError(source, 0, "invalid box");
        const auto label = a.at("label").get<long long>();
        if (!IdentityLabel::is_valid_value(label)) {
          throw ParseError(source, 0, "invalid label " + std::to_string(label));
        }
        face.label = IdentityLabel(static_cast<int>(label));
        auto category = category_from_code(a.at("category").get<std::string>());
        if (!category) throw ParseError(source, 0, "unknown category");
        face.category = *category;
        faces.push_back(std::move(face));
      }
    }
    if (doc.contains("images")) {
      for (const auto& [image, day] : doc.at("images").items()) {
        images.emplace(image, day.get<std::string>());
      }
    }
    TrainingDays days;
    if (doc.contains("training_days")) {
      for (const auto& [label, list] : doc.at("training_days").items()) {
        int id = 0;
        auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), id);
        if (ec != std::errc() || ptr != label.data() + label.size() || id < 1) {
          throw ParseError(source, 0, "invalid training_days identity '" + label + "'");
        }
        auto& set = days[id];
        for (const auto& d : list) set.insert(d.get<std::string>());
      }
    }
    return ProtocolManifest(split, std::move(faces), std::move(images),
                            std::move(days));
  } catch (const json::exception& e) {
    throw ParseError(source, 0, e.what());
  }
}

ProtocolManifest read_manifest(const fs::path& path) {
  std::ifstream in = open_input(path);
  if (path.extension() == ".json") {
    return parse_manifest_json(in, path.string(), path.parent_path());
  }
  return parse_manifest_csv(in, path.string());
}

void write_manifest_csv(std::ostream& out, const ProtocolManifest& manifest) {
  std::string text = "# openset-eval manifest v1 split=";
  text += split_name(manifest.split());
  text += "\nIMAGE_ID,DAY_ID,X,Y,WIDTH,HEIGHT,LABEL,CATEGORY\n";
  std::set<std::string> with_faces;
  for (const auto& a : manifest.annotations()) {
    with_faces.insert(a.image_id);
    text += a.image_id;
    text += ',';
    text += a.day_id;
    text += ',';
    append_box(text, a.box);
    text += ',';
    text += std::to_string(a.label.value());
    text += ',';
    text += category_code(a.category);
    text += '\n';
  }
  for (const auto& [image, day] : manifest.images()) {
    if (with_faces.count(image)) continue;
    text += image + ',' + day + ",,,,,,\n";
  }
  out << text;
}

void write_manifest_json(std::ostream& out, const ProtocolManifest& manifest) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["format"] = "openset-eval manifest";
  doc["version"] = 1;
  doc["split"] = std::string(split_name(manifest.split()));
  ordered_json images = ordered_json::object();
  for (const auto& [image, day] : manifest.images()) images[image] = day;
  doc["images"] = std::move(images);
  ordered_json faces = ordered_json::array();
  for (const auto& a : manifest.annotations()) {
    faces.push_back({{"image_id", a.image_id},
                     {"day_id", a.day_id},
                     {"box", {a.box.x, a.box.y, a.box.width, a.box.height}},
                     {"label", a.label.value()},
                     {"category", std::string(category_code(a.category))}});
  }
  doc["annotations"] = std::move(faces);
  ordered_json days = ordered_json::object();
  for (const auto& [label, set] : manifest.training_days()) {
    days[std::to_string(label)] = std::vector<std::string>(set.begin(), set.end());
  }
  doc["training_days"] = std::move(days);
  out << doc.dump(1) << '\n';
}

void write_manifest(const fs::path& path, const ProtocolManifest& manifest) {
  write_with(path, [&](std::ostream& os) {
    if (path.extension() == ".json") {
      write_manifest_json(os, manifest);
    } else {
      write_manifest_csv(os, manifest);
    }
  });
}

// --- submissions ------------------------------------------------------------

std::vector<DetectionRecord> parse_detections(std::istream& in,
                                              const std::string& source) {
  LineReader reader(in, source);
  auto header = read_preamble(reader, "detections").header;
  expect_header(reader, header, kDetectionColumns);
  std::vector<DetectionRecord> records;
  std::string line;
  while (reader.next(line)) {
    const auto f = split_fields(line);
    if (f.size() != kDetectionColumns.size()) {
      reader.fail("expected 6 fields, got " + std::to_string(f.size()));
    }
    DetectionRecord r;
    r.image_id = require_id(reader, f[0], "IMAGE_ID");
    r.box = parse_box(reader, f, 1);
    r.confidence = parse_real(reader, f[5], "CONFIDENCE");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<DetectionRecord> parse_detection_file(const fs::path& path) {
  std::ifstream in = open_input(path);
  return parse_detections(in, path.string());
}

std::vector<RecognitionRecord> parse_recognitions(
    std::istream& in, const std::string& source,
    std::vector<ParseWarning>* warnings) {
  LineReader reader(in, source);
  auto header = read_preamble(reader, "recognitions").header;
  if (header.size() < 7 || (header.size() - 5) % 2 != 0) {
    reader.fail("recognition header needs IMAGE_ID,X,Y,WIDTH,HEIGHT followed by "
                "LABEL_k,SCORE_k pairs");
  }
  for (std::size_t i = 0; i < 5; ++i) {
    if (header[i] != kDetectionColumns[i]) {
      reader.fail("unexpected column '" + header[i] + "'");
    }
  }
  for (std::size_t k = 1; 5 + 2 * k <= header.size(); ++k) {
    const std::string n = std::to_string(k);
    if (header[3 + 2 * k] != "LABEL_" + n || header[4 + 2 * k] != "SCORE_" + n) {
      reader.fail("unexpected columns '" + header[3 + 2 * k] + "," +
                  header[4 + 2 * k] + "' (expected LABEL_" + n + ",SCORE_" + n + ")");
    }
  }

  std::vector<RecognitionRecord> records;
  std::string line;
  while (reader.next(line)) {
    const auto f = split_fields(line);
    if (f.size() > header.size()) {
      reader.fail("row has " + std::to_string(f.size()) +
                  " fields but the header declares " +
                  std::to_string(header.size()));
    }
    if (f.size() < 7 || (f.size() - 5) % 2 != 0) {
      reader.fail("row needs a box followed by complete LABEL,SCORE pairs");
    }
    RecognitionRecord r;
    r.image_id = require_id(reader, f[0], "IMAGE_ID");
    r.box = parse_box(reader, f, 1);
    bool trailing_empty = false;
    for (std::size_t i = 5; i < f.size(); i += 2) {
      if (f[i].empty() && f[i + 1].empty()) {
        trailing_empty = true;
        continue;
      }
      if (trailing_empty) reader.fail("candidate after an empty LABEL,SCORE pair");
      const std::string k = std::to_string((i - 5) / 2 + 1);
      Candidate c{parse_label(reader, f[i], "LABEL_" + k),
                  parse_real(reader, f[i + 1], "SCORE_" + k)};
      r.candidates.push_back(c);
    }
    if (r.candidates.empty()) reader.fail("row has no candidates");
    if (r.candidates.size() > kMaxCandidates) {
      reader.fail(std::to_string(r.candidates.size()) +
                  " candidates (at most 10 allowed)");
    }
    std::set<int> labels;
    for (const auto& c : r.candidates) {
      if (!labels.insert(c.label.value()).second) {
        reader.fail("duplicate label " + std::to_string(c.label.value()) +
                    " within one row");
      }
    }
    const auto by_score = [](const Candidate& a, const Candidate& b) {
      return a.score > b.score;
    };
    if (!std::is_sorted(r.candidates.begin(), r.candidates.end(), by_score)) {
      std::stable_sort(r.candidates.begin(), r.candidates.end(), by_score);
      if (warnings) {
        warnings->push_back(
            {reader.line(), "candidates re-sorted by descending score"});
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RecognitionRecord> parse_recognition_file(
    const fs::path& path, std::vector<ParseWarning>* warnings) {
  std::ifstream in = open_input(path);
  return parse_recognitions(in, path.string(), warnings);
}

void write_detections(std::ostream& out,
                      const std::vector<DetectionRecord>& records) {
  std::string text = "# openset-eval detections v1\nIMAGE_ID,X,Y,WIDTH,HEIGHT,CONFIDENCE\n";
  for (const auto& r : records) {
    text += r.image_id;
    text += ',';
    append_box(text, r.box);
    text += ',';
    text += format_number(r.confidence);
    text += '\n';
  }
  out << text;
}

void write_detection_file(const fs::path& path,
                          const std::vector<DetectionRecord>& records) {
  write_with(path, [&](std::ostream& os) { write_detections(os, records); });
}

void write_recognitions(std::ostream& out,
                        const std::vector<RecognitionRecord>& records) {
  std::size_t pairs = 1;
  for (const auto& r : records) pairs = std::max(pairs, r.candidates.size());
  std::string text = "# openset-eval recognitions v1\nIMAGE_ID,X,Y,WIDTH,HEIGHT";
  for (std::size_t k = 1; k <= pairs; ++k) {
    text += ",LABEL_" + std::to_string(k) + ",SCORE_" + std::to_string(k);
  }
  text += '\n';
  for (const auto& r : records) {
    text += r.image_id;
    text += ',';
    append_box(text, r.box);
    for (const auto& c : r.candidates) {
      text += ',';
      text += std::to_string(c.label.value());
      text += ',';
      text += format_number(c.score);
    }
    text += '\n';
  }
  out << text;
}

void write_recognition_file(const fs::path& path,
                            const std::vector<RecognitionRecord>& records) {
  write_with(path, [&](std::ostream& os) { write_recognitions(os, records); });
}

// --- reports ----------------------------------------------------------------

void write_curve_csv(std::ostream& out, const Curve& curve) {
  std::string text = "# openset-eval curve v1 kind=";
  text += curve_kind_name(curve.kind);
  text += " denominator=" + std::to_string(curve.denominator) + "\n";
  text += "budget,threshold,count,rate,saturated\n";
  for (const auto& p : curve.points) {
    text += std::to_string(p.budget);
    text += ',';
    text += format_number(p.threshold);
    text += ',';
    text += std::to_string(p.positive_count);
    text += ',';
    text += p.rate ? format_number(*p.rate) : "undefined";
    text += ',';
    text += p.saturated ? '1' : '0';
    text += '\n';
  }
  out << text;
}

Curve parse_curve_csv(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  auto [header, kv, comment_line] = read_preamble(reader, "curve");
  expect_header(reader, header, kCurveColumns);
  Curve curve;
  auto kind = curve_kind_from_name(kv.count("kind") ? kv["kind"] : "");
  if (!kind) {
    reader.fail_at(comment_line, "curve file lacks a valid kind= in its version comment");
  }
  curve.kind = *kind;
  if (kv.count("denominator")) {
    const std::string& d = kv["denominator"];
    auto [end, ec] = std::from_chars(d.data(), d.data() + d.size(), curve.denominator);
    if (ec != std::errc() || end != d.data() + d.size() || d.empty()) {
      reader.fail_at(comment_line, "invalid denominator '" + d + "'");
    }
  }
  std::string line;
  while (reader.next(line)) {
    const auto f = split_fields(line);
    if (f.size() != kCurveColumns.size()) {
      reader.fail("expected 5 fields, got " + std::to_string(f.size()));
    }
    OperatingPoint p;
    const long long budget = parse_integer(reader, f[0], "budget");
    if (budget < 1) reader.fail("budget must be >= 1");
    p.budget = static_cast<std::size_t>(budget);
    if (f[1] == "inf") {
      p.threshold = kInfinity;
    } else {
      p.threshold = parse_real(reader, f[1], "threshold");
    }
    const long long count = parse_integer(reader, f[2], "count");
    if (count < 0) reader.fail("count must be >= 0");
    p.positive_count = static_cast<std::size_t>(count);
    if (f[3] != "undefined") p.rate = parse_real(reader, f[3], "rate");
    if (f[4] != "0" && f[4] != "1") reader.fail("saturated must be 0 or 1");
    p.saturated = f[4] == "1";
    curve.points.push_back(p);
  }
  return curve;
}

Curve read_curve_file(const fs::path& path) {
  std::ifstream in = open_input(path);
  return parse_curve_csv(in, path.string());
}

void write_summary_csv(std::ostream& out, const SummaryTable& table) {
  std::string text = "# openset-eval summary v1 kind=";
  text += curve_kind_name(table.kind);
  text += "\nbudget";
  for (const auto& name : table.participants) text += "," + name;
  text += '\n';
  for (std::size_t row = 0; row < table.budgets.size(); ++row) {
    text += std::to_string(table.budgets[row]);
    for (const auto& cell : table.cells[row]) {
      text += ',';
      text += std::to_string(cell.count);
      if (cell.saturated) text += '^';
      if (cell.best) text += '*';
    }
    text += '\n';
  }
  out << text;
}

namespace {

std::string fixed2(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::fixed, 2);
  return std::string(buf.data(), ptr);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr std::array<std::string_view, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

void write_svg(std::ostream& out,
               const std::vector<std::pair<std::string, Curve>>& series,
               const std::string& title) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 60, kRight = 170, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::size_t lo = 0, hi = 0;
  for (const auto& [name, curve] : series) {
    for (const auto& p : curve.points) {
      lo = lo == 0 ? p.budget : std::min(lo, p.budget);
      hi = std::max(hi, p.budget);
    }
  }
  if (lo == 0) lo = hi = 1;
  const double dec_lo = std::floor(std::log10(static_cast<double>(lo)));
  double dec_hi = std::ceil(std::log10(static_cast<double>(hi)));
  if (dec_hi <= dec_lo) dec_hi = dec_lo + 1;
  const auto x_of = [&](double budget) {
    return kLeft + plot_w * (std::log10(budget) - dec_lo) / (dec_hi - dec_lo);
  };
  const auto y_of = [&](double rate) { return kTop + plot_h * (1.0 - rate); };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
       fixed2(kWidth) + "\" height=\"" + fixed2(kHeight) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fixed2(kLeft + plot_w / 2) +
       "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"14\">" + xml_escape(title) + "</text>\n";
  s += "<rect x=\"" + fixed2(kLeft) + "\" y=\"" + fixed2(kTop) + "\" width=\"" +
       fixed2(plot_w) + "\" height=\"" + fixed2(plot_h) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(dec_lo); d <= static_cast<int>(dec_hi); ++d) {
    const double x = x_of(std::pow(10.0, d));
    s += "<line x1=\"" + fixed2(x) + "\" y1=\"" + fixed2(kTop) + "\" x2=\"" +
         fixed2(x) + "\" y2=\"" + fixed2(kTop + plot_h) +
         "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + fixed2(x) + "\" y=\"" + fixed2(kTop + plot_h + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
         "1e" + std::to_string(d) + "</text>\n";
  }
  for (int i = 0; i <= 10; i += 2) {
    const double y = y_of(i / 10.0);
    s += "<line x1=\"" + fixed2(kLeft) + "\" y1=\"" + fixed2(y) + "\" x2=\"" +
         fixed2(kLeft + plot_w) + "\" y2=\"" + fixed2(y) +
         "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + fixed2(kLeft - 6) + "\" y=\"" + fixed2(y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         fixed2(i / 10.0) + "</text>\n";
  }
  const std::string x_label =
      series.empty() || series.front().second.kind == CurveKind::FROC
          ? "false accepts"
          : series.front().second.kind == CurveKind::DIR
                ? "false identifications"
                : "correctly identified faces";
  s += "<text x=\"" + fixed2(kLeft + plot_w / 2) + "\" y=\"" +
       fixed2(kHeight - 10) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
       x_label + "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& [name, curve] = series[i];
    const std::string_view color = kPalette[i % kPalette.size()];
    std::string pts;
    for (const auto& p : curve.points) {
      if (!p.rate) continue;
      if (!pts.empty()) pts += ' ';
      pts += fixed2(x_of(static_cast<double>(p.budget))) + "," +
             fixed2(y_of(*p.rate));
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(i);
    s += "<line x1=\"" + fixed2(kLeft + plot_w + 12) + "\" y1=\"" + fixed2(ly) +
         "\" x2=\"" + fixed2(kLeft + plot_w + 32) + "\" y2=\"" + fixed2(ly) +
         "\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fixed2(kLeft + plot_w + 38) + "\" y=\"" +
         fixed2(ly + 4) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
         xml_escape(name) + "</text>\n";
  }
  s += "</svg>\n";
  out << s;
}

std::vector<fs::path> emit_report(const std::map<std::string, Curve>& curves,
                                  const fs::path& destination,
                                  const ReportOptions& options) {
  std::vector<fs::path> written;
  std::error_code ec;
  fs::create_directories(destination, ec);
  if (ec && !fs::is_directory(destination)) {
    throw IoError("cannot create output directory '" + destination.string() +
                  "': " + ec.message());
  }
  std::vector<std::pair<std::string, Curve>> all;
  for (const auto& [name, curve] : curves) {
    const std::string stem = options.prefix + "_" + name;
    const fs::path csv = destination / (stem + ".csv");
    write_with(csv, [&](std::ostream& os) { write_curve_csv(os, curve); });
    written.push_back(csv);
    if (options.svg) {
      const fs::path svg = destination / (stem + ".svg");
      const std::string title =
          (options.title.empty() ? std::string(curve_kind_name(curve.kind))
                                 : options.title) + " - " + name;
      write_with(svg, [&](std::ostream& os) {
        write_svg(os, {{name, curve}}, title);
      });
      written.push_back(svg);
    }
    all.emplace_back(name, curve);
  }
  if (options.summary && !curves.empty()) {
    const fs::path csv = destination / (options.prefix + "_summary.csv");
    const SummaryTable table = summary_table(curves);
    write_with(csv, [&](std::ostream& os) { write_summary_csv(os, table); });
    written.push_back(csv);
  }
  if (options.svg && curves.size() > 1) {
    const fs::path svg = destination / (options.prefix + "_all.svg");
    const std::string title =
        options.title.empty()
            ? std::string(curve_kind_name(curves.begin()->second.kind))
            : options.title;
    write_with(svg, [&](std::ostream& os) { write_svg(os, all, title); });
    written.push_back(svg);
  }
  return written;
}

}  // namespace openset
