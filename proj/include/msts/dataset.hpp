#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "msts/error.hpp"

namespace msts {

/// One labeled multivariate series: n_features value sequences of equal
/// length plus a class label and a stable 0-based ordinal.
struct Sample {
  std::vector<std::vector<double>> series;
  std::string label;
  std::size_t index = 0;

  bool operator==(const Sample&) const = default;
};

/// An equal-length multivariate time-series classification dataset. Class
/// labels are kept as opaque strings in declaration order; dense integer
/// codes are derived where counting is needed. Immutable once loaded and
/// safe to share across threads.
struct Dataset {
  std::vector<Sample> samples;
  std::size_t n_features = 0;
  std::size_t series_length = 0;
  std::vector<std::string> class_labels;

  std::size_t size() const { return samples.size(); }
  std::size_t n_classes() const { return class_labels.size(); }

  int label_code(const std::string& label) const {
    for (std::size_t c = 0; c < class_labels.size(); ++c)
      if (class_labels[c] == label) return static_cast<int>(c);
    throw InvalidArgument("label '" + label + "' not in the declared class set");
  }

  /// Per-sample label codes aligned to sample index.
  std::vector<int> label_codes() const {
    std::unordered_map<std::string, int> codes;
    for (std::size_t c = 0; c < class_labels.size(); ++c)
      codes.emplace(class_labels[c], static_cast<int>(c));
    std::vector<int> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
      out[i] = codes.at(samples[i].label);
    return out;
  }

  bool operator==(const Dataset&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) parts.push_back(s.substr(start, i - start));
  }
  return parts;
}

inline double parse_value(std::string_view token, std::size_t line) {
  const std::string_view v = trim(token);
  if (v == "?" || lower(v) == "nan")
    throw ParseError("missing-value marker '" + std::string(v) +
                         "'; only complete datasets are supported",
                     line);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ParseError("non-numeric value '" + std::string(v) + "'", line);
  if (!std::isfinite(out))
    throw ParseError("non-finite value '" + std::string(v) + "'", line);
  return out;
}

inline std::size_t parse_count(std::string_view token, const char* what,
                               std::size_t line) {
  std::size_t out = 0;
  const std::string_view v = trim(token);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ParseError(std::string("invalid ") + what + " '" + std::string(v) + "'",
                     line);
  return out;
}

inline void check_shape(const Dataset& d) {
  if (d.class_labels.empty())
    throw ParseError("dataset declares no class labels");
  std::set<std::string> declared(d.class_labels.begin(), d.class_labels.end());
  for (const Sample& s : d.samples) {
    if (s.series.size() != d.n_features)
      throw ParseError("sample " + std::to_string(s.index) + " has " +
                       std::to_string(s.series.size()) + " dimensions, expected " +
                       std::to_string(d.n_features));
    for (const auto& seq : s.series)
      if (seq.size() != d.series_length)
        throw ParseError("sample " + std::to_string(s.index) +
                         " has a series of length " + std::to_string(seq.size()) +
                         ", expected " + std::to_string(d.series_length));
    if (!declared.count(s.label))
      throw ParseError("sample " + std::to_string(s.index) +
                       " carries undeclared class label '" + s.label + "'");
  }
}

} // namespace detail

/// Parses a UEA-style `.ts` file. Header lines begin with `@`
/// (`@problemName`, `@dimensions`/`@univariate`, `@equalLength`,
/// `@seriesLength`, `@classLabel <true|false> <labels...>`), `@data` starts
/// the records, `#` lines are comments. Within a record, dimensions are
/// separated by `:`, values within a dimension by `,`, and the final field
/// is the class label. Only equal-length datasets without missing values are
/// accepted.
inline Dataset load_ts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open '" + path.string() + "'");

  Dataset d;
  std::optional<std::size_t> declared_dims;
  std::optional<std::size_t> declared_length;
  bool equal_length_declared = false;
  bool has_class_labels = false;
  bool in_data = false;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (!in_data) {
      if (line.front() != '@')
        throw ParseError("expected a header line starting with '@'", line_no);
      const auto tokens = detail::split_ws(line);
      const std::string key = detail::lower(tokens[0]);
      if (key == "@data") {
        in_data = true;
      } else if (key == "@dimensions") {
        if (tokens.size() < 2) throw ParseError("@dimensions needs a count", line_no);
        declared_dims = detail::parse_count(tokens[1], "dimension count", line_no);
      } else if (key == "@univariate") {
        if (tokens.size() >= 2 && detail::lower(tokens[1]) == "true")
          declared_dims = 1;
      } else if (key == "@equallength") {
        if (tokens.size() < 2 || detail::lower(tokens[1]) != "true")
          throw ParseError("unequal-length series are not supported", line_no);
        equal_length_declared = true;
      } else if (key == "@serieslength") {
        if (tokens.size() < 2) throw ParseError("@seriesLength needs a count", line_no);
        declared_length = detail::parse_count(tokens[1], "series length", line_no);
        equal_length_declared = true;
      } else if (key == "@classlabel") {
        if (tokens.size() < 2 || detail::lower(tokens[1]) != "true")
          throw ParseError("@classLabel must declare labels for classification data",
                           line_no);
        for (std::size_t i = 2; i < tokens.size(); ++i)
          d.class_labels.emplace_back(tokens[i]);
        has_class_labels = !d.class_labels.empty();
      } else if (key == "@timestamps") {
        if (tokens.size() >= 2 && detail::lower(tokens[1]) == "true")
          throw ParseError("timestamped series are not supported", line_no);
      }
      // other headers (@problemName, @missing, ...) carry no shape info
      continue;
    }

    // record line
    const auto fields = detail::split(line, ':');
    if (fields.size() < 2)
      throw ParseError("record has no ':'-separated label field", line_no);
    Sample s;
    s.index = d.samples.size();
    s.label = std::string(detail::trim(fields.back()));
    if (s.label.empty()) throw ParseError("empty class label", line_no);
    for (std::size_t f = 0; f + 1 < fields.size(); ++f) {
      std::vector<double> seq;
      for (const auto tok : detail::split(fields[f], ','))
        seq.push_back(detail::parse_value(tok, line_no));
      s.series.push_back(std::move(seq));
    }
    if (declared_dims && s.series.size() != *declared_dims)
      throw ParseError("record has " + std::to_string(s.series.size()) +
                           " dimensions, header declares " +
                           std::to_string(*declared_dims),
                       line_no);
    if (!declared_length) declared_length = s.series.front().size();
    for (const auto& seq : s.series)
      if (seq.size() != *declared_length)
        throw ParseError("series of length " + std::to_string(seq.size()) +
                             " in an equal-length dataset of length " +
                             std::to_string(*declared_length),
                         line_no);
    d.samples.push_back(std::move(s));
  }

  if (!in_data) throw ParseError("no @data section found");
  if (d.samples.empty()) throw ParseError("no records after @data");
  if (!has_class_labels) throw ParseError("header declares no class labels");
  if (!equal_length_declared)
    throw ParseError("header does not declare equal-length series");
  d.n_features = declared_dims ? *declared_dims : d.samples.front().series.size();
  d.series_length = *declared_length;
  detail::check_shape(d);
  return d;
}

/// Writes a dataset back to `.ts` with full-precision values; reloading the
/// file yields an identical Dataset.
inline void save_ts(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "@problemName " << path.stem().string() << "\n";
  out << "@timeStamps false\n";
  out << "@missing false\n";
  out << "@univariate " << (d.n_features == 1 ? "true" : "false") << "\n";
  out << "@dimensions " << d.n_features << "\n";
  out << "@equalLength true\n";
  out << "@seriesLength " << d.series_length << "\n";
  out << "@classLabel true";
  for (const auto& label : d.class_labels) out << ' ' << label;
  out << "\n@data\n";
  char buf[40];
  for (const Sample& s : d.samples) {
    for (std::size_t f = 0; f < s.series.size(); ++f) {
      if (f > 0) out << ':';
      for (std::size_t t = 0; t < s.series[f].size(); ++t) {
        if (t > 0) out << ',';
        std::snprintf(buf, sizeof buf, "%.17g", s.series[f][t]);
        out << buf;
      }
    }
    out << ':' << s.label << "\n";
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

/// Concatenates two datasets with identical shape and class-label sets.
/// a's samples come first; indices are reassigned contiguously and a's label
/// declaration order is kept.
inline Dataset merge(const Dataset& a, const Dataset& b) {
  if (a.n_features != b.n_features || a.series_length != b.series_length)
    throw InvalidArgument(
        "merge: shape mismatch (" + std::to_string(a.n_features) + "x" +
        std::to_string(a.series_length) + " vs " + std::to_string(b.n_features) +
        "x" + std::to_string(b.series_length) + ")");
  const std::set<std::string> la(a.class_labels.begin(), a.class_labels.end());
  const std::set<std::string> lb(b.class_labels.begin(), b.class_labels.end());
  if (la != lb) throw InvalidArgument("merge: class label sets differ");

  Dataset out;
  out.n_features = a.n_features;
  out.series_length = a.series_length;
  out.class_labels = a.class_labels;
  out.samples.reserve(a.size() + b.size());
  for (const Dataset* src : {&a, &b})
    for (const Sample& s : src->samples) {
      Sample copy = s;
      copy.index = out.samples.size();
      out.samples.push_back(std::move(copy));
    }
  return out;
}

/// Column layout of a CSV dataset file.
enum class CsvLayout {
  kLong, ///< one row per (sample, feature, timestep) cell
  kWide, ///< one row per (sample, feature) series; remaining columns are timesteps
};

/// Column-name mapping for load_csv. The label column must be consistent
/// across all rows of a sample.
struct CsvSchema {
  CsvLayout layout = CsvLayout::kLong;
  std::string sample_column = "sample_id";
  std::string feature_column = "feature_id";
  std::string timestep_column = "timestep"; // long layout only
  std::string value_column = "value";       // long layout only
  std::string label_column = "label";
};

namespace detail {

// Minimal CSV field splitter; supports double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(std::move(field));
  return fields;
}

inline std::size_t column_index(const std::vector<std::string>& header,
                                const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ParseError("CSV header has no column '" + name + "'", 1);
}

} // namespace detail

/// Loads a dataset from CSV. Long layout expects one value cell per row;
/// wide layout one series per row with the trailing columns as timesteps in
/// order. Sample order follows first appearance; class-label order likewise.
inline Dataset load_csv(const std::filesystem::path& path,
                        const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");

  std::string raw;
  if (!std::getline(in, raw)) throw ParseError("empty CSV file", 1);
  const std::vector<std::string> header = detail::split_csv(raw, 1);
  const std::size_t sample_col = detail::column_index(header, schema.sample_column);
  const std::size_t feature_col = detail::column_index(header, schema.feature_column);
  const std::size_t label_col = detail::column_index(header, schema.label_column);

  struct SampleAcc {
    std::string label;
    // feature -> timestep -> value
    std::map<std::size_t, std::map<std::size_t, double>> cells;
  };
  std::vector<std::string> sample_order;
  std::unordered_map<std::string, std::size_t> sample_ids;
  std::vector<SampleAcc> accs;
  std::vector<std::string> label_order;
  std::set<std::string> seen_labels;

  // wide layout: every column that is not an id/label column is a timestep
  const bool wide = schema.layout == CsvLayout::kWide;
  std::size_t value_col = 0, timestep_col = 0;
  if (!wide) {
    value_col = detail::column_index(header, schema.value_column);
    timestep_col = detail::column_index(header, schema.timestep_column);
  }

  std::size_t line_no = 1;
  while (std::getline(in, raw)) {
    ++line_no;
    if (detail::trim(raw).empty()) continue;
    const std::vector<std::string> fields = detail::split_csv(raw, line_no);
    if (fields.size() != header.size())
      throw ParseError("row has " + std::to_string(fields.size()) +
                           " fields, header has " + std::to_string(header.size()),
                       line_no);

    const std::string& sample_key = fields[sample_col];
    if (sample_key.empty()) throw ParseError("empty sample id", line_no);
    auto [it, inserted] = sample_ids.emplace(sample_key, accs.size());
    if (inserted) {
      sample_order.push_back(sample_key);
      accs.emplace_back();
    }
    SampleAcc& acc = accs[it->second];

    const std::string label(detail::trim(fields[label_col]));
    if (label.empty()) throw ParseError("missing label for sample '" + sample_key + "'", line_no);
    if (acc.label.empty()) {
      acc.label = label;
      if (seen_labels.insert(label).second) label_order.push_back(label);
    } else if (acc.label != label) {
      throw ParseError("conflicting labels '" + acc.label + "' and '" + label +
                           "' for sample '" + sample_key + "'",
                       line_no);
    }

    const std::size_t feature =
        detail::parse_count(fields[feature_col], "feature id", line_no);
    auto& by_step = acc.cells[feature];
    if (wide) {
      std::size_t t = 0;
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (c == sample_col || c == feature_col || c == label_col) continue;
        if (!by_step.emplace(t, detail::parse_value(fields[c], line_no)).second)
          throw ParseError("duplicate series row for sample '" + sample_key +
                               "' feature " + std::to_string(feature),
                           line_no);
        ++t;
      }
    } else {
      const std::size_t t =
          detail::parse_count(fields[timestep_col], "timestep", line_no);
      if (!by_step.emplace(t, detail::parse_value(fields[value_col], line_no)).second)
        throw ParseError("duplicate cell for sample '" + sample_key + "' feature " +
                             std::to_string(feature) + " timestep " +
                             std::to_string(t),
                         line_no);
    }
  }
  if (accs.empty()) throw ParseError("CSV contains no data rows");

  // determine the common shape and reject ragged data
  const std::size_t n_features = accs.front().cells.size();
  std::size_t series_length = 0;
  if (!accs.front().cells.empty())
    series_length = accs.front().cells.begin()->second.size();

  Dataset d;
  d.n_features = n_features;
  d.series_length = series_length;
  d.class_labels = label_order;
  for (std::size_t i = 0; i < accs.size(); ++i) {
    const SampleAcc& acc = accs[i];
    Sample s;
    s.index = i;
    s.label = acc.label;
    if (acc.cells.size() != n_features)
      throw ParseError("sample '" + sample_order[i] + "' has " +
                       std::to_string(acc.cells.size()) + " features, expected " +
                       std::to_string(n_features));
    std::size_t expect = 0;
    for (const auto& [feature, by_step] : acc.cells) {
      if (feature != expect++)
        throw ParseError("sample '" + sample_order[i] +
                         "' is missing feature " + std::to_string(expect - 1));
      if (by_step.size() != series_length)
        throw ParseError("ragged series: sample '" + sample_order[i] +
                         "' feature " + std::to_string(feature) + " has " +
                         std::to_string(by_step.size()) + " timesteps, expected " +
                         std::to_string(series_length));
      std::vector<double> seq;
      seq.reserve(series_length);
      std::size_t t = 0;
      for (const auto& [step, value] : by_step) {
        if (step != t++)
          throw ParseError("sample '" + sample_order[i] + "' feature " +
                           std::to_string(feature) + " is missing timestep " +
                           std::to_string(t - 1));
        seq.push_back(value);
      }
      s.series.push_back(std::move(seq));
    }
    d.samples.push_back(std::move(s));
  }
  detail::check_shape(d);
  return d;
}

/// Order-sensitive 64-bit FNV-1a content hash of the dataset: shape, label
/// declaration, and every sample's label and raw value bits. Used to detect
/// stale distance caches.
inline std::uint64_t content_fingerprint(const Dataset& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a 64-bit offset basis
  const auto mix_bytes = [&h](const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  const auto mix_u64 = [&](std::uint64_t v) { mix_bytes(&v, sizeof v); };
  const auto mix_str = [&](const std::string& s) {
    mix_u64(s.size());
    mix_bytes(s.data(), s.size());
  };

  mix_u64(d.n_features);
  mix_u64(d.series_length);
  mix_u64(d.class_labels.size());
  for (const auto& label : d.class_labels) mix_str(label);
  mix_u64(d.samples.size());
  for (const Sample& s : d.samples) {
    mix_str(s.label);
    for (const auto& seq : s.series) {
      for (double v : seq) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        mix_u64(bits);
      }
    }
  }
  return h;
}

} // namespace msts
