#ifndef FORECLASSNET_DATASET_HPP
#define FORECLASSNET_DATASET_HPP

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "foreclassnet/errors.hpp"

namespace fcn {

enum class SplitTag { train, val, test };

inline const char* to_string(SplitTag s) {
  switch (s) {
    case SplitTag::train: return "train";
    case SplitTag::val: return "val";
    default: return "test";
  }
}

inline SplitTag split_from_string(const std::string& s) {
  if (s == "train") return SplitTag::train;
  if (s == "val") return SplitTag::val;
  if (s == "test") return SplitTag::test;
  throw io_error("unknown split tag '" + s + "'");
}

/// One series: m observed points, k future points, a class label, and a
/// stable id that keys the Welford accumulator.
struct TimeSeriesSample {
  std::int64_t id = 0;
  std::vector<double> observed;
  std::vector<double> future;
  int label = 0;
  SplitTag split = SplitTag::train;
  std::string provenance = "original";
};

struct Dataset {
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t num_classes = 0;
  std::vector<TimeSeriesSample> samples;

  std::vector<std::size_t> indices_of(SplitTag tag) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (samples[i].split == tag) out.push_back(i);
    return out;
  }

  std::size_t count(SplitTag tag) const { return indices_of(tag).size(); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(num_classes, 0);
    for (const TimeSeriesSample& s : samples) {
      if (s.label < 0 || static_cast<std::size_t>(s.label) >= num_classes)
        throw contract_error("Dataset: label " + std::to_string(s.label) +
                             " outside [0, " + std::to_string(num_classes) + ")");
      ++counts[static_cast<std::size_t>(s.label)];
    }
    return counts;
  }

  std::int64_t max_id() const {
    std::int64_t m = -1;
    for (const TimeSeriesSample& s : samples) m = std::max(m, s.id);
    return m;
  }

  void validate() const {
    for (const TimeSeriesSample& s : samples) {
      if (s.observed.size() != m || s.future.size() != k)
        throw dimension_error("Dataset: sample " + std::to_string(s.id) +
                              " has lengths (" + std::to_string(s.observed.size()) +
                              ", " + std::to_string(s.future.size()) +
                              "), expected (" + std::to_string(m) + ", " +
                              std::to_string(k) + ")");
      if (s.label < 0 || static_cast<std::size_t>(s.label) >= num_classes)
        throw contract_error("Dataset: sample " + std::to_string(s.id) +
                             " label out of range");
    }
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw io_error("line " + std::to_string(line_no) + ": malformed number '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw io_error("line " + std::to_string(line_no) + ": malformed integer '" + s + "'");
  return v;
}

}  // namespace detail

/// Native dataset CSV: id,split,label,x_1..x_m,xstar_1..xstar_k[,provenance].
/// Doubles are written with 17 significant digits so the round trip is exact.
inline void write_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  bool any_prov = false;
  for (const TimeSeriesSample& s : ds.samples)
    if (s.provenance != "original") any_prov = true;
  out << "id,split,label";
  for (std::size_t i = 1; i <= ds.m; ++i) out << ",x_" << i;
  for (std::size_t i = 1; i <= ds.k; ++i) out << ",xstar_" << i;
  if (any_prov) out << ",provenance";
  out << "\n";
  for (const TimeSeriesSample& s : ds.samples) {
    out << s.id << ',' << to_string(s.split) << ',' << s.label;
    for (double v : s.observed) out << ',' << detail::format_double(v);
    for (double v : s.future) out << ',' << detail::format_double(v);
    if (any_prov) out << ',' << s.provenance;
    out << "\n";
  }
  if (!out) throw io_error("failed writing '" + path + "'");
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw io_error(path + ": empty file (header required)");
  auto header = detail::split_csv_line(line);
  if (header.size() < 4 || header[0] != "id" || header[1] != "split" ||
      header[2] != "label")
    throw io_error(path + ": header must start with id,split,label");
  std::size_t m = 0, k = 0;
  bool has_prov = false;
  for (std::size_t i = 3; i < header.size(); ++i) {
    if (header[i].rfind("x_", 0) == 0 && header[i].rfind("xstar_", 0) != 0) ++m;
    else if (header[i].rfind("xstar_", 0) == 0) ++k;
    else if (header[i] == "provenance") has_prov = true;
    else throw io_error(path + ": unexpected column '" + header[i] + "'");
  }
  Dataset ds;
  ds.m = m;
  ds.k = k;
  const std::size_t want = 3 + m + k + (has_prov ? 1 : 0);
  std::size_t line_no = 1;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != want)
      throw io_error(path + ": line " + std::to_string(line_no) + ": expected " +
                     std::to_string(want) + " fields, got " +
                     std::to_string(fields.size()));
    TimeSeriesSample s;
    s.id = detail::parse_long(fields[0], line_no);
    s.split = split_from_string(fields[1]);
    s.label = static_cast<int>(detail::parse_long(fields[2], line_no));
    s.observed.reserve(m);
    s.future.reserve(k);
    for (std::size_t i = 0; i < m; ++i)
      s.observed.push_back(detail::parse_double(fields[3 + i], line_no));
    for (std::size_t i = 0; i < k; ++i)
      s.future.push_back(detail::parse_double(fields[3 + m + i], line_no));
    if (has_prov) s.provenance = fields[3 + m + k];
    max_label = std::max(max_label, s.label);
    ds.samples.push_back(std::move(s));
  }
  ds.num_classes = static_cast<std::size_t>(max_label + 1);
  ds.validate();
  return ds;
}

}  // namespace fcn

#endif  // FORECLASSNET_DATASET_HPP
