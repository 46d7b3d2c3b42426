#include "csd/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <vector>

#include "csd/errors.hpp"

namespace csd {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, const char* name, std::size_t line) {
  double v = 0.0;
  std::string_view s(field);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (field.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, std::string("column ") + name + " is not a number: '" + field + "'");
  }
  if (!std::isfinite(v)) {
    throw ParseError(line, std::string("column ") + name + " must be finite");
  }
  return v;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ParsedData parse_csv(std::istream& in, bool rdd) {
  ParsedData data;
  data.rdd = rdd;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> col_group, col_w, col_z;
  std::size_t header_fields = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      have_header = true;
      header_fields = fields.size();
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string name = lower(fields[i]);
        if (name == "group") col_group = i;
        if (name == "w") col_w = i;
        if (name == "z") col_z = i;
      }
      if (!col_w || !col_z) throw ParseError(line_no, "header must name columns w and z");
      if (!rdd && !col_group) {
        throw ParseError(line_no, "header must name a group column (or use RDD mode with a cutoff)");
      }
      continue;
    }
    if (fields.size() != header_fields) {
      throw ParseError(line_no, "expected " + std::to_string(header_fields) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    ObservationPair obs;
    obs.w = parse_number(fields[*col_w], "w", line_no);
    obs.z = parse_number(fields[*col_z], "z", line_no);
    obs.index = data.rows++;
    if (rdd) {
      data.pooled.push_back(obs);
      continue;
    }
    const std::string g = lower(fields[*col_group]);
    if (g == "y") {
      data.ysample.push_back(obs);
    } else if (g == "x") {
      data.xsample.push_back(obs);
    } else {
      throw ParseError(line_no, "group must be Y or X, got '" + fields[*col_group] + "'");
    }
  }
  if (!have_header) throw EmptyInputError("data file is empty (header row required)");
  if (rdd) {
    if (data.pooled.empty()) throw EmptyInputError("data file has no rows");
  } else {
    if (data.ysample.empty()) throw EmptyInputError("group Y has no rows");
    if (data.xsample.empty()) throw EmptyInputError("group X has no rows");
  }
  return data;
}

ParsedData parse_csv_file(const std::string& path, bool rdd) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameterError("cannot open data file '" + path + "'");
  return parse_csv(in, rdd);
}

void write_csv(std::ostream& out, const ParsedData& data) {
  if (data.rdd) {
    out << "w,z\n";
    for (const auto& o : data.pooled) out << format_double(o.w) << ',' << format_double(o.z) << '\n';
    return;
  }
  struct Row {
    std::size_t index;
    char group;
    const ObservationPair* obs;
  };
  std::vector<Row> rows;
  for (const auto& o : data.ysample) rows.push_back({o.index, 'Y', &o});
  for (const auto& o : data.xsample) rows.push_back({o.index, 'X', &o});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.index < b.index; });
  out << "group,w,z\n";
  for (const auto& r : rows) {
    out << r.group << ',' << format_double(r.obs->w) << ',' << format_double(r.obs->z) << '\n';
  }
}

}  // namespace csd
