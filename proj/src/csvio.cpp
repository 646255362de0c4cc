#include "trifree/csvio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace trifree::csvio {

namespace {

[[noreturn]] void fail_line(long line, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ": " << what;
  throw std::invalid_argument(msg.str());
}

[[noreturn]] void fail_cell(long line, const std::string& column,
                            const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ", column " << column << ": " << what;
  throw std::invalid_argument(msg.str());
}

std::string trimmed(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t')) --b;
  return s.substr(a, b - a);
}

// Whole-field numeric parses; surrounding blanks tolerated, nothing else.
bool parse_double(const std::string& raw, double& out) {
  std::string s = trimmed(raw);
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + s.size();
}

bool parse_long(const std::string& raw, long& out) {
  std::string s = trimmed(raw);
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtol(begin, &end, 10);
  return end == begin + s.size();
}

}  // namespace

std::string csv_escape(const std::string& field) {
  bool needs_quotes =
      (!field.empty() && field.front() == '#') ||
      field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.comments.push_back(line);
      continue;
    }

    CsvRecord record;
    record.line = line_no;
    std::string field;
    bool in_quotes = false;
    std::size_t i = 0;
    // A quoted field may contain embedded newlines; pull more lines in
    // while a quote is open.
    while (true) {
      if (i >= line.size()) {
        if (!in_quotes) break;
        if (!std::getline(in, line)) {
          fail_line(record.line, "unterminated quoted field");
        }
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        field += '\n';
        i = 0;
        continue;
      }
      char c = line[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          field += c;
          ++i;
        }
      } else if (c == '"') {
        if (!field.empty()) {
          fail_line(line_no, "quote inside an unquoted field");
        }
        in_quotes = true;
        ++i;
      } else if (c == ',') {
        record.fields.push_back(std::move(field));
        field.clear();
        ++i;
      } else {
        field += c;
        ++i;
      }
    }
    record.fields.push_back(std::move(field));
    table.records.push_back(std::move(record));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return read_csv(in);
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

void write_comment(std::ostream& out, const std::string& text) {
  out << "# " << text << '\n';
}

infer::Dataset ingest_table(const CsvTable& table, const IngestSpec& spec) {
  if (table.records.empty()) {
    throw std::invalid_argument("no header row in input");
  }
  const CsvRecord& header = table.records.front();
  const std::size_t width = header.fields.size();
  if (table.records.size() < 2) {
    throw std::invalid_argument("no data rows in input");
  }

  std::vector<std::string> names;
  names.reserve(width);
  for (const std::string& h : header.fields) names.push_back(trimmed(h));

  auto column_index = [&](const std::string& name) -> long {
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (names[j] == name) return long(j);
    }
    return -1;
  };

  const long response_col = column_index(spec.response_column);
  if (response_col < 0) {
    throw std::invalid_argument("response column '" + spec.response_column +
                                "' not found in header");
  }
  std::set<long> factor_cols;
  for (const std::string& f : spec.factor_columns) {
    long j = column_index(f);
    if (j < 0) {
      throw std::invalid_argument("factor column '" + f +
                                  "' not found in header");
    }
    if (j == response_col) {
      throw std::invalid_argument("response column cannot be a factor");
    }
    factor_cols.insert(j);
  }

  // First pass: shape checks, missing-value rejection, factor levels.
  std::map<long, std::set<std::string>> levels;
  for (std::size_t r = 1; r < table.records.size(); ++r) {
    const CsvRecord& rec = table.records[r];
    if (rec.fields.size() != width) {
      fail_line(rec.line, "expected " + std::to_string(width) +
                              " fields, found " +
                              std::to_string(rec.fields.size()));
    }
    for (std::size_t j = 0; j < width; ++j) {
      if (trimmed(rec.fields[j]).empty()) {
        fail_cell(rec.line, names[j], "missing value");
      }
    }
    for (long j : factor_cols) {
      levels[j].insert(rec.fields[std::size_t(j)]);
    }
  }

  // Output column layout: original order, factors expanded in place to
  // their k-1 indicators (sorted levels, first level is the baseline).
  struct OutCol {
    long source;
    bool factor;
    std::string level;  // factor indicators only
    std::string name;
  };
  std::vector<OutCol> out_cols;
  for (std::size_t j = 0; j < width; ++j) {
    if (long(j) == response_col) continue;
    if (factor_cols.count(long(j))) {
      const auto& lv = levels[long(j)];
      bool first = true;
      for (const std::string& level : lv) {
        if (first) {
          first = false;  // baseline level carries no column
          continue;
        }
        out_cols.push_back(
            {long(j), true, level, names[j] + "=" + level});
      }
    } else {
      out_cols.push_back({long(j), false, "", names[j]});
    }
  }

  const long n = long(table.records.size()) - 1;
  infer::Dataset data;
  data.responses.resize(std::size_t(n));
  data.covariates.resize(n, long(out_cols.size()));
  for (const OutCol& c : out_cols) data.column_names.push_back(c.name);

  for (long i = 0; i < n; ++i) {
    const CsvRecord& rec = table.records[std::size_t(i) + 1];
    long y = 0;
    const std::string& raw_y = rec.fields[std::size_t(response_col)];
    if (!parse_long(raw_y, y)) {
      fail_cell(rec.line, names[std::size_t(response_col)],
                "response '" + raw_y + "' is not an integer");
    }
    if (y < 0) {
      fail_cell(rec.line, names[std::size_t(response_col)],
                "response must be non-negative");
    }
    data.responses[std::size_t(i)] = y;
    for (std::size_t k = 0; k < out_cols.size(); ++k) {
      const OutCol& c = out_cols[k];
      const std::string& raw = rec.fields[std::size_t(c.source)];
      if (c.factor) {
        data.covariates(i, long(k)) = raw == c.level ? 1.0 : 0.0;
      } else {
        double v = 0.0;
        if (!parse_double(raw, v)) {
          fail_cell(rec.line, c.name, "'" + raw + "' is not a number");
        }
        data.covariates(i, long(k)) = v;
      }
    }
  }
  return data;
}

infer::Dataset csv_ingest(const std::string& path, const IngestSpec& spec) {
  return ingest_table(read_csv_file(path), spec);
}

std::string csv_emit(const infer::Dataset& data,
                     const std::string& response_name) {
  std::ostringstream out;
  std::vector<std::string> row;
  row.push_back(response_name);
  for (const std::string& c : data.column_names) row.push_back(c);
  write_row(out, row);
  for (std::size_t i = 0; i < data.responses.size(); ++i) {
    row.clear();
    row.push_back(std::to_string(data.responses[i]));
    for (long j = 0; j < data.covariates.cols(); ++j) {
      row.push_back(format_double(data.covariates(long(i), j)));
    }
    write_row(out, row);
  }
  return out.str();
}

}  // namespace trifree::csvio
