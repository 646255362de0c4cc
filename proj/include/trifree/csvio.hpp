#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "trifree/infer.hpp"

// RFC-4180 CSV reading and writing, plus dataset ingestion for the
// regression front end.  Lines starting with '#' (outside quoted fields)
// are metadata comments: readers collect them, writers emit them for
// provenance headers.  All numeric formatting goes through shortest
// round-trip conversion, so emit -> ingest is lossless.

namespace trifree::csvio {

// Quotes a field when it contains a comma, quote, newline, or leading '#'.
std::string csv_escape(const std::string& field);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

struct CsvRecord {
  long line;  // 1-based line number where the record starts
  std::vector<std::string> fields;
};

struct CsvTable {
  std::vector<std::string> comments;  // '#' lines, marker and padding kept
  std::vector<CsvRecord> records;     // first record is the header row
};

// Throws std::invalid_argument with a line number on malformed input
// (unterminated quote, stray quote inside an unquoted field).
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

void write_row(std::ostream& out, const std::vector<std::string>& fields);
void write_comment(std::ostream& out, const std::string& text);  // "# text"

// Declares how a raw table becomes a modeling dataset: one integer
// response column plus covariates.  Columns named in `factor_columns`
// are expanded to k-1 indicator columns (levels sorted, first dropped,
// names "<column>=<level>"); all other columns must parse as numbers.
struct IngestSpec {
  std::string response_column;
  std::vector<std::string> factor_columns;
};

// Rejects missing values, non-integer or negative responses, and
// non-numeric fields with the offending row and column named.
infer::Dataset ingest_table(const CsvTable& table, const IngestSpec& spec);
infer::Dataset csv_ingest(const std::string& path, const IngestSpec& spec);

// Dataset back to CSV text (header + rows, no comments); the exact
// inverse of ingesting the result with no factor columns.
std::string csv_emit(const infer::Dataset& data,
                     const std::string& response_name = "y");

}  // namespace trifree::csvio
