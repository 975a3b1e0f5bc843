// Copyright 2026 The RWDE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RWDE_REPORT_HPP_
#define RWDE_REPORT_HPP_

// Deterministic result emission: fixed-width float rendering, a tiny stable
// hash for config digests, and a CSV writer that stamps every file with the
// master seed and digest so reruns are byte-comparable.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rwde {

// 17 significant digits round-trip any double exactly.
inline std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return std::string(buf);
}

struct ReportMeta {
  std::uint64_t seed = 0;
  std::string config_digest;
};

// Rectangular CSV with `# key=value` header comments.  Rows are rendered by
// the caller (use format_g17 for floats) so the file is reproducible byte
// for byte.
class CsvReport {
 public:
  explicit CsvReport(std::vector<std::string> columns)
      : columns_(std::move(columns)) {}

  void add_comment(std::string key, std::string value) {
    comments_.emplace_back(std::move(key), std::move(value));
  }

  void add_row(std::vector<std::string> row) {
    if (row.size() != columns_.size())
      throw std::invalid_argument("CsvReport: row width mismatch");
    rows_.push_back(std::move(row));
  }

  std::size_t row_count() const { return rows_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::pair<std::string, std::string>>& comments() const {
    return comments_;
  }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& os, const ReportMeta& meta) const {
    os << "# seed=" << meta.seed << '\n';
    os << "# config=" << meta.config_digest << '\n';
    for (const auto& [k, v] : comments_) os << "# " << k << '=' << v << '\n';
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (c) os << ',';
      os << columns_[c];
    }
    os << '\n';
    for (const auto& row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) os << ',';
        os << row[c];
      }
      os << '\n';
    }
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> comments_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace rwde

#endif  // RWDE_REPORT_HPP_
