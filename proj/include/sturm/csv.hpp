// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "sturm/errors.hpp"

namespace sturm {

/// Fixed float formatting for all emitted tables: 12 significant digits,
/// '.' decimal separator (C locale), so repeated runs are byte-identical.
inline std::string format_significant(double x, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

/// Line-oriented CSV writer with pinned '\n' endings.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header) {
    out_.open(path, std::ios::binary);
    if (!out_) throw Error("cannot open output file: " + path);
    out_ << header << "\n";
  }

  void row(const std::string& line) { out_ << line << "\n"; }

 private:
  std::ofstream out_;
};

}  // namespace sturm
