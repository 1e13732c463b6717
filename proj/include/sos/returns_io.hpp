#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

namespace sos::io {

// Daily log excess returns keyed by strictly increasing ISO-8601 dates.
struct ReturnSeries {
  std::vector<std::string> dates;
  Eigen::VectorXd returns;

  long size() const noexcept { return returns.size(); }
  void validate() const;  // shapes, date format, monotonicity, finiteness
};

// Reads a CSV with the exact header `date,excess_log_return`. Lines starting
// with '#' (provenance stamps) are skipped wherever they appear. Malformed
// rows, duplicate or non-monotone dates raise a data error naming the line.
ReturnSeries read_returns_csv(const std::string& path);

// Writes the same layout; values are printed with 17 significant digits so
// a round trip reproduces them bit for bit. Each comment string is emitted
// as a '# '-prefixed line above the header.
void write_returns_csv(const std::string& path, const ReturnSeries& series,
                       std::span<const std::string> comments = {});

// Wraps raw simulated returns in consecutive calendar dates starting at
// 2000-01-03, for artifacts that need the on-disk format.
ReturnSeries with_synthetic_dates(const Eigen::VectorXd& returns);

}  // namespace sos::io
