#include "sos/returns_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sos/errors.hpp"

namespace sos::io {

namespace {

constexpr const char* kHeader = "date,excess_log_return";

[[noreturn]] void fail(const std::string& path, long line,
                       const std::string& what) {
  throw DataError(path + ":" + std::to_string(line) + ": " + what);
}

bool valid_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(s[static_cast<std::size_t>(i)])))
      return false;
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

// Proleptic Gregorian civil date for a count of days since 1970-01-01.
// Standard days-from-civil inversion on 400-year eras.
void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const long doe = z - era * 146097;                               // [0,146096]
  const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);        // [0,365]
  const long mp = (5 * doy + 2) / 153;                             // [0,11]
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(yoe + era * 400 + (m <= 2 ? 1 : 0));
}

}  // namespace

void ReturnSeries::validate() const {
  if (static_cast<long>(dates.size()) != returns.size())
    throw DataError("return series: date and value counts differ");
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (!valid_iso_date(dates[i]))
      throw DataError("return series: invalid date '" + dates[i] + "'");
    if (i > 0 && !(dates[i - 1] < dates[i]))
      throw DataError("return series: dates not strictly increasing at '" +
                      dates[i] + "'");
    if (!std::isfinite(returns(static_cast<Eigen::Index>(i))))
      throw DataError("return series: non-finite return at '" + dates[i] +
                      "'");
  }
}

ReturnSeries read_returns_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open for reading");

  std::string line;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (!line.empty() && line[0] == '#') continue;  // provenance stamps
    if (line != kHeader)
      fail(path, line_no, "expected header '" + std::string(kHeader) +
                              "', got '" + line + "'");
    have_header = true;
    break;
  }
  if (line_no == 0) fail(path, 1, "empty file");
  if (!have_header)
    fail(path, line_no + 1,
         "expected header '" + std::string(kHeader) + "', got end of file");

  std::vector<std::string> dates;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (!line.empty() && line[0] == '#') continue;  // provenance stamps
    if (line.empty()) fail(path, line_no, "blank row");
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      fail(path, line_no, "expected exactly two comma-separated fields");
    std::string date = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    if (!valid_iso_date(date))
      fail(path, line_no, "invalid ISO-8601 date '" + date + "'");
    if (!dates.empty()) {
      if (date == dates.back())
        fail(path, line_no, "duplicate date '" + date + "'");
      if (date < dates.back())
        fail(path, line_no, "dates must be strictly increasing ('" + date +
                                "' after '" + dates.back() + "')");
    }
    if (value.empty()) fail(path, line_no, "missing return value");
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size())
      fail(path, line_no, "malformed return value '" + value + "'");
    if (!std::isfinite(x))
      fail(path, line_no, "non-finite return value '" + value + "'");
    dates.push_back(std::move(date));
    values.push_back(x);
  }

  ReturnSeries out;
  out.dates = std::move(dates);
  out.returns = Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
  return out;
}

void write_returns_csv(const std::string& path, const ReturnSeries& series,
                       std::span<const std::string> comments) {
  series.validate();
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw DataError(path + ": cannot open for writing");
  bool ok = true;
  for (const std::string& c : comments)
    ok = ok && std::fprintf(f, "# %s\n", c.c_str()) >= 0;
  ok = ok && std::fprintf(f, "%s\n", kHeader) >= 0;
  for (long i = 0; ok && i < series.size(); ++i)
    ok = std::fprintf(f, "%s,%.17g\n",
                      series.dates[static_cast<std::size_t>(i)].c_str(),
                      series.returns(i)) >= 0;
  ok = std::fclose(f) == 0 && ok;
  if (!ok) throw DataError(path + ": write failed");
}

ReturnSeries with_synthetic_dates(const Eigen::VectorXd& returns) {
  // 2000-01-03 is day 10959 since 1970-01-01.
  constexpr long kStart = 10959;
  ReturnSeries out;
  out.returns = returns;
  out.dates.reserve(static_cast<std::size_t>(returns.size()));
  char buf[16];
  for (long i = 0; i < returns.size(); ++i) {
    int y = 0, m = 0, d = 0;
    civil_from_days(kStart + i, y, m, d);
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    out.dates.emplace_back(buf);
  }
  out.validate();
  return out;
}

}  // namespace sos::io
