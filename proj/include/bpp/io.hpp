#pragma once

// CSV ingestion for (time, value) series — ISO-8601 dates or real day counts,
// '#' comments, optional header, unsorted rows — plus deterministic writers
// for fitted series, synthetic datasets, and benchmark result tables.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "bpp/errors.hpp"
#include "bpp/simstudy.hpp"

namespace bpp {

/* Days since 1970-01-01 of a proleptic Gregorian date (Hinnant's algorithm). */
inline long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

inline void civil_from_days(long z, int* y, int* m, int* d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long yr = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  *d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  *m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  *y = static_cast<int>(yr + (*m <= 2));
}

inline std::string format_iso_date(long day_count) {
  int y = 0, m = 0, d = 0;
  civil_from_days(day_count, &y, &m, &d);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline bool parse_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

/* Strict YYYY-MM-DD; round-trips through the civil calendar so impossible
   dates (month 13, February 30) are rejected. */
inline bool parse_iso_date(const std::string& s, double* day_count) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  const int y = std::stoi(s.substr(0, 4));
  const int m = std::stoi(s.substr(5, 2));
  const int d = std::stoi(s.substr(8, 2));
  const long z = days_from_civil(y, m, d);
  int ry = 0, rm = 0, rd = 0;
  civil_from_days(z, &ry, &rm, &rd);
  if (ry != y || rm != m || rd != d) return false;
  *day_count = static_cast<double>(z);
  return true;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

struct SeriesData {
  std::vector<double> raw_times;  // day counts, sorted ascending
  std::vector<double> values;
  bool dates = false;  // every time field was an ISO date
};

inline SeriesData read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_failure("cannot open " + path);

  struct Row {
    double t, v;
    long line;
  };
  std::vector<Row> rows;
  std::string line;
  long line_no = 0;
  bool saw_data = false, all_dates = true;
  std::string bad_rows;
  auto note_bad = [&](long ln) { bad_rows += (bad_rows.empty() ? "" : ", ") + std::to_string(ln); };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::vector<std::string> fields = detail::split_csv(stripped);

    double t = 0.0;
    const bool is_date = !fields.empty() && detail::parse_iso_date(fields[0], &t);
    const bool is_num = !is_date && !fields.empty() && detail::parse_number(fields[0], &t);
    if (!is_date && !is_num) {
      if (!saw_data) continue;  // header line
      throw invalid_input(path + ": row " + std::to_string(line_no) +
                          ": unparseable time '" + (fields.empty() ? "" : fields[0]) + "'");
    }
    if (fields.size() < 2)
      throw invalid_input(path + ": row " + std::to_string(line_no) +
                          ": expected time,value columns");
    double v = 0.0;
    if (!detail::parse_number(fields[1], &v))
      throw invalid_input(path + ": row " + std::to_string(line_no) +
                          ": unparseable value '" + fields[1] + "'");
    if (!std::isfinite(v) || !std::isfinite(t)) note_bad(line_no);
    saw_data = true;
    all_dates = all_dates && is_date;
    rows.push_back({t, v, line_no});
  }
  if (!bad_rows.empty())
    throw invalid_input(path + ": non-finite entries at rows " + bad_rows);
  if (rows.empty()) throw invalid_input(path + ": no data rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.t < b.t; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].t == rows[i - 1].t)
      throw invalid_input(path + ": duplicate time at rows " +
                          std::to_string(rows[i - 1].line) + " and " +
                          std::to_string(rows[i].line));

  SeriesData out;
  out.dates = all_dates;
  out.raw_times.reserve(rows.size());
  out.values.reserve(rows.size());
  for (const Row& r : rows) {
    out.raw_times.push_back(r.t);
    out.values.push_back(r.v);
  }
  return out;
}

inline std::string format_time_field(double day_count, bool as_date) {
  if (as_date) return format_iso_date(static_cast<long>(std::llround(day_count)));
  return detail::fmt(day_count);
}

inline void write_series_csv(const std::string& path, const std::vector<double>& raw_times,
                             const std::vector<double>& values, bool as_dates = false,
                             const std::vector<std::string>& comments = {}) {
  if (raw_times.size() != values.size())
    throw invalid_input("write_series_csv: length mismatch");
  std::ofstream out(path);
  if (!out) throw io_failure("cannot write " + path);
  for (const std::string& c : comments) out << "# " << c << "\n";
  out << "time,value\n";
  for (std::size_t i = 0; i < raw_times.size(); ++i)
    out << format_time_field(raw_times[i], as_dates) << "," << detail::fmt(values[i])
        << "\n";
  if (!out) throw io_failure("failed writing " + path);
}

inline void write_fitted_csv(const std::string& path, const std::vector<double>& raw_times,
                             bool as_dates, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& fitted, const StatePath& states) {
  const std::size_t n = raw_times.size();
  if (static_cast<std::size_t>(y.size()) != n ||
      static_cast<std::size_t>(fitted.size()) != n || states.size() != n)
    throw invalid_input("write_fitted_csv: length mismatch");
  std::ofstream out(path);
  if (!out) throw io_failure("cannot write " + path);
  out << "time,y,fitted,state\n";
  for (std::size_t i = 0; i < n; ++i)
    out << format_time_field(raw_times[i], as_dates) << "," << detail::fmt(y[i]) << ","
        << detail::fmt(fitted[i]) << "," << states[i] << "\n";
  if (!out) throw io_failure("failed writing " + path);
}

inline const char* results_csv_header() {
  return "time_dist,sigma2,nu,delta,k_true,n_obs,span_years,model,replicate,"
         "TP,FP,FN,TPR,FPR,commission,omission,F1,wall_seconds";
}

inline std::string result_row_csv(const ResultRow& r) {
  auto rate = [](double v) { return std::isnan(v) ? std::string() : detail::fmt(v); };
  std::ostringstream out;
  out << time_dist_name(r.setting.time_dist) << "," << detail::fmt(r.setting.sigma2)
      << "," << detail::fmt(r.setting.nu) << "," << detail::fmt(r.setting.delta) << ","
      << r.setting.k_true << "," << r.setting.n_obs << ","
      << detail::fmt(r.setting.span_years) << "," << r.model << "," << r.replicate << ","
      << r.metrics.tp << "," << r.metrics.fp << "," << r.metrics.fn << ","
      << rate(r.metrics.tpr) << "," << rate(r.metrics.fpr) << ","
      << rate(r.metrics.commission) << "," << rate(r.metrics.omission) << ","
      << rate(r.metrics.f1) << "," << detail::fmt(r.wall_seconds);
  return out.str();
}

/* Parses a results CSV written by result_row_csv; used to resume runs.
   Bin counts behind the FPR column are not serialized, so re-read rows carry
   their rates verbatim but cannot be pooled by aggregate_rows. */
inline std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_failure("cannot open " + path);
  std::vector<ResultRow> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped.rfind("time_dist,", 0) == 0)
      continue;
    const std::vector<std::string> f = detail::split_csv(stripped);
    if (f.size() != 18)
      throw invalid_input(path + ": row " + std::to_string(line_no) +
                          ": expected 18 columns");
    auto num = [&](int c) {
      double v = 0.0;
      if (!f[c].empty() && !detail::parse_number(f[c], &v))
        throw invalid_input(path + ": row " + std::to_string(line_no) +
                            ": bad number in column " + std::to_string(c + 1));
      return f[c].empty() ? std::numeric_limits<double>::quiet_NaN() : v;
    };
    ResultRow r;
    r.setting.time_dist = time_dist_from_name(f[0]);
    r.setting.sigma2 = num(1);
    r.setting.nu = num(2);
    r.setting.delta = num(3);
    r.setting.k_true = static_cast<int>(num(4));
    r.setting.n_obs = static_cast<int>(num(5));
    r.setting.span_years = num(6);
    r.model = f[7];
    r.replicate = static_cast<int>(num(8));
    r.setting.replicate = r.replicate;
    r.metrics.setting_id = r.setting.id();
    r.metrics.tp = static_cast<int>(num(9));
    r.metrics.fp = static_cast<int>(num(10));
    r.metrics.fn = static_cast<int>(num(11));
    r.metrics.tpr = num(12);
    r.metrics.fpr = num(13);
    r.metrics.commission = num(14);
    r.metrics.omission = num(15);
    r.metrics.f1 = num(16);
    r.wall_seconds = num(17);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw io_failure("cannot write " + path);
  out << results_csv_header() << "\n";
  for (const ResultRow& r : rows) out << result_row_csv(r) << "\n";
  if (!out) throw io_failure("failed writing " + path);
}

}  // namespace bpp
