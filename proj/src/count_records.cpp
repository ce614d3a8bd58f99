#include "ktpent/count_records.hpp"

#include <charconv>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string_view>

#include "ktpent/errors.hpp"

namespace ktpent {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line_no, const char* column) {
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    std::ostringstream os;
    os << "line " << line_no << ": column '" << column << "' value '" << field
       << "' is not a number";
    throw ValidationError(os.str());
  }
  return value;
}

void write_comments(std::ostream& os, const std::vector<std::string>& comments) {
  for (const auto& c : comments) os << "# " << c << '\n';
}

// Reads the next non-blank, non-comment line; returns false at EOF.
bool next_data_line(std::istream& is, std::string& line, std::size_t& line_no,
                    std::vector<std::string>* comments = nullptr) {
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (comments) comments->emplace_back(trim(t.substr(1)));
      continue;
    }
    line = std::string(t);
    return true;
  }
  return false;
}

}  // namespace

void write_count_records(std::ostream& os, const std::vector<CountRecord>& records,
                         const std::vector<std::string>& comments) {
  write_comments(os, comments);
  os << kCountRecordHeader << '\n';
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : records) {
    os << r.setting.theta1_deg << ',' << r.setting.theta2_deg << ',' << r.coincidences << ','
       << r.duration_s << ',' << r.singles1_hz << ',' << r.singles2_hz << '\n';
  }
  os.precision(old_precision);
}

std::vector<CountRecord> read_count_records(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_data_line(is, line, line_no)) throw ValidationError("count-record CSV is empty");
  if (line != kCountRecordHeader) {
    throw ValidationError("line " + std::to_string(line_no) + ": expected header '" +
                          kCountRecordHeader + "'");
  }
  static constexpr const char* kColumns[] = {"theta1_deg",  "theta2_deg",  "coincidences",
                                             "duration_s",  "singles1_hz", "singles2_hz"};
  std::vector<CountRecord> out;
  while (next_data_line(is, line, line_no)) {
    const auto fields = split(line);
    if (fields.size() != 6) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 6 fields, got " +
                            std::to_string(fields.size()));
    }
    double v[6];
    for (std::size_t i = 0; i < 6; ++i) v[i] = parse_number(fields[i], line_no, kColumns[i]);
    CountRecord r;
    r.setting = {v[0], v[1]};
    r.coincidences = v[2];
    r.duration_s = v[3];
    r.singles1_hz = v[4];
    r.singles2_hz = v[5];
    try {
      r.validate();
    } catch (const Error& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(r);
  }
  return out;
}

void write_curve_csv(std::ostream& os, const TuningCurve& curve,
                     const std::vector<std::string>& comments) {
  curve.validate();
  write_comments(os, comments);
  os << "# columns: " << curve.abscissa_label << "," << curve.ordinate_label << '\n';
  os << "# units: " << curve.abscissa_unit << "," << curve.ordinate_unit << '\n';
  os << kCurveHeader << '\n';
  const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < curve.size(); ++i)
    os << curve.abscissa[i] << ',' << curve.ordinate[i] << '\n';
  os.precision(old_precision);
}

TuningCurve read_curve_csv(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> comments;
  if (!next_data_line(is, line, line_no, &comments)) throw ValidationError("curve CSV is empty");
  if (line != kCurveHeader)
    throw ValidationError("line " + std::to_string(line_no) + ": expected header 'abscissa,ordinate'");

  TuningCurve c;
  const auto pair_after = [](const std::string& comment, std::string_view key, std::string& a,
                             std::string& b) {
    if (comment.rfind(key, 0) != 0) return;
    const auto rest = trim(std::string_view(comment).substr(key.size()));
    const auto comma = rest.find(',');
    a = std::string(trim(rest.substr(0, comma)));
    b = comma == std::string_view::npos ? std::string{} : std::string(trim(rest.substr(comma + 1)));
  };
  for (const auto& cm : comments) {
    pair_after(cm, "units:", c.abscissa_unit, c.ordinate_unit);
    pair_after(cm, "columns:", c.abscissa_label, c.ordinate_label);
  }
  while (next_data_line(is, line, line_no)) {
    const auto fields = split(line);
    if (fields.size() != 2)
      throw ValidationError("line " + std::to_string(line_no) + ": expected 2 fields");
    c.abscissa.push_back(parse_number(fields[0], line_no, "abscissa"));
    c.ordinate.push_back(parse_number(fields[1], line_no, "ordinate"));
  }
  c.validate();
  return c;
}

}  // namespace ktpent
