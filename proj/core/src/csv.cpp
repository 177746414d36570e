#include "qiniup/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace qiniup {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n'))
    --e;
  return std::string(s.substr(b, e - b));
}

// Splits one record. Double-quoted fields may contain commas; "" escapes a quote.
std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string location(std::size_t row, const std::string& col) {
  return " at row " + std::to_string(row) + ", column '" + col + "'";
}

}  // namespace

UpliftDataset read_csv(std::istream& in, const std::string& treatment_col,
                       const std::string& outcome_col) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty CSV: header row missing");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
    line.erase(0, 3);
  const auto header = split_record(line);

  std::ptrdiff_t t_idx = -1, y_idx = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == treatment_col) t_idx = static_cast<std::ptrdiff_t>(c);
    if (header[c] == outcome_col) y_idx = static_cast<std::ptrdiff_t>(c);
  }
  if (t_idx < 0) throw ValidationError("missing treatment column '" + treatment_col + "'");
  if (y_idx < 0) throw ValidationError("missing outcome column '" + outcome_col + "'");
  if (t_idx == y_idx) throw ValidationError("treatment and outcome columns must differ");

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<std::ptrdiff_t>(c) == t_idx || static_cast<std::ptrdiff_t>(c) == y_idx)
      continue;
    feature_cols.push_back(c);
    names.push_back(header[c]);
  }

  std::vector<double> values;
  std::vector<int> t, y;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_record(line);
    if (fields.size() != header.size())
      throw ValidationError("row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(header.size()));
    auto binary = [&](std::ptrdiff_t idx, const char* what) {
      double v = 0;
      const auto& f = fields[static_cast<std::size_t>(idx)];
      if (!parse_double(f, v))
        throw ValidationError("unparseable cell '" + f + "'" + location(row, header[idx]));
      if (v != 0.0 && v != 1.0)
        throw ValidationError(std::string("non-binary ") + what + " at row " +
                              std::to_string(row) + " (value '" + f + "')");
      return static_cast<int>(v);
    };
    t.push_back(binary(t_idx, "treatment"));
    y.push_back(binary(y_idx, "outcome"));
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      double v = 0;
      const auto& f = fields[feature_cols[k]];
      if (!parse_double(f, v))
        throw ValidationError("unparseable cell '" + f + "'" + location(row, names[k]));
      values.push_back(v);
    }
  }

  const std::size_t p = feature_cols.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < row; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = values[i * p + j];
  return {std::move(x), std::move(t), std::move(y), std::move(names)};
}

UpliftDataset load_csv(const std::filesystem::path& path, const std::string& treatment_col,
                       const std::string& outcome_col) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return read_csv(in, treatment_col, outcome_col);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("cannot format double");
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const UpliftDataset& ds, const std::string& treatment_col,
               const std::string& outcome_col) {
  for (const auto& name : ds.feature_names()) out << name << ',';
  out << treatment_col << ',' << outcome_col << '\n';
  const auto& x = ds.features();
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t j = 0; j < ds.p(); ++j) out << format_double(x(i, j)) << ',';
    out << ds.treatment()[i] << ',' << ds.outcome()[i] << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const UpliftDataset& ds,
              const std::string& treatment_col, const std::string& outcome_col) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  write_csv(out, ds, treatment_col, outcome_col);
}

}  // namespace qiniup
