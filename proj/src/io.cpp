#include "blindmc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "blindmc/sim.hpp"

namespace blindmc::io {
namespace {

struct Field {
  std::string_view text;
  long column;  // 1-based
};

struct Row {
  std::vector<Field> fields;
  long line;  // 1-based
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Non-empty lines split on commas.
std::vector<Row> split_csv(const std::string& text) {
  std::vector<Row> rows;
  long line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    if (!trim(line).empty()) {
      Row row{{}, line_no};
      std::size_t start = 0;
      while (true) {
        std::size_t comma = line.find(',', start);
        std::size_t stop = comma == std::string_view::npos ? line.size() : comma;
        row.fields.push_back({trim(line.substr(start, stop - start)), static_cast<long>(start) + 1});
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      rows.push_back(std::move(row));
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return rows;
}

double parse_double(const Field& f, long line) {
  double value = 0.0;
  const char* first = f.text.data();
  const char* last = first + f.text.size();
  if (!f.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || f.text.empty()) {
    throw ParseError("expected a number, got '" + std::string(f.text) + "'", line, f.column);
  }
  return value;
}

long parse_count(const Field& f, long line) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(f.text.data(), f.text.data() + f.text.size(), value);
  if (ec != std::errc() || ptr != f.text.data() + f.text.size() || f.text.empty() || value < 1) {
    throw ParseError("expected a positive integer, got '" + std::string(f.text) + "'", line,
                     f.column);
  }
  return value;
}

void expect_fields(const Row& row, std::size_t n) {
  if (row.fields.size() != n) {
    throw ParseError("expected " + std::to_string(n) + " fields, found " +
                         std::to_string(row.fields.size()),
                     row.line, row.fields.empty() ? 1 : row.fields.back().column);
  }
}

std::string pair(Complex c) { return format_double(c.real()) + "," + format_double(c.imag()); }

}  // namespace

std::string basis_to_json(const BilinearBasis& basis) {
  nlohmann::json j;
  j["M"] = basis.channels();
  j["K"] = basis.support();
  j["D"] = basis.dim();
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& blk : basis.blocks()) {
    nlohmann::json entries = nlohmann::json::array();
    for (Index r = 0; r < blk.rows(); ++r)
      for (Index c = 0; c < blk.cols(); ++c) entries.push_back({blk(r, c).real(), blk(r, c).imag()});
    blocks.push_back(std::move(entries));
  }
  j["blocks"] = std::move(blocks);
  return j.dump() + "\n";
}

BilinearBasis basis_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Recover line and column from the byte offset.
    long line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(std::string("invalid basis JSON: ") + e.what(), line, col);
  }
  try {
    const auto m = j.at("M").get<Index>();
    const auto k = j.at("K").get<Index>();
    const auto d = j.at("D").get<Index>();
    const auto& blocks = j.at("blocks");
    if (m < 1 || k < 1 || d < 1) throw InputError("basis dimensions must be positive");
    if (!blocks.is_array() || static_cast<Index>(blocks.size()) != m) {
      throw InputError("basis JSON: expected " + std::to_string(m) + " blocks");
    }
    std::vector<Eigen::MatrixXcd> out;
    for (const auto& blk : blocks) {
      if (!blk.is_array() || static_cast<Index>(blk.size()) != k * d) {
        throw InputError("basis JSON: each block needs K*D entries");
      }
      Eigen::MatrixXcd mtx(k, d);
      for (Index r = 0; r < k; ++r) {
        for (Index c = 0; c < d; ++c) {
          const auto& e = blk.at(static_cast<std::size_t>(r * d + c));
          if (!e.is_array() || e.size() != 2) throw InputError("basis JSON: entries are [re, im] pairs");
          mtx(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
        }
      }
      out.push_back(std::move(mtx));
    }
    return BilinearBasis(std::move(out));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("basis JSON: ") + e.what());
  }
}

std::string signal_to_csv(const Eigen::Ref<const Eigen::VectorXcd>& v) {
  std::string out = "re,im\n";
  for (Index i = 0; i < v.size(); ++i) out += pair(v(i)) + "\n";
  return out;
}

Eigen::VectorXcd signal_from_csv(const std::string& text) {
  const auto rows = split_csv(text);
  std::size_t first = 0;
  if (!rows.empty() && rows[0].fields.size() == 2 && rows[0].fields[0].text == "re" &&
      rows[0].fields[1].text == "im") {
    first = 1;
  }
  if (rows.size() <= first) throw ParseError("signal file has no samples", 1, 1);
  Eigen::VectorXcd v(static_cast<Index>(rows.size() - first));
  for (std::size_t i = first; i < rows.size(); ++i) {
    expect_fields(rows[i], 2);
    v(static_cast<Index>(i - first)) =
        Complex(parse_double(rows[i].fields[0], rows[i].line), parse_double(rows[i].fields[1], rows[i].line));
  }
  return v;
}

std::string observations_to_csv(const ObservationSet& obs) {
  std::string out = std::to_string(obs.length()) + "," + std::to_string(obs.channels()) + "\n";
  for (Index n = 0; n < obs.length(); ++n) {
    for (Index m = 0; m < obs.channels(); ++m) {
      if (m > 0) out += ",";
      out += pair(obs.outputs[static_cast<std::size_t>(m)](n));
    }
    out += "\n";
  }
  return out;
}

ObservationSet observations_from_csv(const std::string& text) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw ParseError("observation file is empty", 1, 1);
  expect_fields(rows[0], 2);
  const long l = parse_count(rows[0].fields[0], rows[0].line);
  const long m = parse_count(rows[0].fields[1], rows[0].line);
  if (static_cast<long>(rows.size()) - 1 != l) {
    const long line = rows.size() > 1 ? rows.back().line + 1 : rows[0].line + 1;
    throw ParseError("header declares " + std::to_string(l) + " samples but " +
                         std::to_string(rows.size() - 1) + " rows follow",
                     line, 1);
  }
  ObservationSet obs;
  obs.outputs.assign(static_cast<std::size_t>(m), ComplexSignal(l));
  for (long n = 0; n < l; ++n) {
    const Row& row = rows[static_cast<std::size_t>(n + 1)];
    expect_fields(row, static_cast<std::size_t>(2 * m));
    for (long c = 0; c < m; ++c) {
      obs.outputs[static_cast<std::size_t>(c)](n) =
          Complex(parse_double(row.fields[static_cast<std::size_t>(2 * c)], row.line),
                  parse_double(row.fields[static_cast<std::size_t>(2 * c + 1)], row.line));
    }
  }
  return obs;
}

std::string matrix_to_csv(const Eigen::Ref<const Eigen::MatrixXcd>& m) {
  std::string out = std::to_string(m.rows()) + "," + std::to_string(m.cols()) + "\n";
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ",";
      out += pair(m(r, c));
    }
    out += "\n";
  }
  return out;
}

Eigen::MatrixXcd matrix_from_csv(const std::string& text) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw ParseError("matrix file is empty", 1, 1);
  expect_fields(rows[0], 2);
  const long nr = parse_count(rows[0].fields[0], rows[0].line);
  const long nc = parse_count(rows[0].fields[1], rows[0].line);
  if (static_cast<long>(rows.size()) - 1 != nr) {
    throw ParseError("row count does not match header", rows.back().line, 1);
  }
  Eigen::MatrixXcd out(nr, nc);
  for (long r = 0; r < nr; ++r) {
    const Row& row = rows[static_cast<std::size_t>(r + 1)];
    expect_fields(row, static_cast<std::size_t>(2 * nc));
    for (long c = 0; c < nc; ++c) {
      out(r, c) = Complex(parse_double(row.fields[static_cast<std::size_t>(2 * c)], row.line),
                          parse_double(row.fields[static_cast<std::size_t>(2 * c + 1)], row.line));
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw InputError("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace blindmc::io
