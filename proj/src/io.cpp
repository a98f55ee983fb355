#include "cpcp/io.hpp"

#include "cpcp/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace cpcp {

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits on `delim`, or on runs of blanks when delim is ' '.
std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  if (delim == ' ') {
    std::size_t pos = 0;
    while (pos < line.size()) {
      pos = line.find_first_not_of(" \t", pos);
      if (pos == std::string_view::npos) break;
      const auto end = line.find_first_of(" \t", pos);
      out.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
      pos = end == std::string_view::npos ? line.size() : end;
    }
    return out;
  }
  std::size_t pos = 0;
  while (true) {
    const auto end = line.find(delim, pos);
    out.push_back(trim(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos)));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view token, const std::filesystem::path& path, std::size_t line) {
  T value{};
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || token.empty())
    throw ValidationError(where(path, line) + "cannot parse '" + std::string(token) + "' as a number");
  return value;
}

}  // namespace

Matrix read_feature_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  char delim = 0;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty()) continue;
    if (delim == 0) delim = text.find(',') != std::string_view::npos ? ',' : text.find('\t') != std::string_view::npos ? '\t' : ' ';
    std::vector<double> row;
    for (auto token : split(text, delim)) {
      const double v = parse_number<double>(token, path, line);
      if (!std::isfinite(v)) throw ValidationError(where(path, line) + "non-finite feature value");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ValidationError(where(path, line) + "expected " + std::to_string(rows.front().size()) +
                            " columns, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("'" + path.string() + "' contains no data");
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return out;
}

LabelSets read_label_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  LabelSets out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string text(trim(raw));
    if (text.empty()) {
      if (in.peek() == EOF) break;
      throw ValidationError(where(path, line) + "instance has no label");
    }
    for (char& ch : text)
      if (ch == ',') ch = ' ';
    std::vector<int> labels;
    for (auto token : split(text, ' ')) labels.push_back(parse_number<int>(token, path, line));
    out.push_back(std::move(labels));
  }
  if (out.empty()) throw ValidationError("'" + path.string() + "' contains no labels");
  return out;
}

ConstraintSet read_constraints_file(const std::filesystem::path& path, Index n) {
  std::ifstream in = open_input(path);
  ConstraintSet out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto tokens = split(text, ' ');
    if (tokens.size() != 3) throw ValidationError(where(path, line) + "expected 'i j label'");
    const auto i = parse_number<long long>(tokens[0], path, line);
    const auto j = parse_number<long long>(tokens[1], path, line);
    const auto label = parse_number<int>(tokens[2], path, line);
    if (label == 1)
      out.must_links.emplace_back(i, j);
    else if (label == -1)
      out.cannot_links.emplace_back(i, j);
    else
      throw ValidationError(where(path, line) + "constraint label must be +1 or -1");
  }
  try {
    out.validate(n);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return out;
}

void write_constraints_file(const std::filesystem::path& path, const ConstraintSet& constraints) {
  std::ofstream out = open_output(path);
  for (const auto& [i, j] : constraints.must_links) out << i << ' ' << j << " 1\n";
  for (const auto& [i, j] : constraints.cannot_links) out << i << ' ' << j << " -1\n";
}

void write_feature_file(const std::filesystem::path& path, const Matrix& values) {
  std::ofstream out = open_output(path);
  char buf[64];
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", values(i, j));
      if (j) out << ',';
      out << buf;
      // Keep a decimal point so the file is unambiguous about its number format.
      if (std::string_view(buf).find_first_of(".eEn") == std::string_view::npos) out << ".0";
    }
    out << '\n';
  }
}

void write_label_file(const std::filesystem::path& path, const LabelSets& labels) {
  std::ofstream out = open_output(path);
  for (const auto& set : labels) {
    for (std::size_t k = 0; k < set.size(); ++k) out << (k ? " " : "") << set[k];
    out << '\n';
  }
}

void write_assignment_file(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::ofstream out = open_output(path);
  for (int label : labels) out << label << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_output(path);
  out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace cpcp
