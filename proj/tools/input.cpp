#include "input.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

#include "varsig/errors.hpp"

namespace varsig::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_number(std::string_view tok) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double x = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, x, std::chars_format::general);
  if (tok.empty() || ec != std::errc() || ptr != end || !std::isfinite(x)) return std::nullopt;
  return x;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto c = line.find(',');
    out.push_back(trim(line.substr(0, c)));
    if (c == std::string_view::npos) break;
    line.remove_prefix(c + 1);
  }
  return out;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

}  // namespace

std::vector<double> read_series(std::istream& in, const std::optional<std::string>& column) {
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> col_index;
  bool header_pending = false;
  bool saw_row = false;
  if (column) {
    std::size_t pos = 0;
    const auto [ptr, ec] = std::from_chars(column->data(), column->data() + column->size(), pos);
    if (ec == std::errc() && ptr == column->data() + column->size()) {
      if (pos == 0) throw ConfigError("--column positions start at 1");
      col_index = pos - 1;
    } else {
      header_pending = true;
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (header_pending) {
      const auto fields = split_csv(view);
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (unquote(fields[i]) == *column) col_index = i;
      }
      if (!col_index) throw InputError("column '" + *column + "' not found in header", line_no);
      header_pending = false;
      continue;
    }
    std::string_view token = view;
    if (col_index) {
      const auto fields = split_csv(view);
      if (*col_index >= fields.size()) {
        throw InputError("line " + std::to_string(line_no) + ": missing column " + std::to_string(*col_index + 1),
                         line_no);
      }
      token = fields[*col_index];
    } else if (view.find(',') != std::string_view::npos) {
      throw InputError("line " + std::to_string(line_no) + ": several columns found; pick one with --column", line_no);
    }
    const auto x = to_number(token);
    // a non-numeric first row under a positional column is a header
    if (!x && col_index && out.empty() && !saw_row) {
      saw_row = true;
      continue;
    }
    saw_row = true;
    if (!x) {
      throw InputError("line " + std::to_string(line_no) + ": not a number: '" + std::string(token) + "'", line_no);
    }
    out.push_back(*x);
  }
  return out;
}

std::vector<double> read_series_file(const std::string& path, const std::optional<std::string>& column) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file " + path, 0);
  return read_series(in, column);
}

}  // namespace varsig::cli
