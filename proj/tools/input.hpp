#ifndef VARSIG_TOOLS_INPUT_HPP
#define VARSIG_TOOLS_INPUT_HPP

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace varsig::cli {

/// One number per line, or CSV with `column` naming a header field or a
/// 1-based position. Blank lines are skipped; anything else that does not
/// parse as a finite number raises InputError with its line.
std::vector<double> read_series(std::istream& in, const std::optional<std::string>& column);
std::vector<double> read_series_file(const std::string& path, const std::optional<std::string>& column);

}  // namespace varsig::cli

#endif
