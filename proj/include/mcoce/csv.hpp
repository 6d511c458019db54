#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mcoce::csv {

/// %.17g: enough digits to round-trip any double.
std::string format_real(double v);

/// Splits one line on commas. No quoting; fields here never contain commas.
std::vector<std::string> split_line(std::string_view line);

double parse_real(const std::string& field);

}  // namespace mcoce::csv
