#pragma once

#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace itosim::csv {

/// 17 significant digits, enough to round-trip any double.
std::string format(double value);

void write_header(std::ostream& os, std::initializer_list<std::string_view> columns);
void write_row(std::ostream& os, std::span<const double> values);

}  // namespace itosim::csv
