#ifndef UAVD2D_CSV_HPP
#define UAVD2D_CSV_HPP

#include <string>
#include <vector>

namespace uavd2d {

// Shortest decimal form that round-trips the exact double; stable across
// runs so repeated invocations emit byte-identical files.
std::string format_double(double v);

std::string csv_row(const std::vector<std::string>& cells);

}  // namespace uavd2d

#endif
