#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fedsim {

// "%.6f" formatting used by every CSV the simulator writes.
std::string fixed6(double value);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace fedsim
