#pragma once

#include <string>

namespace strawkit {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace strawkit
