#pragma once

#include <fmt/format.h>

#include <string>

namespace sdeid {

/// Shortest decimal text that parses back to the same double.
inline std::string csv_number(double v) { return fmt::format("{}", v); }

}  // namespace sdeid
