#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace mksvm {

/// Shortest text that reads back to exactly `v`.
std::string format_double(double v);

/// Whole-token parse; nullopt on empty input or trailing garbage.
std::optional<double> parse_double(std::string_view s);

}  // namespace mksvm
