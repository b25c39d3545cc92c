#pragma once

#include <string>
#include <string_view>

namespace csqe {

/// Martin Porter's suffix-stripping stemmer, following the reference C
/// release (including its "bli" -> "ble" and "logi" -> "log" departures).
/// Expects a lowercase word; words of one or two letters pass through.
std::string porter_stem(std::string_view word);

}  // namespace csqe
