#pragma once

#include <string>
#include <string_view>

namespace srobench {

// Porter suffix-stripping stemmer (the five-step rule sequence, with the
// "bli"/"logi" step-2 rules of the ANSI C reference release).
// Words of length <= 2 are returned unchanged.
std::string stem(std::string_view word);

}  // namespace srobench
