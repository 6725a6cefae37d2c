#pragma once

#include <string>
#include <string_view>

namespace boq {

// Porter (1980) suffix-stripping stemmer, original rule set.
// Input must already be lowercase ASCII letters; anything else is returned
// unchanged.
std::string porter_stem(std::string_view word);

}  // namespace boq
