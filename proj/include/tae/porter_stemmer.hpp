#pragma once

#include <string>
#include <string_view>

namespace tae {

// Classic Porter (1980) suffix stripper. Words that are not entirely
// lowercase ASCII letters, or are shorter than three letters, come back
// unchanged.
std::string porter_stem(std::string_view word);

}  // namespace tae
