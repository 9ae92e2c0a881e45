#pragma once

#include <string_view>

namespace tariffopt {

std::string_view version();

}  // namespace tariffopt
