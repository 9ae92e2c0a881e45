#include "tariffopt/version.hpp"

#ifndef TARIFFOPT_VERSION
#define TARIFFOPT_VERSION "unknown"
#endif

namespace tariffopt {

std::string_view version() { return TARIFFOPT_VERSION; }

}  // namespace tariffopt
