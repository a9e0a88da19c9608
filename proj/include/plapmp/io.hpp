#pragma once

#include <string>

namespace plapmp {

/// 17 significant digits; "inf", "-inf" and "nan" spelled out.
std::string num(double x);

}  // namespace plapmp
