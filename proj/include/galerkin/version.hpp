#pragma once

namespace galerkin {

inline constexpr const char* kVersionString = "galerkin 0.1.0";

}  // namespace galerkin
