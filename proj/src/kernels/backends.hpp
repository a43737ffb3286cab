#pragma once

#include "pushrl/kernels/kernels.hpp"

namespace pushrl::kernels::detail {

// Each backend translation unit exposes its table, or nullptr when the
// backend was not compiled in for this target.
const Ops* scalar_table();
const Ops* avx2_table();
const Ops* neon_table();

}  // namespace pushrl::kernels::detail
