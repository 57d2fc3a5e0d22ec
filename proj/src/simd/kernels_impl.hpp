#pragma once

#include "lockbench/simd/kernels.hpp"

namespace lockbench::simd::detail {

// Defined in kernels_avx2.cpp when the compiler can target AVX2.
const KernelTable* avx2_table();

}  // namespace lockbench::simd::detail
