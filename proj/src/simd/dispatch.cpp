#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"
#include "lockbench/simd/kernels.hpp"

namespace lockbench::simd {

const KernelTable* avx2_kernels() {
#if defined(__x86_64__) || defined(__i386__)
    if (!__builtin_cpu_supports("avx2")) return nullptr;
    return detail::avx2_table();
#else
    return nullptr;
#endif
}

const KernelTable& kernels() {
    static const KernelTable* chosen = [] {
        const char* env = std::getenv("LOCKBENCH_SIMD");
        if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
        const KernelTable* v = avx2_kernels();
        return v != nullptr ? v : &scalar_kernels();
    }();
    return *chosen;
}

}  // namespace lockbench::simd
