#include <atomic>
#include <cstdlib>
#include <string_view>

#include "curvcone/kernels.hpp"

namespace curvcone::kernels {

#if defined(CURVCONE_HAVE_AVX2)
namespace detail {
const Table& avx2_table_unchecked();
}
#endif

namespace {

bool cpu_has_avx2() {
#if defined(CURVCONE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Table* initial_table() {
    const char* env = std::getenv("CURVCONE_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar_table();
    if (const Table* t = avx2_table()) return t;
    return &scalar_table();
}

std::atomic<const Table*>& current() {
    static std::atomic<const Table*> table{initial_table()};
    return table;
}

}  // namespace

const Table* avx2_table() {
#if defined(CURVCONE_HAVE_AVX2)
    static const bool supported = cpu_has_avx2();
    return supported ? &detail::avx2_table_unchecked() : nullptr;
#else
    return nullptr;
#endif
}

const Table& active() { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
    const Table* t = nullptr;
    if (name == "scalar") {
        t = &scalar_table();
    } else if (name == "avx2") {
        t = avx2_table();
    } else if (name == "auto") {
        t = avx2_table();
        if (t == nullptr) t = &scalar_table();
    }
    if (t == nullptr) return false;
    current().store(t, std::memory_order_relaxed);
    return true;
}

}  // namespace curvcone::kernels
