// Runtime kernel selection. This TU is built without extended ISA flags, so it
// is always safe to execute; it only hands out the SIMD table after checking
// CPU support.

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

#include "laneform/common.hpp"
#include "laneform/kernels.hpp"

namespace laneform {

const KernelTable* kernels_simd_raw();  // defined in kernels_simd.cpp

namespace {

bool cpu_supports_simd() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2") != 0;
#elif defined(__aarch64__)
    return true;  // NEON is baseline
#else
    return false;
#endif
}

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* autodetect() {
    if (const char* env = std::getenv("LANEFORM_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &kernels_scalar();
        if (std::strcmp(env, "simd") == 0) {
            if (const KernelTable* t = kernels_simd_if_supported()) return t;
            throw ConfigError("LANEFORM_KERNELS=simd requested but no SIMD kernels are "
                              "available on this CPU/build");
        }
        throw ConfigError(std::string("unknown LANEFORM_KERNELS value '") + env +
                          "' (expected 'scalar' or 'simd')");
    }
    if (const KernelTable* t = kernels_simd_if_supported()) return t;
    return &kernels_scalar();
}

}  // namespace

const KernelTable* kernels_simd_if_supported() {
    const KernelTable* t = kernels_simd_raw();
    return (t != nullptr && cpu_supports_simd()) ? t : nullptr;
}

const KernelTable& kernels() {
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (t == nullptr) {
        t = autodetect();
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

void set_active_kernels(const char* name) {
    if (name == nullptr) {
        g_active.store(nullptr, std::memory_order_release);
        return;
    }
    if (std::strcmp(name, "scalar") == 0) {
        g_active.store(&kernels_scalar(), std::memory_order_release);
        return;
    }
    if (std::strcmp(name, "simd") == 0) {
        if (const KernelTable* t = kernels_simd_if_supported()) {
            g_active.store(t, std::memory_order_release);
            return;
        }
        throw ConfigError("SIMD kernels requested but unavailable on this CPU/build");
    }
    throw ConfigError(std::string("unknown kernel set '") + name +
                      "' (expected 'scalar' or 'simd')");
}

}  // namespace laneform
