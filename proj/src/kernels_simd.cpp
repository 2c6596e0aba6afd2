// SIMD kernel variant built on std::experimental::simd. On x86-64 this TU is
// compiled with AVX2 codegen enabled (see CMakeLists), so nothing here may run
// before the dispatcher has confirmed CPU support; on aarch64 the native width
// maps to NEON. FP contraction stays off, the bodies are the shared templates,
// and the tail loop reuses the scalar instantiation, so outputs match the
// scalar table bitwise.

#include "laneform/kernels.hpp"

#if (defined(__x86_64__) || defined(__aarch64__)) && __has_include(<experimental/simd>)
#define LANEFORM_HAVE_SIMD 1
#include <experimental/simd>

#include "laneform/detail/kernel_body.hpp"

namespace laneform {
namespace {

namespace stdx = std::experimental;

struct SimdIO {
    using pack = stdx::native_simd<double>;
    static constexpr int width = static_cast<int>(pack::size());
    static pack load(const double* p, int i) { return pack(p + i, stdx::element_aligned); }
    static void store(double* p, int i, const pack& v) { v.copy_to(p + i, stdx::element_aligned); }
};

constexpr int W = SimdIO::width;
using detail::ScalarIO;

void flux_x_reduced_v(const FluxXArgs& a, double* fr, double* fb) {
    const int n0 = a.n - a.n % W;
    for (int i = 0; i < n0; i += W) detail::flux_x_reduced_at<SimdIO>(a, i, fr, fb);
    for (int i = n0; i < a.n; ++i) detail::flux_x_reduced_at<ScalarIO>(a, i, fr, fb);
}

void flux_x_general_v(const FluxXArgs& a, double* fr, double* fb) {
    const int n0 = a.n - a.n % W;
    for (int i = 0; i < n0; i += W) detail::flux_x_general_at<SimdIO>(a, i, fr, fb);
    for (int i = n0; i < a.n; ++i) detail::flux_x_general_at<ScalarIO>(a, i, fr, fb);
}

void flux_y_v(const FluxYArgs& a, double* fr, double* fb) {
    const int n0 = a.n - a.n % W;
    for (int i = 0; i < n0; i += W) detail::flux_y_at<SimdIO>(a, i, fr, fb);
    for (int i = n0; i < a.n; ++i) detail::flux_y_at<ScalarIO>(a, i, fr, fb);
}

void cell_update_v(int n, const double* s, const double* fxl, const double* fxr,
                   const double* fys, const double* fyn, double cx, double cy, double* out) {
    const int n0 = n - n % W;
    for (int i = 0; i < n0; i += W)
        detail::cell_update_at<SimdIO>(i, s, fxl, fxr, fys, fyn, cx, cy, out);
    for (int i = n0; i < n; ++i)
        detail::cell_update_at<ScalarIO>(i, s, fxl, fxr, fys, fyn, cx, cy, out);
}

void master_row_v(const MasterRowArgs& a, double* rout, double* bout) {
    const int n0 = a.n - a.n % W;
    for (int i = 0; i < n0; i += W) detail::master_row_at<SimdIO>(a, i, rout, bout);
    for (int i = n0; i < a.n; ++i) detail::master_row_at<ScalarIO>(a, i, rout, bout);
}

constexpr KernelTable kSimdTable{"simd",     flux_x_reduced_v, flux_x_general_v,
                                 flux_y_v,   cell_update_v,    master_row_v};

}  // namespace

// Raw table pointer; the dispatcher layers the CPU-support check on top.
const KernelTable* kernels_simd_raw() { return &kSimdTable; }

}  // namespace laneform

#else  // no SIMD variant for this toolchain/ISA

namespace laneform {
const KernelTable* kernels_simd_raw() { return nullptr; }
}  // namespace laneform

#endif
