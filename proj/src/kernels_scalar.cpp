// Scalar reference kernels. These define the ground-truth arithmetic; the SIMD
// build instantiates the same bodies and must match bitwise.

#include "laneform/detail/kernel_body.hpp"
#include "laneform/kernels.hpp"

namespace laneform {
namespace {

using detail::ScalarIO;

void flux_x_reduced_s(const FluxXArgs& a, double* fr, double* fb) {
    for (int i = 0; i < a.n; ++i) detail::flux_x_reduced_at<ScalarIO>(a, i, fr, fb);
}

void flux_x_general_s(const FluxXArgs& a, double* fr, double* fb) {
    for (int i = 0; i < a.n; ++i) detail::flux_x_general_at<ScalarIO>(a, i, fr, fb);
}

void flux_y_s(const FluxYArgs& a, double* fr, double* fb) {
    for (int i = 0; i < a.n; ++i) detail::flux_y_at<ScalarIO>(a, i, fr, fb);
}

void cell_update_s(int n, const double* s, const double* fxl, const double* fxr,
                   const double* fys, const double* fyn, double cx, double cy, double* out) {
    for (int i = 0; i < n; ++i) detail::cell_update_at<ScalarIO>(i, s, fxl, fxr, fys, fyn, cx, cy, out);
}

void master_row_s(const MasterRowArgs& a, double* rout, double* bout) {
    for (int i = 0; i < a.n; ++i) detail::master_row_at<ScalarIO>(a, i, rout, bout);
}

}  // namespace

const KernelTable& kernels_scalar() {
    static const KernelTable table{"scalar",       flux_x_reduced_s, flux_x_general_s,
                                   flux_y_s,       cell_update_s,    master_row_s};
    return table;
}

}  // namespace laneform
