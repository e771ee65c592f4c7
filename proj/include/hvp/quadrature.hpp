#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace hvp {

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half, center last).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the center.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Estimate {
    double kronrod;
    double error;
};

template <class F>
Estimate gk15(F&& f, double a, double b) {
    const double half = (b - a) / 2, mid = (a + b) / 2;
    const double fc = f(mid);
    double k = fc * kKronrodWeights[7];
    double g = fc * kGaussWeights[3];
    for (std::size_t i = 0; i < 7; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double s = f(mid - dx) + f(mid + dx);
        k += kKronrodWeights[i] * s;
        if (i % 2 == 1) g += kGaussWeights[i / 2] * s;
    }
    return {k * half, std::fabs((k - g) * half)};
}

template <class F>
double adaptive(F& f, double a, double b, double tol, int depth) {
    const Estimate e = gk15(f, a, b);
    if (e.error <= tol || depth <= 0) return e.kronrod;
    const double m = (a + b) / 2;
    return adaptive(f, a, m, tol / 2, depth - 1) + adaptive(f, m, b, tol / 2, depth - 1);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integral of f over [a, b] to the given absolute tolerance.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10, int max_depth = 40) {
    if (a == b) return 0.0;
    return detail::adaptive(f, a, b, abs_tol, max_depth);
}

}  // namespace hvp
