#pragma once
#include <cstddef>
#include <stdexcept>
#include <vector>

// Finite-difference derivative on a uniform grid.  The interior operator is
// either a third-order stencil biased toward lower indices (the inflow side,
// with one cell of downwind support) or the classical fourth-order centered
// stencil.  The biased operator damps the grid-scale mode that the centered
// one lets creep upstream, which keeps the quiescent inflow tail quiet.
// Near the ends both fall back to one-sided rows of matching order.  Every
// row is evaluated in difference form so constant data differentiates to
// exactly zero.

namespace machfront {

enum class Scheme { upwind3, centered4 };

inline void derivative(const double* f, double* out, std::size_t n, double du, Scheme scheme) {
    if (n < 5) throw std::invalid_argument("derivative needs at least 5 points");
    out[0] = (48.0 * (f[1] - f[0]) - 36.0 * (f[2] - f[0]) + 16.0 * (f[3] - f[0]) -
              3.0 * (f[4] - f[0])) / (12.0 * du);
    out[1] = (-3.0 * (f[0] - f[1]) + 18.0 * (f[2] - f[1]) - 6.0 * (f[3] - f[1]) +
              (f[4] - f[1])) / (12.0 * du);
    if (scheme == Scheme::centered4) {
        for (std::size_t i = 2; i + 2 < n; ++i)
            out[i] = (8.0 * (f[i + 1] - f[i - 1]) - (f[i + 2] - f[i - 2])) / (12.0 * du);
        out[n - 2] = (3.0 * (f[n - 1] - f[n - 2]) - 18.0 * (f[n - 3] - f[n - 2]) +
                      6.0 * (f[n - 4] - f[n - 2]) - (f[n - 5] - f[n - 2])) / (12.0 * du);
    } else {
        for (std::size_t i = 2; i + 1 < n; ++i)
            out[i] = ((f[i - 2] - f[i]) - 6.0 * (f[i - 1] - f[i]) + 2.0 * (f[i + 1] - f[i])) /
                     (6.0 * du);
    }
    out[n - 1] = (-18.0 * (f[n - 2] - f[n - 1]) + 9.0 * (f[n - 3] - f[n - 1]) -
                  2.0 * (f[n - 4] - f[n - 1])) / (6.0 * du);
}

inline std::vector<double> derivative(const std::vector<double>& f, double du, Scheme scheme) {
    std::vector<double> out(f.size());
    derivative(f.data(), out.data(), f.size(), du, scheme);
    return out;
}

}  // namespace machfront
