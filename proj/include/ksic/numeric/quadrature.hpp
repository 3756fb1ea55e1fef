#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ksic::numeric {

/// Composite Simpson on uniform samples. An odd number of panels is handled
/// by closing the last three panels with Simpson's 3/8 rule.
inline double simpson(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    if (n == 3) return h / 3.0 * (f[0] + 4.0 * f[1] + f[2]);
    std::size_t panels = n - 1;
    double tail = 0.0;
    if (panels % 2 == 1) {
        const std::size_t k = n - 4;
        tail = 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
        panels -= 3;
    }
    double s = f[0] + f[panels];
    for (std::size_t i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0 + tail;
}

template <class F>
double simpson(F&& f, double a, double b, std::size_t panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return s * h / 3.0;
}

/// Running integral F_i = int_{x_0}^{x_i} f by Simpson pairs; odd-indexed
/// nodes use the trapezoid-corrected half panel.
inline std::vector<double> cumulative_integral(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    std::vector<double> F(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        if (i % 2 == 0) {
            F[i] = F[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        } else if (i + 1 < n) {
            // quadratic through (i-1, i, i+1) integrated over the first half
            F[i] = F[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
        } else {
            F[i] = F[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
        }
    }
    return F;
}

/// Fornberg's recursion: weights w[m][j] for the m-th derivative at x0 from
/// nodes x[j], for m = 0..max_order.
inline std::vector<std::vector<double>> fd_weights(double x0, std::span<const double> x, int max_order) {
    const std::size_t n = x.size();
    if (n == 0 || max_order < 0) throw std::invalid_argument("fd_weights: empty stencil");
    const auto M = static_cast<std::size_t>(max_order);
    std::vector<std::vector<double>> c(M + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min(i, M);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k)
                    c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k)
                c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

/// order-th derivative of uniform samples at every node, using a
/// `width`-point stencil that is centered where possible and shifted near
/// the ends.
inline std::vector<double> uniform_derivative(std::span<const double> f, double h, int order, std::size_t width = 7) {
    const std::size_t n = f.size();
    if (n < width) throw std::invalid_argument("uniform_derivative: too few samples");
    std::vector<double> out(n);
    std::vector<double> nodes(width);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t start = i >= width / 2 ? i - width / 2 : 0;
        if (start + width > n) start = n - width;
        for (std::size_t j = 0; j < width; ++j) nodes[j] = static_cast<double>(start + j) - static_cast<double>(i);
        const auto w = fd_weights(0.0, nodes, order);
        double s = 0.0;
        for (std::size_t j = 0; j < width; ++j) s += w[static_cast<std::size_t>(order)][j] * f[start + j];
        double scale = 1.0;
        for (int k = 0; k < order; ++k) scale *= h;
        out[i] = s / scale;
    }
    return out;
}

}  // namespace ksic::numeric
