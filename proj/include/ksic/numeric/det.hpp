#pragma once

#include <array>
#include <cmath>
#include <utility>

namespace ksic::numeric {

using Mat4 = std::array<std::array<double, 4>, 4>;

/// Determinant carried as mantissa * exp(log_scale) so that rows with
/// exponentially large entries do not overflow.
struct ScaledDet {
    double mantissa = 0.0;
    double log_scale = 0.0;
    double value() const { return mantissa == 0.0 ? 0.0 : mantissa * std::exp(log_scale); }
    int sign() const { return (mantissa > 0.0) - (mantissa < 0.0); }
};

inline double det4(Mat4 m) {
    double det = 1.0;
    for (int k = 0; k < 4; ++k) {
        int p = k;
        for (int i = k + 1; i < 4; ++i)
            if (std::abs(m[i][k]) > std::abs(m[p][k])) p = i;
        if (m[p][k] == 0.0) return 0.0;
        if (p != k) {
            std::swap(m[p], m[k]);
            det = -det;
        }
        det *= m[k][k];
        for (int i = k + 1; i < 4; ++i) {
            const double l = m[i][k] / m[k][k];
            for (int j = k; j < 4; ++j) m[i][j] -= l * m[k][j];
        }
    }
    return det;
}

/// Rows divided by their max-abs entry before elimination.
inline ScaledDet det4_row_scaled(Mat4 m) {
    ScaledDet out;
    for (auto& row : m) {
        double s = 0.0;
        for (double v : row) s = std::max(s, std::abs(v));
        if (s == 0.0) return out;
        for (double& v : row) v /= s;
        out.log_scale += std::log(s);
    }
    out.mantissa = det4(m);
    return out;
}

}  // namespace ksic::numeric
