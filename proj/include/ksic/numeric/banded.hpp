#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ksic::numeric {

/// Square band matrix with equal lower/upper bandwidth, stored by rows.
/// Entry (i, j) lives at data[i * width + (j - i + bw)] for |i - j| <= bw.
template <class T>
class BandMatrixT {
public:
    BandMatrixT() = default;
    BandMatrixT(std::size_t n, std::size_t bw) : n_(n), bw_(bw), width_(2 * bw + 1), data_(n * (2 * bw + 1), T(0)) {}

    std::size_t size() const { return n_; }
    std::size_t bandwidth() const { return bw_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * width_ + (j + bw_ - i)]; }
    T operator()(std::size_t i, std::size_t j) const { return data_[i * width_ + (j + bw_ - i)]; }

    bool in_band(std::size_t i, std::size_t j) const {
        return (j + bw_ >= i) && (i + bw_ >= j) && i < n_ && j < n_;
    }

    void multiply(std::span<const T> x, std::span<T> y) const {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t lo = i >= bw_ ? i - bw_ : 0;
            const std::size_t hi = std::min(n_ - 1, i + bw_);
            T s = 0;
            for (std::size_t j = lo; j <= hi; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
    }

private:
    std::size_t n_ = 0, bw_ = 0, width_ = 1;
    std::vector<T> data_;
};

using BandMatrix = BandMatrixT<double>;

/// LU without pivoting; meant for the symmetric positive definite systems
/// produced by the clamped difference operators.
template <class T>
class BandLUT {
public:
    BandLUT() = default;
    explicit BandLUT(BandMatrixT<T> m) : lu_(std::move(m)) {
        const std::size_t n = lu_.size(), bw = lu_.bandwidth();
        for (std::size_t k = 0; k < n; ++k) {
            const T piv = lu_(k, k);
            if (!(std::abs(piv) > 0.0) || !std::isfinite(piv))
                throw std::runtime_error("BandLU: zero pivot");
            const std::size_t iend = std::min(n - 1, k + bw);
            for (std::size_t i = k + 1; i <= iend; ++i) {
                const T l = lu_(i, k) / piv;
                lu_(i, k) = l;
                for (std::size_t j = k + 1; j <= iend; ++j) lu_(i, j) -= l * lu_(k, j);
            }
        }
    }

    std::size_t size() const { return lu_.size(); }

    void solve(std::span<T> x) const {
        const std::size_t n = lu_.size(), bw = lu_.bandwidth();
        for (std::size_t i = 1; i < n; ++i) {
            const std::size_t lo = i >= bw ? i - bw : 0;
            T s = x[i];
            for (std::size_t j = lo; j < i; ++j) s -= lu_(i, j) * x[j];
            x[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            const std::size_t hi = std::min(n - 1, ii + bw);
            T s = x[ii];
            for (std::size_t j = ii + 1; j <= hi; ++j) s -= lu_(ii, j) * x[j];
            x[ii] = s / lu_(ii, ii);
        }
    }

private:
    BandMatrixT<T> lu_;
};

using BandLU = BandLUT<double>;

}  // namespace ksic::numeric
