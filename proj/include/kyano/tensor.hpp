// Dense tensors of arbitrary rank over a chart of dimension n, plus the
// small linear-algebra kernels that have to run on autodiff scalars.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <type_traits>
#include <string>
#include <vector>

#include "kyano/autodiff.hpp"
#include "kyano/error.hpp"

namespace kyano {

// All indices range over 0..dim-1. Storage is row-major (last index fastest).
template <typename T>
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t dim, std::size_t rank, const T& fill = T(0.0))
        : dim_(dim), rank_(rank), data_(ipow_size(dim, rank), fill) {}

    std::size_t dim() const { return dim_; }
    std::size_t rank() const { return rank_; }
    std::size_t size() const { return data_.size(); }

    T& operator[](std::span<const std::size_t> idx) { return data_[offset(idx)]; }
    const T& operator[](std::span<const std::size_t> idx) const { return data_[offset(idx)]; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
    T& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * dim_ + j) * dim_ + k]; }
    const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * dim_ + j) * dim_ + k];
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    // Multi-index of flat position k.
    std::vector<std::size_t> unravel(std::size_t k) const {
        std::vector<std::size_t> idx(rank_);
        for (std::size_t r = rank_; r-- > 0;) {
            idx[r] = k % dim_;
            k /= dim_;
        }
        return idx;
    }

    std::size_t offset(std::span<const std::size_t> idx) const {
        std::size_t k = 0;
        for (std::size_t r = 0; r < rank_; ++r) k = k * dim_ + idx[r];
        return k;
    }

    static std::size_t ipow_size(std::size_t n, std::size_t r) {
        std::size_t s = 1;
        for (std::size_t i = 0; i < r; ++i) s *= n;
        return s;
    }

private:
    std::size_t dim_ = 0;
    std::size_t rank_ = 0;
    std::vector<T> data_;
};

using Matrix = Tensor<double>;

inline Matrix identity_matrix(std::size_t n) {
    Matrix m(n, 2);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

// Sign of the permutation idx of {0..n-1}; 0 when an index repeats.
inline int levi_civita(std::span<const std::size_t> idx) {
    const std::size_t n = idx.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (idx[i] >= n) return 0;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (idx[i] == idx[j]) return 0;
        }
    }
    int sign = 1;
    std::vector<std::size_t> p(idx.begin(), idx.end());
    for (std::size_t i = 0; i < n; ++i) {
        while (p[i] != i) {
            std::swap(p[i], p[p[i]]);
            sign = -sign;
        }
    }
    return sign;
}

inline int levi_civita(std::initializer_list<std::size_t> idx) {
    return levi_civita(std::span<const std::size_t>(idx.begin(), idx.size()));
}

// Sorts idx ascending in place and returns the permutation sign, or 0 on repeats.
inline int sort_with_sign(std::vector<std::size_t>& idx) {
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i) {
        for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
            if (idx[j - 1] == idx[j]) return 0;
            std::swap(idx[j - 1], idx[j]);
            sign = -sign;
        }
    }
    return sign;
}

// Inverse of a square matrix over any field-like scalar (Gauss-Jordan with
// partial pivoting on the value part). Throws SingularMetricError when a
// pivot falls below rel_tol times the largest entry.
template <typename S>
Tensor<S> invert(const Tensor<S>& a, double rel_tol = 1e-13) {
    const std::size_t n = a.dim();
    double scale = 0.0;
    for (const S& v : a.data()) scale = std::max(scale, std::abs(value(v)));
    const double singular_tol = rel_tol * scale;
    Tensor<S> m = a;
    Tensor<S> inv(n, 2, S(0.0));
    for (std::size_t i = 0; i < n; ++i) inv(i, i) = S(1.0);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(value(m(col, col)));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(value(m(r, col)));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (!(best > singular_tol) || scale == 0.0) throw SingularMetricError("matrix is singular");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(m(col, c), m(piv, c));
                std::swap(inv(col, c), inv(piv, c));
            }
        }
        const S p = m(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            m(col, c) = m(col, c) / p;
            inv(col, c) = inv(col, c) / p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const S f = m(r, col);
            if (value(f) == 0.0 && std::is_same_v<S, double>) continue;
            for (std::size_t c = 0; c < n; ++c) {
                m(r, c) = m(r, c) - f * m(col, c);
                inv(r, c) = inv(r, c) - f * inv(col, c);
            }
        }
    }
    return inv;
}

// Determinant by LU with partial pivoting (double only).
inline double determinant(const Matrix& a) {
    const std::size_t n = a.dim();
    Matrix m = a;
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
        }
        if (m(piv, col) == 0.0) return 0.0;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(m(col, c), m(piv, c));
            det = -det;
        }
        det *= m(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m(r, col) / m(col, col);
            for (std::size_t c = col; c < n; ++c) m(r, c) -= f * m(col, c);
        }
    }
    return det;
}

template <typename S>
Tensor<double> values_of(const Tensor<S>& t) {
    Tensor<double> out(t.dim(), t.rank());
    for (std::size_t k = 0; k < t.size(); ++k) out.data()[k] = value(t.data()[k]);
    return out;
}

inline double max_abs(const Tensor<double>& t) {
    double m = 0.0;
    for (double v : t.data()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace kyano
