// Forward-mode automatic differentiation scalars.
//
// Jet   : value + gradient (first order), fixed capacity, no allocation.
// Dual2 : value + gradient + hessian (second order), runtime dimension.
//
// Both types are closed under + - * / and the elementary functions used by
// the expression language, so metric formulas can be written once as
// templates over the scalar type and instantiated for double, Jet and Dual2.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kyano {

inline constexpr std::size_t kMaxJetVars = 16;

class Jet {
public:
    Jet() = default;
    Jet(double v) : value_(v) {}  // NOLINT(google-explicit-constructor): constants promote

    static Jet variable(double v, std::size_t index, std::size_t nvars) {
        if (nvars > kMaxJetVars || index >= nvars) {
            throw std::out_of_range("Jet::variable: index or dimension exceeds capacity");
        }
        Jet j(v);
        j.n_ = nvars;
        j.grad_[index] = 1.0;
        return j;
    }

    double value() const { return value_; }
    std::size_t size() const { return n_; }
    double d(std::size_t i) const { return i < n_ ? grad_[i] : 0.0; }

    // Builds a jet from explicit value and partials.
    static Jet from_parts(double v, const double* partials, std::size_t nvars) {
        if (nvars > kMaxJetVars) throw std::out_of_range("Jet::from_parts: too many variables");
        Jet j(v);
        j.n_ = nvars;
        for (std::size_t i = 0; i < nvars; ++i) j.grad_[i] = partials[i];
        return j;
    }

    Jet& operator+=(const Jet& o) {
        grow(o.n_);
        value_ += o.value_;
        for (std::size_t i = 0; i < o.n_; ++i) grad_[i] += o.grad_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        grow(o.n_);
        value_ -= o.value_;
        for (std::size_t i = 0; i < o.n_; ++i) grad_[i] -= o.grad_[i];
        return *this;
    }
    Jet& operator*=(const Jet& o) {
        grow(o.n_);
        for (std::size_t i = 0; i < n_; ++i) grad_[i] = grad_[i] * o.value_ + value_ * o.grad_[i];
        value_ *= o.value_;
        return *this;
    }
    Jet& operator/=(const Jet& o) {
        grow(o.n_);
        const double inv = 1.0 / o.value_;
        const double q = value_ * inv;
        for (std::size_t i = 0; i < n_; ++i) grad_[i] = (grad_[i] - q * o.grad_[i]) * inv;
        value_ = q;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
    friend Jet operator/(Jet a, const Jet& b) { return a /= b; }
    friend Jet operator-(Jet a) {
        a.value_ = -a.value_;
        for (std::size_t i = 0; i < a.n_; ++i) a.grad_[i] = -a.grad_[i];
        return a;
    }

    // f(a) given f(a.value), f'(a.value).
    friend Jet chain(const Jet& a, double f, double df) {
        Jet r(f);
        r.n_ = a.n_;
        for (std::size_t i = 0; i < a.n_; ++i) r.grad_[i] = df * a.grad_[i];
        return r;
    }

private:
    void grow(std::size_t n) {
        if (n > n_) n_ = n;
    }

    double value_ = 0.0;
    std::size_t n_ = 0;
    std::array<double, kMaxJetVars> grad_{};
};

class Dual2 {
public:
    Dual2() = default;
    Dual2(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)

    static Dual2 variable(double v, std::size_t index, std::size_t nvars) {
        if (index >= nvars) throw std::out_of_range("Dual2::variable: index out of range");
        Dual2 d(v);
        d.n_ = nvars;
        d.grad_.assign(nvars, 0.0);
        d.hess_.assign(nvars * nvars, 0.0);
        d.grad_[index] = 1.0;
        return d;
    }

    double value() const { return value_; }
    std::size_t size() const { return n_; }
    double d(std::size_t i) const { return i < n_ ? grad_[i] : 0.0; }
    double dd(std::size_t i, std::size_t j) const { return (i < n_ && j < n_) ? hess_[i * n_ + j] : 0.0; }
    const std::vector<double>& gradient() const { return grad_; }
    const std::vector<double>& hessian() const { return hess_; }

    friend Dual2 operator+(const Dual2& a, const Dual2& b) {
        Dual2 r(a.value_ + b.value_);
        r.resize(std::max(a.n_, b.n_));
        for (std::size_t i = 0; i < r.n_; ++i) r.grad_[i] = a.d(i) + b.d(i);
        for (std::size_t k = 0; k < r.n_ * r.n_; ++k) r.hess_[k] = a.h(k, r.n_) + b.h(k, r.n_);
        return r;
    }
    friend Dual2 operator-(const Dual2& a, const Dual2& b) {
        Dual2 r(a.value_ - b.value_);
        r.resize(std::max(a.n_, b.n_));
        for (std::size_t i = 0; i < r.n_; ++i) r.grad_[i] = a.d(i) - b.d(i);
        for (std::size_t k = 0; k < r.n_ * r.n_; ++k) r.hess_[k] = a.h(k, r.n_) - b.h(k, r.n_);
        return r;
    }
    friend Dual2 operator-(const Dual2& a) {
        Dual2 r = a;
        r.value_ = -r.value_;
        for (auto& g : r.grad_) g = -g;
        for (auto& h : r.hess_) h = -h;
        return r;
    }
    friend Dual2 operator*(const Dual2& a, const Dual2& b) {
        Dual2 r(a.value_ * b.value_);
        const std::size_t n = std::max(a.n_, b.n_);
        r.resize(n);
        for (std::size_t i = 0; i < n; ++i) r.grad_[i] = a.d(i) * b.value_ + a.value_ * b.d(i);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const double v = a.dd(i, j) * b.value_ + a.value_ * b.dd(i, j) +
                                 (a.d(i) * b.d(j) + a.d(j) * b.d(i));
                r.hess_[i * n + j] = v;
                r.hess_[j * n + i] = v;
            }
        }
        return r;
    }
    friend Dual2 operator/(const Dual2& a, const Dual2& b) {
        const double v = b.value_;
        return a * chain(b, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
    }

    Dual2& operator+=(const Dual2& o) { return *this = *this + o; }
    Dual2& operator-=(const Dual2& o) { return *this = *this - o; }
    Dual2& operator*=(const Dual2& o) { return *this = *this * o; }
    Dual2& operator/=(const Dual2& o) { return *this = *this / o; }

    // f(a) given f, f', f'' at a.value.
    friend Dual2 chain(const Dual2& a, double f, double df, double d2f) {
        Dual2 r(f);
        const std::size_t n = a.n_;
        r.resize(n);
        for (std::size_t i = 0; i < n; ++i) r.grad_[i] = df * a.grad_[i];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const double v = df * a.hess_[i * n + j] + d2f * (a.grad_[i] * a.grad_[j]);
                r.hess_[i * n + j] = v;
                r.hess_[j * n + i] = v;
            }
        }
        return r;
    }

private:
    void resize(std::size_t n) {
        n_ = n;
        grad_.assign(n, 0.0);
        hess_.assign(n * n, 0.0);
    }
    // Hessian entry k of an n-by-n layout, tolerating a smaller own dimension.
    double h(std::size_t k, std::size_t n) const {
        if (n_ == n) return hess_[k];
        return dd(k / n, k % n);
    }

    double value_ = 0.0;
    std::size_t n_ = 0;
    std::vector<double> grad_;
    std::vector<double> hess_;
};

inline double value(double x) { return x; }
inline double value(const Jet& x) { return x.value(); }
inline double value(const Dual2& x) { return x.value(); }

// Elementary functions. Domain checks are the caller's responsibility.
inline Jet sin(const Jet& a) { return chain(a, std::sin(a.value()), std::cos(a.value())); }
inline Jet cos(const Jet& a) { return chain(a, std::cos(a.value()), -std::sin(a.value())); }
inline Jet tan(const Jet& a) {
    const double t = std::tan(a.value());
    return chain(a, t, 1.0 + t * t);
}
inline Jet exp(const Jet& a) {
    const double e = std::exp(a.value());
    return chain(a, e, e);
}
inline Jet log(const Jet& a) { return chain(a, std::log(a.value()), 1.0 / a.value()); }
inline Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.value());
    return chain(a, s, s > 0.0 ? 0.5 / s : 0.0);
}
inline Jet abs(const Jet& a) {
    const double v = a.value();
    return chain(a, std::abs(v), v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
}
// a^y for constant real y; requires a > 0 unless y is an integer handled elsewhere.
inline Jet pow(const Jet& a, double y) {
    const double v = a.value();
    return chain(a, std::pow(v, y), y * std::pow(v, y - 1.0));
}

inline Dual2 sin(const Dual2& a) {
    const double s = std::sin(a.value());
    const double c = std::cos(a.value());
    return chain(a, s, c, -s);
}
inline Dual2 cos(const Dual2& a) {
    const double s = std::sin(a.value());
    const double c = std::cos(a.value());
    return chain(a, c, -s, -c);
}
inline Dual2 tan(const Dual2& a) {
    const double t = std::tan(a.value());
    const double sec2 = 1.0 + t * t;
    return chain(a, t, sec2, 2.0 * t * sec2);
}
inline Dual2 exp(const Dual2& a) {
    const double e = std::exp(a.value());
    return chain(a, e, e, e);
}
inline Dual2 log(const Dual2& a) {
    const double v = a.value();
    return chain(a, std::log(v), 1.0 / v, -1.0 / (v * v));
}
inline Dual2 sqrt(const Dual2& a) {
    const double s = std::sqrt(a.value());
    if (s == 0.0) return chain(a, 0.0, 0.0, 0.0);
    return chain(a, s, 0.5 / s, -0.25 / (s * s * s));
}
inline Dual2 abs(const Dual2& a) {
    const double v = a.value();
    return chain(a, std::abs(v), v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0), 0.0);
}
inline Dual2 pow(const Dual2& a, double y) {
    const double v = a.value();
    return chain(a, std::pow(v, y), y * std::pow(v, y - 1.0), y * (y - 1.0) * std::pow(v, y - 2.0));
}

// Integer power by repeated multiplication; differentiable for any base.
template <typename S>
S ipow(const S& base, long long e) {
    if (e == 0) return S(1.0);
    const bool negative = e < 0;
    unsigned long long k = negative ? static_cast<unsigned long long>(-e) : static_cast<unsigned long long>(e);
    S result(1.0);
    S b = base;
    bool first = true;
    while (k > 0) {
        if (k & 1ULL) {
            result = first ? b : result * b;
            first = false;
        }
        k >>= 1ULL;
        if (k > 0) b = b * b;
    }
    return negative ? S(1.0) / result : result;
}

}  // namespace kyano
