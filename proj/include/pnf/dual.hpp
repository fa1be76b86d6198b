// Forward-mode dual numbers. Nesting Dual<Dual<double>> yields exact second
// derivatives; all expression evaluation is templated on the scalar so jets
// are algorithmic, never finite-differenced.
#pragma once

#include <cmath>
#include <type_traits>

#include "pnf/errors.hpp"

namespace pnf {

template <typename T>
struct Dual {
    T val{};
    T dot{};

    Dual() = default;
    Dual(double v) : val(v), dot(0.0) {} // NOLINT: implicit promotion intended
    Dual(T v, T d) : val(std::move(v)), dot(std::move(d)) {}
};

namespace detail {
inline double scalar_value(double x) { return x; }
template <typename T>
double scalar_value(const Dual<T>& x) { return scalar_value(x.val); }
} // namespace detail

template <typename T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.val + b.val, a.dot + b.dot}; }
template <typename T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.val - b.val, a.dot - b.dot}; }
template <typename T>
Dual<T> operator-(const Dual<T>& a) { return {-a.val, -a.dot}; }
template <typename T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.val * b.val, a.dot * b.val + a.val * b.dot};
}
template <typename T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    if (detail::scalar_value(b.val) == 0.0)
        throw UndefinedExpression("division by zero");
    T q = a.val / b.val;
    return {q, (a.dot - q * b.dot) / b.val};
}

template <typename T> Dual<T> operator+(const Dual<T>& a, double b) { return a + Dual<T>(b); }
template <typename T> Dual<T> operator+(double a, const Dual<T>& b) { return Dual<T>(a) + b; }
template <typename T> Dual<T> operator-(const Dual<T>& a, double b) { return a - Dual<T>(b); }
template <typename T> Dual<T> operator-(double a, const Dual<T>& b) { return Dual<T>(a) - b; }
template <typename T> Dual<T> operator*(const Dual<T>& a, double b) { return a * Dual<T>(b); }
template <typename T> Dual<T> operator*(double a, const Dual<T>& b) { return Dual<T>(a) * b; }
template <typename T> Dual<T> operator/(const Dual<T>& a, double b) { return a / Dual<T>(b); }
template <typename T> Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

using std::cos;
using std::exp;
using std::sin;
using std::sqrt;

template <typename T>
Dual<T> sin(const Dual<T>& a) { return {sin(a.val), a.dot * cos(a.val)}; }
template <typename T>
Dual<T> cos(const Dual<T>& a) { return {cos(a.val), -a.dot * sin(a.val)}; }
template <typename T>
Dual<T> exp(const Dual<T>& a) {
    T e = exp(a.val);
    return {e, a.dot * e};
}
template <typename T>
Dual<T> sqrt(const Dual<T>& a) {
    // The derivative blows up at 0; jets demand a strictly positive argument.
    if (detail::scalar_value(a.val) <= 0.0)
        throw UndefinedExpression("sqrt of non-positive value in jet evaluation");
    T r = sqrt(a.val);
    return {r, a.dot / (2.0 * r)};
}

inline double checked_sqrt(double x) {
    if (x < 0.0)
        throw UndefinedExpression("sqrt of negative value");
    return std::sqrt(x);
}

// Integer power by repeated squaring; negative exponents go through division.
template <typename T>
T powi(const T& base, int n) {
    if (n < 0)
        return T(1.0) / powi(base, -n);
    T result(1.0);
    T b = base;
    int k = n;
    while (k > 0) {
        if (k & 1) result = result * b;
        b = b * b;
        k >>= 1;
    }
    return result;
}

inline double powi(double base, int n) {
    if (n < 0) {
        if (base == 0.0)
            throw UndefinedExpression("zero raised to a negative power");
        return 1.0 / powi(base, -n);
    }
    double result = 1.0;
    double b = base;
    int k = n;
    while (k > 0) {
        if (k & 1) result *= b;
        b *= b;
        k >>= 1;
    }
    return result;
}

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

} // namespace pnf
