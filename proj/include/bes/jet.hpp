#pragma once

#include <cmath>

namespace bes {

// Truncated Taylor coefficients in one variable: value plus first and second
// derivative. Arithmetic follows the exact product/chain/quotient rules, so
// derivatives carry no finite-differencing error.
struct Jet2 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;

    static Jet2 constant(double c) { return {c, 0.0, 0.0}; }
    static Jet2 variable(double t) { return {t, 1.0, 0.0}; }
};

inline Jet2 operator+(const Jet2 &a, const Jet2 &b) {
    return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}
inline Jet2 operator-(const Jet2 &a, const Jet2 &b) {
    return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}
inline Jet2 operator-(const Jet2 &a) { return {-a.v, -a.d1, -a.d2}; }
inline Jet2 operator*(const Jet2 &a, const Jet2 &b) {
    return {a.v * b.v,
            a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
inline Jet2 operator/(const Jet2 &a, const Jet2 &b) {
    Jet2 q;
    q.v = a.v / b.v;
    q.d1 = (a.d1 - q.v * b.d1) / b.v;
    q.d2 = (a.d2 - 2.0 * q.d1 * b.d1 - q.v * b.d2) / b.v;
    return q;
}

/// Chain rule for u(f) given u, u', u'' at f.v.
inline Jet2 compose(const Jet2 &f, double u0, double u1, double u2) {
    return {u0, u1 * f.d1, u2 * f.d1 * f.d1 + u1 * f.d2};
}

// Same idea extended to third order (needed where a check consumes h''').
struct Jet3 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;

    static Jet3 constant(double c) { return {c, 0.0, 0.0, 0.0}; }
    static Jet3 variable(double t) { return {t, 1.0, 0.0, 0.0}; }
};

inline Jet3 operator+(const Jet3 &a, const Jet3 &b) {
    return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3};
}
inline Jet3 operator-(const Jet3 &a, const Jet3 &b) {
    return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3};
}
inline Jet3 operator-(const Jet3 &a) { return {-a.v, -a.d1, -a.d2, -a.d3}; }
inline Jet3 operator*(const Jet3 &a, const Jet3 &b) {
    return {a.v * b.v,
            a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2,
            a.d3 * b.v + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.v * b.d3};
}
inline Jet3 operator/(const Jet3 &a, const Jet3 &b) {
    // Solve a = q*b order by order (Leibniz).
    Jet3 q;
    q.v = a.v / b.v;
    q.d1 = (a.d1 - q.v * b.d1) / b.v;
    q.d2 = (a.d2 - 2.0 * q.d1 * b.d1 - q.v * b.d2) / b.v;
    q.d3 = (a.d3 - 3.0 * q.d2 * b.d1 - 3.0 * q.d1 * b.d2 - q.v * b.d3) / b.v;
    return q;
}

/// Chain rule (Faa di Bruno) for u(f) given u, u', u'', u''' at f.v.
inline Jet3 compose(const Jet3 &f, double u0, double u1, double u2, double u3) {
    return {u0,
            u1 * f.d1,
            u2 * f.d1 * f.d1 + u1 * f.d2,
            u3 * f.d1 * f.d1 * f.d1 + 3.0 * u2 * f.d1 * f.d2 + u1 * f.d3};
}

} // namespace bes
