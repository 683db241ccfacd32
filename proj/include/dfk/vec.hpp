#pragma once

#include <array>
#include <cmath>

namespace dfk {

/// Fixed-capacity 3-vector used for both 2D and 3D quantities.
/// Invariant: 2D data keeps z == 0, so dot/norm/cross over all three
/// components remain correct without dimension branches.
struct Vec {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec& operator+=(const Vec& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec& operator-=(const Vec& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec operator+(Vec a, const Vec& b) { return a += b; }
inline Vec operator-(Vec a, const Vec& b) { return a -= b; }
inline Vec operator*(double s, Vec a) { return a *= s; }
inline Vec operator*(Vec a, double s) { return a *= s; }
inline Vec operator-(const Vec& a) { return Vec{-a.x, -a.y, -a.z}; }

inline double dot(const Vec& a, const Vec& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline Vec cross(const Vec& a, const Vec& b) {
    return Vec{a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Row-major 3x3 matrix; 2D data keeps the third row/column zero.
struct Mat {
    std::array<double, 9> m{};

    double& operator()(int i, int j) { return m[static_cast<size_t>(3 * i + j)]; }
    double operator()(int i, int j) const { return m[static_cast<size_t>(3 * i + j)]; }

    Mat& operator+=(const Mat& o) {
        for (int i = 0; i < 9; ++i) m[static_cast<size_t>(i)] += o.m[static_cast<size_t>(i)];
        return *this;
    }
    Mat& operator*=(double s) {
        for (double& v : m) v *= s;
        return *this;
    }
};

inline Mat operator+(Mat a, const Mat& b) { return a += b; }
inline Mat operator*(double s, Mat a) { return a *= s; }

inline Mat identity_scaled(double s, int d) {
    Mat r;
    for (int i = 0; i < d; ++i) r(i, i) = s;
    return r;
}

inline Mat outer(const Vec& a, const Vec& b) {
    Mat r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
}

inline Vec mat_vec(const Mat& m, const Vec& v) {
    return Vec{m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z,
               m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
               m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
}

inline Vec mat_tvec(const Mat& m, const Vec& v) {
    return Vec{m(0, 0) * v.x + m(1, 0) * v.y + m(2, 0) * v.z,
               m(0, 1) * v.x + m(1, 1) * v.y + m(2, 1) * v.z,
               m(0, 2) * v.x + m(1, 2) * v.y + m(2, 2) * v.z};
}

inline double trace(const Mat& m) { return m(0, 0) + m(1, 1) + m(2, 2); }

/// Axis-aligned box. 2D boxes keep z bounds at 0.
struct Box {
    Vec lo;
    Vec hi;

    double extent(int axis) const { return hi[axis] - lo[axis]; }
    double volume(int d) const {
        double v = 1.0;
        for (int i = 0; i < d; ++i) v *= extent(i);
        return v;
    }
    double diagonal(int d) const {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += extent(i) * extent(i);
        return std::sqrt(s);
    }
    bool contains(const Vec& p, int d) const {
        for (int i = 0; i < d; ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    }
};

}  // namespace dfk
