#pragma once

#include <cstdint>
#include <vector>

namespace dfk {

/// Dimensionless radial profiles on normalized radius r >= 0.
/// Wen4/Wen2/Poly6 are compactly supported (exactly 0 for r >= 1);
/// Gauss is exp(-9 r^2 / 2) everywhere and is reserved for visualization.
enum class ScalarRbf : uint8_t { Wen4, Wen2, Poly6, Gauss };

bool compact_support(ScalarRbf family);
const char* family_name(ScalarRbf family);

/// phi(r), phi'(r), or phi''(r) for order 0/1/2; throws std::invalid_argument
/// for any other order. Compact families return 0 for r >= 1 at every order.
double eval_radial(ScalarRbf family, double r, int order);

/// Radial coefficients of the differential operators every matrix kernel is
/// built from, evaluated in the canonical convention (literal operator
/// application; for Wen4 this carries the factor 56 the printed closed forms
/// absorb):
///   neglap = -[phi'' + (d-1) phi'/r]
///   a      = phi'/r
///   b      = (phi'' - phi'/r) / r^2
/// r = 0 returns the analytic series limits (Wen4: neglap = 56 d, a = -56,
/// b = 1680). Wen2 is only C^2 at the origin, so its b diverges like 60/r;
/// the r = 0 branch reports +infinity there (the kernels that consume b pair
/// it with O(r^2) geometric factors, so the product limits stay finite).
struct OperatorCoeffs {
    double neglap;
    double a;
    double b;
};
OperatorCoeffs radial_operator_coeffs(ScalarRbf family, double r, int d);

namespace detail {

/// A radial function of the form poly(r) / r^rpow, optionally times
/// exp(-9 r^2 / 2). Coefficients come from exact integer arithmetic, so
/// symbolic differentiation and division by r are exact and r -> 0 limits
/// fall out of the constant term instead of epsilon-guarded division.
struct RadialFn {
    std::vector<double> num;  // coefficients, num[i] * r^i
    int rpow = 0;
    bool gauss = false;

    double operator()(double r) const;
    RadialFn derive() const;
    RadialFn div_r() const;
    RadialFn operator-(const RadialFn& o) const;
    RadialFn operator-() const;
};

/// Per-family primitive table: phi and radial derivatives p0..p3, plus the
/// operator coefficients a = p1/r, b = (p2 - a)/r^2 and their derivatives
/// db = b', ddb = b'', d3r = p3/r, d3rp = (p3/r)'. Everything downstream
/// (matrix kernels, Jacobians, vorticity, divergence coefficients) is a
/// d-dependent linear combination of these.
struct ProfileTable {
    RadialFn p0, p1, p2, p3;
    RadialFn a, b, db, ddb, d3r, d3rp;
    bool compact = true;
};

const ProfileTable& profile(ScalarRbf family);

}  // namespace detail

}  // namespace dfk
