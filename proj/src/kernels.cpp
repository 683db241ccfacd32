#include "dfk/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace dfk {

namespace {

/// Radial primitives consumed by every kind-specific combination. The two
/// providers (Wen4 closed forms vs. the generic polynomial table) must agree
/// to rounding; the canonical convention carries the factor 56 relative to
/// the printed Wen4 forms.
struct Primitives {
    double p0, p2;       // phi, phi''
    double a, b;         // phi'/r, (phi'' - phi'/r)/r^2
    double db, ddb;      // b', b''
    double d3r, d3rp;    // phi'''/r, (phi'''/r)'
};

Primitives wen4_primitives(double r) {
    // Closed forms: a = -56 (1-r)^5 (5r+1), b = 1680 (1-r)^4,
    // b' = -6720 (1-r)^3, b'' = 20160 (1-r)^2,
    // phi'''/r = -1680 (1-r)^3 (7r-3), (phi'''/r)' = 1680 (1-r)^2 (28r-16).
    const double w = 1.0 - r;
    const double w2 = w * w;
    const double w3 = w2 * w;
    const double w4 = w2 * w2;
    Primitives p;
    p.p0 = w4 * w2 * (35.0 * r * r + 18.0 * r + 3.0);
    p.p2 = -56.0 * w4 * (1.0 + 4.0 * r - 35.0 * r * r);
    p.a = -56.0 * w4 * w * (5.0 * r + 1.0);
    p.b = 1680.0 * w4;
    p.db = -6720.0 * w3;
    p.ddb = 20160.0 * w2;
    p.d3r = -1680.0 * w3 * (7.0 * r - 3.0);
    p.d3rp = 1680.0 * w2 * (28.0 * r - 16.0);
    return p;
}

Primitives generic_primitives(ScalarRbf base, double r) {
    const auto& t = detail::profile(base);
    Primitives p;
    p.p0 = t.p0(r);
    p.p2 = t.p2(r);
    p.a = t.a(r);
    p.b = t.b(r);
    p.db = t.db(r);
    p.ddb = t.ddb(r);
    p.d3r = t.d3r(r);
    p.d3rp = t.d3rp(r);
    return p;
}

Primitives primitives(ScalarRbf base, double r, bool force_generic) {
    if (!force_generic && base == ScalarRbf::Wen4) return wen4_primitives(r);
    return generic_primitives(base, r);
}

/// Velocity/Jacobian radial coefficients of the symmetric kinds:
/// u = h^-p [ f(r) alpha + g(r) (y.alpha) y ].
struct FgCoeffs {
    double f, g;
    double fpr;  // f'(r)/r
    double gp;   // g'(r)
};

FgCoeffs fg_coeffs(KernelKind kind, const Primitives& p, int d, bool need_jac) {
    FgCoeffs c{};
    const double dd = static_cast<double>(d);
    switch (kind) {
        case KernelKind::DivFree:
            c.f = -p.p2 - (dd - 2.0) * p.a;
            c.g = p.b;
            if (need_jac) {
                c.fpr = -p.d3r - (dd - 2.0) * p.b;
                c.gp = p.db;
            }
            break;
        case KernelKind::CurlFree:
            c.f = -p.a;
            c.g = -p.b;
            if (need_jac) {
                c.fpr = -p.b;
                c.gp = -p.db;
            }
            break;
        case KernelKind::NegLapScalar:
            c.f = -(p.p2 + (dd - 1.0) * p.a);
            c.g = 0.0;
            if (need_jac) {
                c.fpr = -p.d3r - (dd - 1.0) * p.b;
                c.gp = 0.0;
            }
            break;
        default:  // RegularScalar
            c.f = p.p0;
            c.g = 0.0;
            if (need_jac) {
                c.fpr = p.a;
                c.gp = 0.0;
            }
            break;
    }
    return c;
}

struct Normalized {
    Vec y;
    double r;
    bool outside;  // r >= 1 of a compact base
};

Normalized normalize(ScalarRbf base, const Vec& offset, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("kernel radius h must be positive");
    Normalized n;
    n.y = (1.0 / h) * offset;
    n.r = norm(n.y);
    n.outside = compact_support(base) && n.r >= 1.0;
    return n;
}

void check_weight_shape(KernelType type, const Vec& alpha, int d) {
    if (d == 2 && type.kind != KernelKind::CurlKernel && alpha.z != 0.0)
        throw std::invalid_argument("2D weight must keep z == 0");
    if (d == 2 && type.kind == KernelKind::CurlKernel && (alpha.x != 0.0 || alpha.y != 0.0))
        throw std::invalid_argument("2D curl kernel weight is a scalar in the z slot");
}

Mat eval_matrix_impl(KernelType type, const Vec& offset, double h, int d, bool force_generic) {
    if (type.kind != KernelKind::DivFree && type.kind != KernelKind::CurlFree)
        throw std::invalid_argument("eval_matrix: kind must be DivFree or CurlFree");
    const Normalized n = normalize(type.base, offset, h);
    if (n.outside) return Mat{};
    const Primitives p = primitives(type.base, n.r, force_generic);
    const FgCoeffs c = fg_coeffs(type.kind, p, d, false);
    const double s = 1.0 / (h * h);
    Mat m = identity_scaled(s * c.f, d);
    if (c.g != 0.0) {
        const double sg = s * c.g;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) += sg * n.y[i] * n.y[j];
    }
    return m;
}

Vec velocity_impl(KernelType type, const Vec& offset, double h, const Vec& alpha, int d,
                  bool force_generic) {
    check_weight_shape(type, alpha, d);
    const Normalized n = normalize(type.base, offset, h);
    if (n.outside) return Vec{};
    const Primitives p = primitives(type.base, n.r, force_generic);
    if (type.kind == KernelKind::CurlKernel) {
        // u = (1/h) a(r) (y x alpha); covers 2D via alpha = (0, 0, w).
        return (p.a / h) * cross(n.y, alpha);
    }
    const FgCoeffs c = fg_coeffs(type.kind, p, d, false);
    const double s = std::pow(h, -h_power(type.kind));
    Vec u = (s * c.f) * alpha;
    if (c.g != 0.0) u += (s * c.g * dot(n.y, alpha)) * n.y;
    return u;
}

Mat jacobian_impl(KernelType type, const Vec& offset, double h, const Vec& alpha, int d,
                  bool force_generic) {
    check_weight_shape(type, alpha, d);
    const Normalized n = normalize(type.base, offset, h);
    Mat jac;
    if (n.outside || n.r == 0.0) return jac;  // every term carries a factor of y
    const Primitives p = primitives(type.base, n.r, force_generic);
    const double s = std::pow(h, -h_power(type.kind) - 1);

    if (type.kind == KernelKind::CurlKernel) {
        // J = (1/h^2) [ b (y x alpha) y^T + a A ], A_ij = eps_ijm alpha_m.
        const Vec yxa = cross(n.y, alpha);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) jac(i, j) = p.b * yxa[i] * n.y[j];
        jac(0, 1) += p.a * alpha.z;
        jac(1, 0) -= p.a * alpha.z;
        if (d == 3) {
            jac(0, 2) -= p.a * alpha.y;
            jac(2, 0) += p.a * alpha.y;
            jac(1, 2) += p.a * alpha.x;
            jac(2, 1) -= p.a * alpha.x;
        }
        jac *= s;
    } else {
        const FgCoeffs c = fg_coeffs(type.kind, p, d, true);
        const double ya = dot(n.y, alpha);
        const double gpr = c.gp / n.r;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double v = c.fpr * alpha[i] * n.y[j] + gpr * ya * n.y[i] * n.y[j] +
                           c.g * n.y[i] * alpha[j];
                if (i == j) v += c.g * ya;
                jac(i, j) = s * v;
            }
    }

    if (divergence_free_kind(type.kind)) {
        // Close the trace so it is exactly zero in floating point.
        double partial = 0.0;
        for (int i = 0; i + 1 < d; ++i) partial += jac(i, i);
        jac(d - 1, d - 1) = -partial;
    }
    return jac;
}

/// H1(r) = h'(r)/r of the DivFree vorticity and its derivative.
struct VortCoeffs {
    double h1;
    double h1p;
};

VortCoeffs vort_coeffs(ScalarRbf base, double r, int d, bool need_grad, bool force_generic) {
    if (base == ScalarRbf::Wen2)
        throw std::invalid_argument("vorticity closed forms are not implemented for Wen2");
    if (!force_generic && base == ScalarRbf::Wen4) {
        const double w = 1.0 - r;
        const double w2 = w * w;
        VortCoeffs v{};
        if (d == 3) {
            v.h1 = 1680.0 * w2 * w * (9.0 * r - 5.0);
            if (need_grad) v.h1p = -20160.0 * w2 * (3.0 * r - 2.0);  // so h1p/r = 20160 (1-r)^2 (2-3r)/r
        } else {
            v.h1 = 6720.0 * w2 * w * (2.0 * r - 1.0);
            if (need_grad) v.h1p = -6720.0 * w2 * (8.0 * r - 5.0);
        }
        return v;
    }
    const auto& t = detail::profile(base);
    const double dd = static_cast<double>(d);
    VortCoeffs v{};
    v.h1 = -t.d3r(r) - (dd - 1.0) * t.b(r);
    if (need_grad) v.h1p = -t.d3rp(r) - (dd - 1.0) * t.db(r);
    return v;
}

Vec vorticity_impl(ScalarRbf base, const Vec& offset, double h, const Vec& alpha, int d,
                   bool force_generic) {
    const Normalized n = normalize(base, offset, h);
    if (n.outside) return Vec{};
    const VortCoeffs v = vort_coeffs(base, n.r, d, false, force_generic);
    return (v.h1 / (h * h * h)) * cross(n.y, alpha);
}

Mat vorticity_jacobian_impl(ScalarRbf base, const Vec& offset, double h, const Vec& alpha,
                            bool force_generic) {
    const Normalized n = normalize(base, offset, h);
    Mat m;
    if (n.outside) return m;
    const VortCoeffs v = vort_coeffs(base, n.r, 3, true, force_generic);
    const double s = 1.0 / (h * h * h * h);
    // A term: H1 * A with A_ij = eps_ijm alpha_m.
    m(0, 1) = v.h1 * alpha.z;
    m(1, 0) = -v.h1 * alpha.z;
    m(0, 2) = -v.h1 * alpha.y;
    m(2, 0) = v.h1 * alpha.y;
    m(1, 2) = v.h1 * alpha.x;
    m(2, 1) = -v.h1 * alpha.x;
    if (n.r > 0.0) {
        // (H1'/r)(y x alpha) y^T; the 1/r singular coefficient is paired with
        // the O(r^2) factor, and at r == 0 the term vanishes identically.
        const double k = v.h1p / n.r;
        const Vec yxa = cross(n.y, alpha);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) += k * yxa[i] * n.y[j];
    }
    m *= s;
    return m;
}

}  // namespace

const char* kind_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::DivFree: return "divfree";
        case KernelKind::CurlFree: return "curlfree";
        case KernelKind::NegLapScalar: return "neglap";
        case KernelKind::CurlKernel: return "curl";
        default: return "regular";
    }
}

int weight_width(KernelType type, int d) {
    if (type.kind == KernelKind::CurlKernel && d == 2) return 1;
    if (type.kind == KernelKind::CurlKernel) return 3;
    return d;
}

int h_power(KernelKind kind) {
    switch (kind) {
        case KernelKind::CurlKernel: return 1;
        case KernelKind::RegularScalar: return 0;
        default: return 2;
    }
}

bool divergence_free_kind(KernelKind kind) {
    return kind == KernelKind::DivFree || kind == KernelKind::CurlKernel;
}

Mat eval_matrix(KernelType type, const Vec& offset, double h, int d) {
    return eval_matrix_impl(type, offset, h, d, false);
}

double eval_neglap(ScalarRbf base, const Vec& offset, double h, int d) {
    const Normalized n = normalize(base, offset, h);
    if (n.outside) return 0.0;
    const Primitives p = primitives(base, n.r, false);
    return -(p.p2 + static_cast<double>(d - 1) * p.a) / (h * h);
}

Vec velocity_contribution(KernelType type, const Vec& offset, double h, const Vec& alpha, int d) {
    return velocity_impl(type, offset, h, alpha, d, false);
}

Mat jacobian_contribution(KernelType type, const Vec& offset, double h, const Vec& alpha, int d) {
    return jacobian_impl(type, offset, h, alpha, d, false);
}

double divergence_contribution(KernelType type, const Vec& offset, double h, const Vec& alpha,
                               int d) {
    return divergence_with_grads(type, offset, h, alpha, d, 0.0).value;
}

Vec vorticity_contribution(ScalarRbf base, const Vec& offset, double h, const Vec& alpha, int d) {
    return vorticity_impl(base, offset, h, alpha, d, false);
}

Mat vorticity_jacobian_contribution(ScalarRbf base, const Vec& offset, double h, const Vec& alpha) {
    return vorticity_jacobian_impl(base, offset, h, alpha, false);
}

Vec adjoint_weights(KernelType type, const Vec& offset, double h, int d, const AdjointBuffers& adj,
                    AdjointPath which) {
    const Normalized n = normalize(type.base, offset, h);
    if (n.outside) return Vec{};

    switch (which) {
        case AdjointPath::Velocity:
            // The symmetric kinds reuse the velocity formula (psi^T = psi);
            // the curl kernel gives a (q x y) by antisymmetry.
            if (type.kind == KernelKind::CurlKernel) {
                const Primitives p = primitives(type.base, n.r, false);
                return (p.a / h) * cross(adj.dl_du, n.y);
            }
            return velocity_impl(type, offset, h, adj.dl_du, d, false);

        case AdjointPath::Jacobian: {
            if (n.r == 0.0) return Vec{};
            const Primitives p = primitives(type.base, n.r, false);
            const Mat& S = adj.dl_djac;
            const double s = std::pow(h, -h_power(type.kind) - 1);
            if (type.kind == KernelKind::CurlKernel) {
                // dL/dalpha = (1/h^2) [ b (S y) x y + a axial(S) ].
                const Vec Sy = mat_vec(S, n.y);
                const Vec axial{S(1, 2) - S(2, 1), S(2, 0) - S(0, 2), S(0, 1) - S(1, 0)};
                return s * (p.b * cross(Sy, n.y) + p.a * axial);
            }
            const FgCoeffs c = fg_coeffs(type.kind, p, d, true);
            const Vec Sy = mat_vec(S, n.y);
            const Vec STy = mat_tvec(S, n.y);
            const double ySy = dot(n.y, Sy);
            double tr = 0.0;
            for (int i = 0; i < d; ++i) tr += S(i, i);
            Vec g = c.fpr * Sy + (c.gp / n.r * ySy) * n.y + c.g * STy + (c.g * tr) * n.y;
            return s * g;
        }

        case AdjointPath::Vorticity: {
            const VortCoeffs v = vort_coeffs(type.base, n.r, d, false, false);
            return (v.h1 / (h * h * h)) * cross(adj.dl_dvort, n.y);
        }

        default: {  // VortJacobian (3D)
            if (d != 3) throw std::invalid_argument("vorticity-jacobian adjoint is 3D only");
            const VortCoeffs v = vort_coeffs(type.base, n.r, 3, true, false);
            const Mat& S = adj.dl_dvortjac;
            const Vec axial{S(1, 2) - S(2, 1), S(2, 0) - S(0, 2), S(0, 1) - S(1, 0)};
            Vec g = v.h1 * axial;
            if (n.r > 0.0) {
                const Vec Sy = mat_vec(S, n.y);
                g += (v.h1p / n.r) * cross(Sy, n.y);
            }
            return (1.0 / (h * h * h * h)) * g;
        }
    }
}

GeometryGrad adjoint_geometry(KernelType type, const Vec& offset, double h, const Vec& alpha,
                              const Vec& dl_du, int d) {
    GeometryGrad g;
    const Normalized n = normalize(type.base, offset, h);
    if (n.outside) return g;
    const Mat jac = jacobian_impl(type, offset, h, alpha, d, false);
    const Vec u = velocity_impl(type, offset, h, alpha, d, false);
    g.d_center = -1.0 * mat_tvec(jac, dl_du);
    const Vec joff = mat_vec(jac, offset);
    g.d_radius = -dot(dl_du, static_cast<double>(h_power(type.kind)) * u + joff) / h;
    return g;
}

DivergenceGrads divergence_with_grads(KernelType type, const Vec& offset, double h,
                                      const Vec& alpha, int d, double dl_ddiv) {
    DivergenceGrads out;
    if (divergence_free_kind(type.kind)) return out;
    const Normalized n = normalize(type.base, offset, h);
    if (n.outside) return out;
    const Primitives p = primitives(type.base, n.r, false);
    const double dd = static_cast<double>(d);

    double c = 0.0;
    double cp = 0.0;
    switch (type.kind) {
        case KernelKind::CurlFree:
            c = -((dd + 2.0) * p.b + p.db * n.r);
            cp = -((dd + 3.0) * p.db + p.ddb * n.r);
            break;
        case KernelKind::NegLapScalar:
            c = -(p.d3r + (dd - 1.0) * p.b);
            cp = -(p.d3rp + (dd - 1.0) * p.db);
            break;
        default:  // RegularScalar
            c = p.a;
            cp = p.b * n.r;
            break;
    }

    const double pw = static_cast<double>(h_power(type.kind));
    const double s = std::pow(h, -(pw + 1.0));
    const double ya = dot(n.y, alpha);
    out.value = s * ya * c;
    if (dl_ddiv == 0.0) return out;

    const double s2 = s / h;
    out.d_alpha = (dl_ddiv * s * c) * n.y;
    Vec dc = (c) * alpha;
    if (n.r > 0.0) dc += (cp * ya / n.r) * n.y;
    out.d_center = (-dl_ddiv * s2) * dc;
    out.d_radius = -dl_ddiv * s2 * ya * ((pw + 2.0) * c + n.r * cp);
    return out;
}

namespace generic_path {

Mat eval_matrix(KernelType type, const Vec& offset, double h, int d) {
    return eval_matrix_impl(type, offset, h, d, true);
}

Vec velocity_contribution(KernelType type, const Vec& offset, double h, const Vec& alpha, int d) {
    return velocity_impl(type, offset, h, alpha, d, true);
}

Mat jacobian_contribution(KernelType type, const Vec& offset, double h, const Vec& alpha, int d) {
    return jacobian_impl(type, offset, h, alpha, d, true);
}

Vec vorticity_contribution(ScalarRbf base, const Vec& offset, double h, const Vec& alpha, int d) {
    return vorticity_impl(base, offset, h, alpha, d, true);
}

Mat vorticity_jacobian_contribution(ScalarRbf base, const Vec& offset, double h, const Vec& alpha) {
    return vorticity_jacobian_impl(base, offset, h, alpha, true);
}

}  // namespace generic_path

}  // namespace dfk
