#pragma once

#include "dfk/rbf.hpp"
#include "dfk/vec.hpp"

namespace dfk {

/// Kernel construction applied to the scalar base profile.
///   DivFree:       (-I lap + grad grad^T) phi, analytically divergence-free
///   CurlFree:      -grad grad^T phi, analytically curl-free
///   NegLapScalar:  (-lap phi) I, the regular matrix kernel of the Leray split
///   CurlKernel:    curl(phi alpha) (3D) / rotated gradient times scalar (2D)
///   RegularScalar: phi I, the plain RBF baseline
enum class KernelKind : uint8_t { DivFree, CurlFree, NegLapScalar, CurlKernel, RegularScalar };

struct KernelType {
    KernelKind kind = KernelKind::DivFree;
    ScalarRbf base = ScalarRbf::Wen4;
};

const char* kind_name(KernelKind kind);

/// Weight components per kernel: d, except the 2D curl kernel's single
/// scalar. Scalar weights live in the z slot of their Vec so the 3D cross
/// product formulas cover 2D unchanged.
int weight_width(KernelType type, int d);

/// Exponent p of the 1/h^p prefactor of the velocity contribution
/// (2 for matrix kinds, 1 for the curl kernel, 0 for the plain profile).
int h_power(KernelKind kind);

bool divergence_free_kind(KernelKind kind);

/// Upstream loss derivatives feeding adjoint_weights.
struct AdjointBuffers {
    Vec dl_du;        // velocity path
    Mat dl_djac;      // jacobian path
    Vec dl_dvort;     // vorticity path (2D scalar in z)
    Mat dl_dvortjac;  // vorticity-jacobian path (3D)
};

enum class AdjointPath { Velocity, Jacobian, Vorticity, VortJacobian };

/// Matrix kernel value, kind in {DivFree, CurlFree}. offset is the raw
/// displacement x - center; the result carries the 1/h^2 chain factor and is
/// exactly the zero matrix for r >= 1 of compact bases.
Mat eval_matrix(KernelType type, const Vec& offset, double h, int d);

/// Scalar -lap phi value with the same normalization and 1/h^2 factor.
double eval_neglap(ScalarRbf base, const Vec& offset, double h, int d);

Vec velocity_contribution(KernelType type, const Vec& offset, double h, const Vec& alpha, int d);

/// Exact spatial Jacobian of velocity_contribution (1/h^(p+1) scaling).
/// For DivFree and CurlKernel kinds the returned trace is exactly zero: the
/// last active diagonal entry is closed against the others.
Mat jacobian_contribution(KernelType type, const Vec& offset, double h, const Vec& alpha, int d);

///(y . alpha) * c(r) / h^(p+1): the analytic divergence of the contribution.
double divergence_contribution(KernelType type, const Vec& offset, double h, const Vec& alpha, int d);

/// Curl of the DivFree velocity contribution. 3D returns the vector; 2D the
/// scalar z-component (in the z slot). Wen4 runs closed forms, Poly6/Gauss
/// the generic coefficient path; Wen2 vorticity is not implemented (its C^2
/// profile has no direction-continuous limit at the center).
Vec vorticity_contribution(ScalarRbf base, const Vec& offset, double h, const Vec& alpha, int d);

/// Spatial gradient of the DivFree vorticity (3D only, 1/h^4 scaling).
Mat vorticity_jacobian_contribution(ScalarRbf base, const Vec& offset, double h, const Vec& alpha);

/// dL/dalpha through the selected path for the DivFree kernel family
/// (velocity path supports every kind).
Vec adjoint_weights(KernelType type, const Vec& offset, double h, int d, const AdjointBuffers& adj,
                    AdjointPath which);

struct GeometryGrad {
    Vec d_center;
    double d_radius = 0.0;
};

/// Gradients of L w.r.t. the kernel center and radius through the velocity
/// path: dL/dcenter = -J^T dL_du and dL/dh = -dL_du . (p u + J offset) / h.
GeometryGrad adjoint_geometry(KernelType type, const Vec& offset, double h, const Vec& alpha,
                              const Vec& dl_du, int d);

/// Divergence value plus gradients w.r.t. alpha/center/radius, scaled by the
/// upstream derivative dl_ddiv. Zero everything for divergence-free kinds.
struct DivergenceGrads {
    double value = 0.0;
    Vec d_alpha;
    Vec d_center;
    double d_radius = 0.0;
};
DivergenceGrads divergence_with_grads(KernelType type, const Vec& offset, double h, const Vec& alpha,
                                      int d, double dl_ddiv);

/// Generic-path mirrors (polynomial primitive table for every base, no Wen4
/// closed forms). Used to pin fast-path/generic agreement in tests.
namespace generic_path {
Mat eval_matrix(KernelType type, const Vec& offset, double h, int d);
Vec velocity_contribution(KernelType type, const Vec& offset, double h, const Vec& alpha, int d);
Mat jacobian_contribution(KernelType type, const Vec& offset, double h, const Vec& alpha, int d);
Vec vorticity_contribution(ScalarRbf base, const Vec& offset, double h, const Vec& alpha, int d);
Mat vorticity_jacobian_contribution(ScalarRbf base, const Vec& offset, double h, const Vec& alpha);
}  // namespace generic_path

}  // namespace dfk
