#pragma once

// Steady profiles of Lap(Q) + |Q|^{p-1} Q = 0: the single positive bubble
// and towers that subtract k rescaled bubbles centered on a planar ring.
// Also the 3n-dimensional kernel of the linearization around Q and the
// conformally transformed family Q_A together with its parameter
// derivatives.

#include <functional>
#include <vector>

#include "blowup/dims.hpp"

namespace blowup {

// ============================================================
// scalar helpers
// ============================================================

// base^e for integer e >= 0.
inline double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

// base^{m/2} for positive base and integer m of either sign.
inline double pow_half(double base, int m) {
    if (m < 0) return 1.0 / pow_half(base, -m);
    double r = ipow(base, m / 2);
    if (m % 2) r *= std::sqrt(base);
    return r;
}

// ============================================================
// steady profiles
// ============================================================

// Either the single bubble (k = 0) or a tower with k negative satellites
// of scale zeta on the ring |y| = sqrt(1 - zeta^2) in the (y1,y2) plane.
// The ring radius makes |xi_j|^2 + zeta^2 = 1, so the profile is invariant
// under the Kelvin transform.
struct Profile {
    int n = 5;
    int k = 0;
    double kappa = 0.0;
    double zeta = 0.0;
    Mat centers;  // k x n, satellite centers

    static Profile bubble(int n);
    static Profile tower(int n, int k);
    static Profile tower(int n, int k, double kappa);

    bool is_bubble() const { return k == 0; }
};

// Ring balance constant kappa, defined through zeta = kappa / k^2 by
// requiring that at a satellite center the main bubble equals the sum of
// the other satellites. Solved by bisection.
double calibrate_kappa(int n, int k);

// U(y) = alpha_n (1 + |y|^2)^{-(n-2)/2} and related radial values.
double bubble_value(int n, double r2);
double bubble_p_value(int n, double r2);  // U^p
double bubble_z0_radial(int n, double r); // (n-2)/2 alpha (1-r^2)(1+r^2)^{-n/2}
double bubble_dz1_amp(int n);             // d1 U = amp * y1 (1+r^2)^{-n/2}

// Far-field template of the scaling kernel: (2 - r^2)(1 + r^2)^{-n/2}.
double farfield_g(int n, double r);

double eval(const Profile& P, const Vec& y);
Vec grad(const Profile& P, const Vec& y);
double laplacian(const Profile& P, const Vec& y);
double eval_pow_p(const Profile& P, const Vec& y);  // |Q|^{p-1} Q
double eval_dpot(const Profile& P, const Vec& y);   // p |Q|^{p-1}

// Value and gradient in one pass; y and gradient are raw arrays of size n.
void eval_value_grad(const Profile& P, const double* y, double* value,
                     double* gradient);

// ============================================================
// kernels of the linearized operator
// ============================================================

// The linearization L(phi) = Lap(phi) + p |Q|^{p-1} phi annihilates 3n
// fields, indexed as
//   alpha = 0          scaling        (n-2)/2 Q + y . grad Q
//   alpha = 1 .. n     translations   d_alpha Q
//   alpha = n+1        rotation in the (1,2) plane
//   alpha = n+2, n+3   inversion directions e1, e2
//   alpha = n+4+i      rotation in the (1, 3+i) plane, i = 0 .. n-3
//   alpha = 2n+2+i     rotation in the (2, 3+i) plane, i = 0 .. n-3
inline int kernel_count(int n) { return 3 * n; }

double eval_kernel(const Profile& P, int alpha, const Vec& y);

// All 3n kernel values at y in one pass.
Vec eval_kernels(const Profile& P, const Vec& y);

// L(phi)(x) with the Laplacian replaced by a centered second difference of
// step h.
double apply_linearized(const Profile& P,
                        const std::function<double(const Vec&)>& phi,
                        const Vec& x, double h);

double linearized_residual(const Profile& P, int alpha, const Vec& x, double h);

// ============================================================
// transformed family
// ============================================================

// Q_A(x) = mu^{-(n-2)/2} |eta|^{2-n} Q(R_theta (y - a |y|^2) / |eta|^2)
// with y = (x - xi)/mu, |eta|^2 = 1 - 2 a.y + |a|^2 |y|^2, a supported in
// the (y1,y2) plane, and R_theta the ordered product of plane rotations
// (1,2),(1,3),...,(1,n),(2,3),...,(2,n).
struct TransformParams {
    double mu = 1.0;
    Vec xi;
    Eigen::Vector2d a = Eigen::Vector2d::Zero();
    Vec theta;

    static TransformParams identity(int n);
};

Mat rotation_matrix(int n, const Vec& theta);

double eval_transformed(const Profile& P, const TransformParams& A,
                        const Vec& x);

// Adds h to the packed parameter slot alpha: 0 is mu, 1..n is xi,
// n+1 and n+4+i and 2n+2+i are rotation angles, n+2 and n+3 are a.
TransformParams perturb_param(const TransformParams& A, int alpha, double h);

// d/dh Q_{A + h e_alpha} at a = 0, theta = 0 equals
// kernel_scale(n, A, alpha) * z_alpha((x - xi)/mu).
double kernel_scale(int n, const TransformParams& A, int alpha);

struct DerivativeCheck {
    double res_h = 0.0;     // centered difference error at step h
    double res_half = 0.0;  // same at step h/2
    double ratio = 0.0;     // res_h / res_half, near 4 for a correct limit
    double scale = 0.0;     // normalization used for the relative errors
};

DerivativeCheck check_transform_derivative(const Profile& P,
                                           const TransformParams& A, int alpha,
                                           double h,
                                           const std::vector<Vec>& points);

// ============================================================
// far field fits
// ============================================================

// Least-squares reads of the far-field amplitudes on an annulus:
//   z0   ~  D g(r),        D = (n-2)/2 alpha (1 + dk)
//   z1   ~  E y1 (1+r^2)^{-n/2}
//   Q    ~  alpha (1 + dk) r^{2-n}
struct FarfieldFit {
    double D = 0.0;
    double E = 0.0;
    double dk = 0.0;
    double d_resid = 0.0;
    double e_resid = 0.0;
    double dk_resid = 0.0;
};

FarfieldFit fit_farfield_constants(const Profile& P);

// Kelvin transform |y|^{2-n} Q(y / |y|^2); equals eval(P, y) exactly for
// both profile kinds.
double kelvin_eval(const Profile& P, const Vec& y);

} // namespace blowup
