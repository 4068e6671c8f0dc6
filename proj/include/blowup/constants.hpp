#pragma once

// Quadrature constants attached to the profiles: pairing integrals of the
// kernel fields, the heat-kernel response integral A and the derived
// constants cn and B, and Gram matrices of the 3n kernels computed by a
// cylindrical sector reduction.

#include "blowup/profiles.hpp"

namespace blowup::constants {

// ============================================================
// closed forms
// ============================================================

// (1/2) [Beta(n/2+1, n/2-1) - Beta(n/2, n/2)], also
// sqrt(pi) 2^{-n} Gamma(n/2-1) / Gamma((n+1)/2).
double J_n_closed(int n);

// (1/2) [Beta(n/2, n/2) - 2 Beta(n/2+1, n/2-1) + Beta(n/2+2, n/2-2)].
double K_n_closed(int n);

double int_Up_closed(int n);     // integral of U^p
double int_z0_sq_closed(int n);  // integral of z0^2
double int_z1_sq_closed(int n);  // integral of (d1 U)^2

double c1_closed(int n);  // (n-2)/2 * integral of U^p
double c2_closed(int n);  // integral of (z0 - D g) z0 for the bubble
double cl_translation_closed(int n);  // integral of U^p over integral of z1^2

// ============================================================
// quadrature checks and pipeline constants
// ============================================================

struct GammaIdentity {
    double lhs;  // radial quadrature of (r^2 - 1)(1+r^2)^{-n} r^{n-1}
    double rhs;  // the closed form above
};
GammaIdentity gamma_identity(int n, double rel_tol = 1e-10);

// c1 = -p * integral of |Q|^{p-1} z0; radial for the bubble, sector
// reduction for towers.
double const_c1(const Profile& P, double rel_tol = 1e-9);

// c2 = integral of (z0 - D g) z0 with a caller-supplied far-field D.
double const_c2(const Profile& P, double D, double rel_tol = 1e-9);

// F(a) = integral of the time-one heat kernel against D g(a |x|).
double F_of_a(int n, double D, double a, double rel_tol = 1e-11);

// A = integral of s F(s) ds on [0, inf); `cutoff` is the switch point
// between the finite-range panelization and the compactified tail.
double const_A(int n, double D, double cutoff = 2e4, double rel_tol = 1e-9);

// cn = [ (2 c1 A + c2)(n-2) / (2 (n-4) c1) ]^{1/(n-4)}.
double const_cn(int n, double c1, double c2, double A);

// B = 2 A / ((n-4) cn^{n-4}).
double const_B(int n, double A, double cn);

// ============================================================
// kernel Gram matrices
// ============================================================

// 3n x 3n matrix of pairings of the kernels around Q. Computed on a half
// sector in the plane angle with a 9-component reduced kernel vector and
// assembled over the cyclic symmetry group, so the cost is one 3-d
// integration regardless of n and k.
Mat gram_matrix(const Profile& P, double rel_tol = 1e-7);

// Same integration without the sector and reflection shortcuts, for
// cross-checking the assembly on small k.
Mat gram_matrix_direct(const Profile& P, double rel_tol = 1e-6);

// Norm of the scaling kernel of one satellite, squared, against its exact
// value zeta^2 * integral of z0^2.
struct ScalePair {
    double lhs;
    double rhs;
};
ScalePair satellite_scaling_check(const Profile& P, double rel_tol = 1e-10);

} // namespace blowup::constants
