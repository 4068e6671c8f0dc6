#pragma once

// Duhamel heat potentials of the slow-parameter source terms: radial (m = 0)
// and dipole (m = 1) heat-kernel convolutions reduced to one-dimensional
// quadrature, time integration on a graded grid resolving the s -> t
// concentration scale, and finite-difference residual and decay diagnostics.

#include <functional>
#include <utility>
#include <vector>

#include "blowup/dims.hpp"

namespace blowup::heatpot {

// Angular average of the heat kernel over a sphere of radius r seen from
// distance R, in scaled form: m_m(kappa) = int_0^pi exp(kappa (cos - 1))
// cos^m sin^{n-2} dtheta with kappa = R r / (2 tau). Bounded on [0, inf);
// m0(0) equals the sphere-area ratio omega_{n-1}/omega_{n-2} and m1(0) = 0.
double m0_kernel(int n, double kappa);
double m1_kernel(int n, double kappa);

// Heat-kernel convolution at distance R from the center of a radial bump
// f(|y|/scale) (m = 0) or of the dipole f(|y|/scale)(yhat . e) (m = 1):
//   (4 pi tau)^{-n/2} omega_{n-2} int r^{n-1} f(r/scale)
//       exp(-(R-r)^2/(4 tau)) m_m(R r / (2 tau)) dr.
// For m = 1 the returned scalar multiplies (xhat . e) at the caller.
double conv_radial(int n, int m, double R, double tau,
                   const std::function<double(double)>& profile, double scale,
                   double rel_tol = 1e-9);

// Scaling-family history feeding the sources; all callables take absolute
// time. Only the fields a source kind reads need to be set.
struct SourceTrajectory {
    std::function<double(double)> mu;
    std::function<double(double)> mu_dot;
    std::function<Vec(double)> xi;
    std::function<Vec(double)> xi_dot;
    std::function<Eigen::Vector2d(double)> a_dot;
};

// mu = b cn t^{-1/(n-4)} with its exact derivative, center fixed at q,
// no drift and no inversion rate.
SourceTrajectory self_similar_trajectory(int n, double b, double cn, Vec q);

struct HeatPotentialSpec {
    int n = 5;
    double t0 = 1.0;
    double D = 0.0;           // radial far-field coefficient of the profile
    double E = 0.0;           // gradient far-field coefficient
    SourceTrajectory traj;
    int time_refine = 1;      // each extra level halves every time panel
    double rel_tol = 1e-9;    // radial quadrature tolerance
};

enum class SourceKind { dilation, translation, kelvin };

// Instantaneous source density at a space-time point. `i` selects the
// inversion component for kelvin (1 or 2) and is ignored otherwise.
double source_value(const HeatPotentialSpec& spec, SourceKind kind, int i,
                    const Vec& x, double t);

// The three potentials: integrals of the heat kernel against the dilation,
// translation, and inversion sources from t0 to t. All vanish at t = t0,
// are exactly linear in the source coefficients, and the dipole kinds
// vanish on the instantaneous center line.
double phi0(const HeatPotentialSpec& spec, const Vec& x, double t);
double phi1(const HeatPotentialSpec& spec, const Vec& x, double t);
double phi2i(const HeatPotentialSpec& spec, int i, const Vec& x, double t);

// Contribution to phi0 from source times s in [t0, t - delta] only.
double phi0_far_part(const HeatPotentialSpec& spec, const Vec& x, double t,
                     double delta);

// Max over samples of |-phi_t + Delta(phi) + source| relative to the
// source's core magnitude at the sample time. Samples are (radius, time)
// pairs with x placed on the dipole axis at that radius from the center;
// trajectories must keep the center fixed so the potential stays radial.
double residual_check(const HeatPotentialSpec& spec, SourceKind kind, int i,
                      const std::vector<std::pair<double, double>>& samples);

struct DecayFit {
    double slope = 0.0;      // d log|phi| / d log(1 + |y|)
    double amplitude = 0.0;  // fitted value at |y| = 0
};

// Fits log|phi| against log(1 + |y|) over |y| in [5, 50] at fixed time,
// with y the self-similar offset (x - xi)/mu along the dipole axis.
DecayFit decay_profile_check(const HeatPotentialSpec& spec, SourceKind kind,
                             int i, double t);

} // namespace blowup::heatpot
