#pragma once

// Reduced dynamics of the modulation parameters: the closed-form scale law
// mu0(t) = cn * t^{-1/(n-4)}, explicit solutions for the dilation and drift
// rows, and an adaptive trapezoid integrator for the full 3n-row system.

#include <functional>
#include <stdexcept>
#include <vector>

#include "blowup/dims.hpp"

namespace blowup::dynamics {

using ScalarFn = std::function<double(double)>;
using VecFn = std::function<Vec(double)>;

// Constants that pin down the leading-order scale law for a given domain.
// H_qq is the regular part of the Green function on the diagonal at the
// blow-up point q, gradH its spatial gradient there.
struct BlowupConstants {
    int n = 5;
    double c1 = 0.0;
    double c2 = 0.0;
    double A = 0.0;
    double B = 0.0;
    double cn = 0.0;
    double b = 0.0;
    double H_qq = 0.0;
    Vec gradH;
};

// Build the full constant set from the quadrature layer plus the Green data
// at the blow-up point. D is the far-field dilation coefficient of the
// profile in use (bubble or tower).
BlowupConstants assemble_constants(int n, double D, double H_qq,
                                   const Vec& gradH);

// Amplitude b > 0 solving H * b^{n-3} = 2 b / (n-2). Throws if H <= 0.
double solve_b(double H, int n);
double solve_b_residual(double H, int n, double b);

// Leading-order scale mu0(t) = cn * t^{-1/(n-4)} and its time derivative.
double mu0(double t, const BlowupConstants& c);
double mu0_dot(double t, const BlowupConstants& c);

// Largest absolute residual of the scale ODE
//   mu0' = -(2 c1 / ((2 c1 A + c2)(n-2))) mu0^{n-3}
// over a log-spaced grid of sample times in [t0, 100 t0].
double mu0_consistency(const BlowupConstants& c, double t0 = 1.0,
                       int samples = 40);

// Solution of lambda' + (n-3)/((n-4) t) lambda = h(t) with data
// t0^{(n-3)/(n-4)} lambda(t0) = d, evaluated by quadrature:
//   lambda(t) = t^{-g} (d + int_t0^t s^g h(s) ds),  g = (n-3)/(n-4).
ScalarFn lambda_solution(double d, ScalarFn h, double t0, int n);

// Drift solution decaying to the blow-up point q:
//   xi(t) = q + cl (-b^{n-2} gradH) int_t^inf mu0^{n-2} ds + int_t^inf h ds
// with cl the translation pairing ratio. h maps t to an n-vector; pass an
// empty function for the homogeneous case.
VecFn xi_solution(VecFn h, const BlowupConstants& c, const Vec& q);

// Row layout of the reduced system, matching the symmetry kernels:
//   row 0:            dilation (lambda)
//   rows 1 .. n:      translation (xi)
//   row n+1:          rotation theta_12
//   rows n+2, n+3:    kelvin pair (a_1, a_2)
//   rows n+4 .. 2n+1: rotations theta_1j, j = 3..n
//   rows 2n+2..3n-1:  rotations theta_2j, j = 3..n
// The lambda row reads lambda' + (n-3)/((n-4) t) lambda = pi_0(t); the xi
// rows read xi_l' = pi_l(t); the a and theta rows read y' = mu0^{-1} pi(t).
struct ReducedForcings {
    std::vector<ScalarFn> pi;
};

// Forcings with the model leading structure: the xi rows carry the Green
// drift cl b^{n-2} gradH mu0^{n-2} plus a bounded mu0^{n-2+sigma} tail, and
// every other row carries a bounded multiple of its critical power of mu0.
ReducedForcings model_forcings(const BlowupConstants& c, double sigma,
                               double amplitude = 1.0);

struct IntegrateOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
    double first_step = 1e-3;
    int max_steps = 2000000;
};

// Trajectory of all modulation parameters with evaluators backed by the
// integrator's accepted steps (cubic Hermite between nodes). sigma records
// the decay offset used for the weighted norms.
struct ParamTrajectory {
    int n = 5;
    double t0 = 1.0;
    double t1 = 1.0;
    double sigma = 0.5;

    double lambda(double t) const;
    double lambda_dot(double t) const;
    Vec xi_drift(double t) const;  // xi - q, n components
    Vec xi_drift_dot(double t) const;
    Vec a(double t) const;      // 2 components
    Vec a_dot(double t) const;
    Vec theta(double t) const;  // 2n-3 components
    Vec theta_dot(double t) const;

    // Raw row access; 0 <= row < 3n.
    double state(int row, double t) const;
    double rate(int row, double t) const;

    std::vector<double> times;
    std::vector<Vec> states;  // 3n rows per node
    std::vector<Vec> rates;
    std::vector<ScalarFn> forcing;
    BlowupConstants consts;
};

// Integrate the reduced system from rest at t0 with the given forcings.
// All rows start at zero, so the xi rows hold the drift xi - q. Throws
// std::runtime_error with the failing time if the adaptive step shrinks
// below machine resolution.
ParamTrajectory integrate_reduced_system(const BlowupConstants& c,
                                         const ReducedForcings& f, double t0,
                                         double t1,
                                         const IntegrateOptions& opt = {});

// Weighted sup norm sup_t |h(t)| / mu0(t)^delta over a log grid in [t0, t1].
double weighted_norm(const ScalarFn& h, double delta,
                     const BlowupConstants& c, double t0, double t1,
                     int samples = 200);

// The eight norms controlling the trajectory: lambda and xi rates at weight
// n-3+sigma, a and theta rates at n-4+sigma, lambda at 1+sigma, the drift
// |xi - q| at 1+sigma, and a and theta at sigma.
struct TrajectoryNorms {
    double lambda_dot = 0.0;
    double xi_dot = 0.0;
    double a_dot = 0.0;
    double theta_dot = 0.0;
    double lambda = 0.0;
    double xi_drift = 0.0;
    double a = 0.0;
    double theta = 0.0;
};

TrajectoryNorms trajectory_norms(const ParamTrajectory& traj,
                                 const BlowupConstants& c, int samples = 200);

}  // namespace blowup::dynamics
