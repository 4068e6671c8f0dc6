#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include <functional>

#include "blowup/dims.hpp"

namespace blowup {

// Fundamental solution with the profile-height normalization
// Gamma(x) = alpha_n |x|^{2-n}, so that -Delta Gamma = mass_constant(n) delta_0.
double gamma_fundamental(int n, const Vec& x);
Vec grad_gamma_fundamental(int n, const Vec& x);
double mass_constant(int n);

// Bounded domain given either as a ball or as a star-shaped region around
// center with boundary point center + rho(d) d for unit directions d.
struct DomainSpec {
    int n = 0;
    Vec center;
    double radius = 1.0;
    std::function<double(const Vec&)> boundary_radius;

    bool is_ball() const { return !static_cast<bool>(boundary_radius); }
    double radius_in(const Vec& dir) const;
    bool contains(const Vec& q) const;

    static DomainSpec ball(int n, const Vec& center, double radius);
    static DomainSpec star(int n, const Vec& center,
                           std::function<double(const Vec&)> rho);
};

// Signed distance estimate to the boundary along the ray from the center.
// Exact for balls, first order in the boundary slope otherwise.
double boundary_distance(const DomainSpec& dom, const Vec& q);

// Image-formula closed forms on balls. H is the regular part of the Green
// function: G(x,y) = Gamma(x-y) - H(x,y), H harmonic in x, matching Gamma on
// the boundary.
double regular_part_ball(const DomainSpec& dom, const Vec& x, const Vec& y);
double regular_part_ball_diag(const DomainSpec& dom, const Vec& q);
Vec grad_regular_part_ball(const DomainSpec& dom, const Vec& q);

// Defaults build quickly and always construct; accurate() is the preset that
// reaches 1e-4 relative agreement with the ball closed form on the central
// half of the domain (about half a minute of assembly on one core).
struct MfsOptions {
    int n_boundary = 3000;
    int n_charges = 750;
    double inflate = 1.5;
    double svd_threshold = 1e-12;
    double residual_tol = 0.1;
    unsigned seed = 7u;

    static MfsOptions accurate();
};

// Fundamental-solution collocation solver. Charges sit on an inflated copy
// of the boundary, so any weighted sum of them is harmonic inside the
// domain; weights are fitted per source point y by least squares on the
// boundary condition H(., y) = Gamma(. - y).
struct GreenSolver {
    DomainSpec domain;
    MfsOptions options;
    Mat source_points;
    Mat boundary_nodes;
    Eigen::BDCSVD<Mat> factorization;
    Vec probe_weights;
    double cond_estimate = 0.0;
    double fit_residual = 0.0;
    double node_spacing = 0.0;

    Vec solve_weights(const Vec& y) const;
};

GreenSolver make_green_solver(const DomainSpec& dom, const MfsOptions& opt = {});

// H(x, y) from the charge expansion.
double eval_regular(const GreenSolver& s, const Vec& x, const Vec& y);
// Charge sum for precomputed weights; useful when x varies and y is fixed.
double eval_with_weights(const GreenSolver& s, const Vec& w, const Vec& x);
// H(q, q).
double regular_part(const GreenSolver& s, const Vec& q);
// Gradient of x -> H(x, q) at x = q, differentiating the charge expansion.
Vec grad_regular_part(const GreenSolver& s, const Vec& q);
// G(x, y) = Gamma(x - y) - H(x, y).
double green_value(const GreenSolver& s, const Vec& x, const Vec& y);
// Max relative mismatch of the fitted H(., y) against Gamma(. - y) over
// fresh boundary points.
double boundary_residual(const GreenSolver& s, const Vec& y, int n_probe = 200,
                         unsigned seed = 99u);

} // namespace blowup
