#pragma once

// Radial method-of-lines solver for the critical heat equation on a ball,
// an evaluator for the residual of the corrected blow-up ansatz, and the
// weighted envelope norms used to grade fields and trajectories.

#include <functional>
#include <string>
#include <vector>

#include "blowup/dims.hpp"
#include "blowup/dynamics.hpp"
#include "blowup/green.hpp"
#include "blowup/heatpot.hpp"
#include "blowup/profiles.hpp"

namespace blowup::sim {

using ScalarFn = std::function<double(double)>;
using VecFn = std::function<Vec(double)>;

// ============================================================
// radial grid and solver state
// ============================================================

// Nodes 0 = r_0 < r_1 < ... < r_M on [0, r_max] with r_j = r_max (j/M)^g.
// The last node carries the Dirichlet value.
struct RadialGrid {
    int n = 5;
    Vec radii;

    // Power grading chosen so at least min_core nodes land inside the core
    // radius; g = 1 (uniform) whenever the uniform grid already does.
    static RadialGrid graded(int n, double r_max, int cells, double core,
                             int min_core = 24);
    static RadialGrid power(int n, double r_max, int cells, double g);

    int cells() const { return int(radii.size()) - 1; }
    double r_max() const { return radii(radii.size() - 1); }
    int count_inside(double r) const;
};

struct RadialField {
    RadialGrid grid;
    Vec u;
};

// Bubble ansatz at scale mu with the boundary-matching regular part
// subtracted, so the state vanishes on r = r_max.
RadialField bubble_state(const RadialGrid& grid, double mu,
                         double amplitude = 1.0);

struct StepOptions {
    double dt = 1e-3;
    bool nonlinear = true;
    double boundary = 0.0;
    double overflow_guard = 1e8;
};

struct StepInfo {
    bool overflow = false;
    double max_abs = 0.0;
};

// One IMEX step: implicit radial Laplacian, explicit nonlinearity.
RadialField step(const RadialField& state, const StepOptions& opt,
                 StepInfo* info = nullptr);

// Lyapunov functional int (|grad u|^2 / 2 - |u|^{p+1}/(p+1)) over the ball.
double energy(const RadialField& state);

// First positive root of the Bessel function J_nu.
double bessel_j_root(double nu);

// First radial Dirichlet eigenvalue of the Laplacian on a ball.
double first_eigenvalue(int n, double radius);

struct MuFit {
    double mu = 0.0;
    bool valid = false;
};

// Scale read off the center value, mu = (alpha_n / u(0))^{2/(n-2)}; invalid
// unless the state peaks strictly at the center.
MuFit fit_mu(const RadialField& state);

// ============================================================
// corrector profile
// ============================================================

// Decaying radial solution of lap(p0) + p |Q|^{p-1} p0 = q0, where q0 is
// the orthogonal combination of the profile's own error sources. The
// coefficient gamma = 1/b scales the corrector mu0^{n-2} gamma p0(|y|).
struct Corrector {
    int n = 5;
    double gamma = 0.0;
    double cn = 0.0;          // scale prefactor of mu0
    double kappa_pot = 0.0;   // coefficient of p U^{p-1} inside q0
    double kappa_tail = 0.0;  // coefficient of the far-field remainder
    Vec radii;
    Vec p0;
    double orth_residual = 0.0;  // measured overlap of q0 with the kernel

    double q0_at(double r) const;
    double p0_at(double r) const;   // linear interpolation, r^{-2} tail
    double lap_p0_at(double r) const;  // q0 - p U^{p-1} p0, from the equation
};

Corrector solve_corrector(const dynamics::BlowupConstants& c,
                          double r_max = 60.0, int cells = 3000);

// ============================================================
// ansatz assembly and its residual
// ============================================================

struct AnsatzTrajectory {
    ScalarFn mu;
    ScalarFn mu_dot;
    VecFn xi;      // n components
    VecFn xi_dot;
    VecFn a;       // 2 components
    VecFn a_dot;
};

// mu = b mu0, xi pinned at q, a = 0.
AnsatzTrajectory self_similar_ansatz(const dynamics::BlowupConstants& c,
                                     const Vec& q);

struct AnsatzConfig {
    int n = 5;
    double t0 = 1.0;
    Profile profile;
    double D = 0.0;
    double E = 0.0;
    Vec q;
    DomainSpec dom;
    AnsatzTrajectory traj;
    const Corrector* corrector = nullptr;
    bool with_potentials = true;
    bool with_regular = true;
    int time_refine = 1;
    double rel_tol = 1e-9;
    double fd_scale = 1e-3;
};

AnsatzConfig ball_ansatz_config(int n, double t0);

struct AnsatzParts {
    double profile = 0.0;
    double potentials = 0.0;
    double regular = 0.0;
    double corrector = 0.0;
    double total() const {
        return profile + potentials + regular + corrector;
    }
};

AnsatzParts ansatz_value(const AnsatzConfig& cfg, const Vec& x, double t);

// Residual -u_t + lap(u) + |u|^{p-1} u of the assembled ansatz at the given
// points. The heat potentials satisfy their own equations up to the known
// sources, so their time derivative never enters a finite difference; the
// profile, regular part, and corrector are differenced on the trajectory.
Vec ansatz_error(const AnsatzConfig& cfg, double t,
                 const std::vector<Vec>& points);

// First-order model of the residual: modulation chain rule on the
// transformed profile plus the pointwise linearization of the potential,
// regular-part, and corrector terms. Reported on the mu^{(n+2)/2}-rescaled
// scale; deviations from ansatz_error are quadratic remainders and stencil
// error.
Vec leading_error_model(const AnsatzConfig& cfg, double t,
                        const std::vector<Vec>& points);

// ============================================================
// envelope norms
// ============================================================

struct NormParams {
    int n = 5;
    double sigma = 0.5;     // in (0, n-4)
    double alpha = 2.1;     // > 2 with alpha - 2 small
    double gamma = 0.5;     // > 0
    double varsigma = 0.1;  // in (0, 1)
    double t0 = 100.0;
    double rho = 0.05;      // in (0, 0.5)

    double beta() const;           // (n-2)/(2(n-4)) + sigma/(n-4)
    double nu() const;             // 1 + sigma/(n-2)
    double cutoff_radius() const;  // t0^rho
    void validate() const;
};

// Envelope shapes: least M with |value| <= M * envelope(y, t).
//   inner_tau    t^{-nu} / (1 + |y|^{2+alpha})
//   inner_mu     mu0^{n-2+sigma} / (1 + |y|^alpha)
//   outer_source mu^{-2} t^{-gamma} / (1 + |y|^{2+varsigma})
//   outer_field  t^{-beta} / (1 + |y|^{alpha-2})
//   scale_power  mu0^delta
enum class EnvelopeKind {
    inner_tau,
    inner_mu,
    outer_source,
    outer_field,
    scale_power
};

struct FieldSample {
    double y = 0.0;
    double t = 1.0;
    double value = 0.0;
};

double weighted_norm(const std::vector<FieldSample>& samples,
                     EnvelopeKind kind, const NormParams& np,
                     const ScalarFn& mu, double delta = 0.0);

struct DivergenceCheck {
    double inner = 0.0;
    double outer = 0.0;
    double ratio = 0.0;
    bool divergent = false;
};

// Compares the norm on |y| <= y_split against the full sample set; a ratio
// well above one flags an envelope that the field outgrows.
DivergenceCheck norm_divergence(const std::vector<FieldSample>& samples,
                                double y_split, EnvelopeKind kind,
                                const NormParams& np, const ScalarFn& mu,
                                double delta = 0.0);

// ============================================================
// demonstration run
// ============================================================

// The positive radial bubble sits on the boundary between decay and
// finite-time blow-up, so a meaningful run first tunes the amplitude to
// that threshold by bisection (bisect_iters > 0) and then records the
// threshold trajectory. The time axis is aligned with the slow law by
// placing the start at the instant where the modeled scale equals
// mu_start. Single runs at a fixed amplitude (bisect_iters = 0) record
// whichever outcome occurs.
struct DemoConfig {
    int n = 5;
    double radius = 1.0;
    double horizon = 3.0;  // run until horizon * t_start
    int cells = 600;
    double mu_start = 0.2;
    double amplitude = 1.0;
    double dt_safety = 0.2;
    int record_every = 50;
    int bisect_iters = 44;
    double bisect_lo = 0.8;
    double bisect_hi = 1.6;
};

struct DemoSample {
    double t = 0.0;
    double mu = 0.0;
    double energy = 0.0;
    bool fit_valid = false;
};

struct DemoResult {
    std::vector<DemoSample> series;
    std::string outcome;  // "ran", "blowup", or "decay"
    double t_start = 0.0;
    double amplitude = 1.0;  // amplitude of the recorded run
    double slope = 0.0;      // log-log slope of mu over the late window
    bool slope_valid = false;
};

DemoResult run_blowup_demo(const DemoConfig& cfg);

}  // namespace blowup::sim
