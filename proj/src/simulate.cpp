#include "blowup/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "blowup/dynamics.hpp"
#include "blowup/numerics.hpp"

namespace blowup::sim {

namespace hp = blowup::heatpot;

namespace {

double pow_p(int n, double v) {
    if (v == 0.0) return 0.0;
    const double pm1 = 4.0 / double(n - 2);
    return std::pow(std::abs(v), pm1) * v;
}

// Solves the tridiagonal system in place; rhs holds the solution on return.
// sub(0) and sup(m-1) are ignored.
void thomas_solve(Vec& sub, Vec& diag, Vec& sup, Vec& rhs) {
    const int m = int(diag.size());
    for (int i = 1; i < m; ++i) {
        const double w = sub(i) / diag(i - 1);
        diag(i) -= w * sup(i - 1);
        rhs(i) -= w * rhs(i - 1);
    }
    rhs(m - 1) /= diag(m - 1);
    for (int i = m - 2; i >= 0; --i)
        rhs(i) = (rhs(i) - sup(i) * rhs(i + 1)) / diag(i);
}

// Three-point coefficients of u'' + (n-1)/r u' at interior node i of a
// nonuniform grid, acting on (u_{i-1}, u_i, u_{i+1}).
struct LapRow {
    double lo = 0.0;
    double mid = 0.0;
    double hi = 0.0;
};

LapRow laplacian_row(int n, const Vec& r, int i) {
    const double hm = r(i) - r(i - 1);
    const double hpp = r(i + 1) - r(i);
    const double den = hm * hpp * (hm + hpp);
    const double drift = double(n - 1) / r(i);
    LapRow row;
    row.lo = 2.0 * hpp / den + drift * (-hpp * hpp / den);
    row.mid = -2.0 * (hm + hpp) / den + drift * ((hpp * hpp - hm * hm) / den);
    row.hi = 2.0 * hm / den + drift * (hm * hm / den);
    return row;
}

} // namespace

// ============================================================
// radial grid and solver state
// ============================================================

RadialGrid RadialGrid::power(int n, double r_max, int cells, double g) {
    if (n < 2) throw std::invalid_argument("dimension must be >= 2");
    if (!(r_max > 0.0)) throw std::invalid_argument("radius must be positive");
    if (cells < 8) throw std::invalid_argument("need at least 8 cells");
    if (!(g >= 1.0) || !(g <= 16.0))
        throw std::invalid_argument("grading exponent must lie in [1, 16]");
    RadialGrid grid;
    grid.n = n;
    grid.radii.resize(cells + 1);
    for (int j = 0; j <= cells; ++j)
        grid.radii(j) = r_max * std::pow(double(j) / double(cells), g);
    grid.radii(0) = 0.0;
    grid.radii(cells) = r_max;
    return grid;
}

RadialGrid RadialGrid::graded(int n, double r_max, int cells, double core,
                              int min_core) {
    if (!(core > 0.0)) throw std::invalid_argument("core radius must be positive");
    if (min_core < 2) throw std::invalid_argument("min_core must be >= 2");
    if (cells < 2 * min_core)
        throw std::invalid_argument("cell count too small for the core resolution");
    if (core >= r_max) return power(n, r_max, cells, 1.0);
    if (double(cells) * core >= double(min_core) * r_max)
        return power(n, r_max, cells, 1.0);
    double g = std::log(core / r_max) / std::log(double(min_core) / double(cells));
    g = std::min(g, 16.0);
    RadialGrid grid = power(n, r_max, cells, g);
    if (grid.count_inside(core) < min_core)
        throw std::runtime_error("graded grid cannot resolve the core radius");
    return grid;
}

int RadialGrid::count_inside(double r) const {
    const double slack = r * (1.0 + 1e-12);
    int count = 0;
    for (int j = 0; j < int(radii.size()); ++j)
        if (radii(j) <= slack) ++count;
    return count;
}

RadialField bubble_state(const RadialGrid& grid, double mu, double amplitude) {
    if (!(mu > 0.0)) throw std::invalid_argument("scale must be positive");
    const int n = grid.n;
    const int m = int(grid.radii.size());
    const DomainSpec dom = DomainSpec::ball(n, Vec::Zero(n), grid.r_max());
    const Vec origin = Vec::Zero(n);
    RadialField state;
    state.grid = grid;
    state.u.resize(m);
    for (int j = 0; j < m; ++j) {
        const double r = grid.radii(j);
        Vec x = Vec::Zero(n);
        x(0) = r;
        const double core = pow_half(mu, 2 - n) * bubble_value(n, (r / mu) * (r / mu));
        const double reg = pow_half(mu, n - 2) * regular_part_ball(dom, x, origin);
        state.u(j) = amplitude * (core - reg);
    }
    // The bubble tail and the regular part agree only to O(mu^2) on the
    // boundary; shift by the residual constant so the trace is exactly zero.
    state.u.array() -= state.u(m - 1);
    return state;
}

RadialField step(const RadialField& state, const StepOptions& opt, StepInfo* info) {
    const int m = int(state.u.size());
    if (m != int(state.grid.radii.size()))
        throw std::invalid_argument("state length does not match the grid");
    if (m < 3) throw std::invalid_argument("grid too small to step");
    if (!(opt.dt > 0.0)) throw std::invalid_argument("time step must be positive");

    const int n = state.grid.n;
    const Vec& r = state.grid.radii;
    const double dt = opt.dt;
    const int rows = m - 1; // last node holds the Dirichlet value

    Vec sub = Vec::Zero(rows);
    Vec diag = Vec::Zero(rows);
    Vec sup = Vec::Zero(rows);
    Vec rhs = Vec::Zero(rows);

    const double c0 = 2.0 * double(n) / (r(1) * r(1));
    diag(0) = 1.0 + dt * c0;
    sup(0) = -dt * c0;
    rhs(0) = state.u(0);
    if (opt.nonlinear) rhs(0) += dt * pow_p(n, state.u(0));

    for (int i = 1; i < rows; ++i) {
        const LapRow row = laplacian_row(n, r, i);
        sub(i) = -dt * row.lo;
        diag(i) = 1.0 - dt * row.mid;
        sup(i) = -dt * row.hi;
        rhs(i) = state.u(i);
        if (opt.nonlinear) rhs(i) += dt * pow_p(n, state.u(i));
        if (i == rows - 1) rhs(i) += dt * row.hi * opt.boundary;
    }

    thomas_solve(sub, diag, sup, rhs);

    RadialField next;
    next.grid = state.grid;
    next.u.resize(m);
    next.u.head(rows) = rhs;
    next.u(m - 1) = opt.boundary;

    if (info) {
        info->max_abs = next.u.cwiseAbs().maxCoeff();
        info->overflow = !std::isfinite(info->max_abs) ||
                         info->max_abs > opt.overflow_guard;
    }
    return next;
}

double energy(const RadialField& state) {
    const int n = state.grid.n;
    const int m = int(state.u.size());
    if (m != int(state.grid.radii.size()))
        throw std::invalid_argument("state length does not match the grid");
    const Vec& r = state.grid.radii;
    const double pp1 = double(2 * n) / double(n - 2); // p + 1
    double grad_term = 0.0;
    double pot_term = 0.0;
    for (int i = 0; i + 1 < m; ++i) {
        const double h = r(i + 1) - r(i);
        const double slope = (state.u(i + 1) - state.u(i)) / h;
        const double shell =
            (std::pow(r(i + 1), n) - std::pow(r(i), n)) / double(n);
        grad_term += 0.5 * slope * slope * shell;
        const double fi = std::pow(std::abs(state.u(i)), pp1) * std::pow(r(i), n - 1);
        const double fj =
            std::pow(std::abs(state.u(i + 1)), pp1) * std::pow(r(i + 1), n - 1);
        pot_term += 0.5 * (fi + fj) * h;
    }
    return sphere_area(n) * (grad_term - pot_term / pp1);
}

double bessel_j_root(double nu) {
    if (!(nu >= 0.0)) throw std::invalid_argument("order must be nonnegative");
    auto f = [nu](double x) { return std::cyl_bessel_j(nu, x); };
    double lo = nu + 1e-3;
    if (!(f(lo) > 0.0)) throw std::runtime_error("Bessel scan started past the first root");
    double hi = lo;
    bool bracketed = false;
    for (int i = 0; i < 400; ++i) {
        hi += 0.1;
        if (f(hi) < 0.0) {
            bracketed = true;
            break;
        }
        lo = hi;
    }
    if (!bracketed) throw std::runtime_error("Bessel root bracket not found");
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double first_eigenvalue(int n, double radius) {
    if (n < 2) throw std::invalid_argument("dimension must be >= 2");
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    const double root = bessel_j_root(0.5 * double(n - 2));
    return (root / radius) * (root / radius);
}

MuFit fit_mu(const RadialField& state) {
    const int n = state.grid.n;
    MuFit fit;
    const double u0 = state.u(0);
    if (!(u0 > 0.0) || !std::isfinite(u0)) return fit;
    for (int j = 1; j < int(state.u.size()); ++j)
        if (!(state.u(j) < u0)) return fit;
    fit.mu = std::pow(Dims(n).alpha() / u0, 2.0 / double(n - 2));
    fit.valid = true;
    return fit;
}

// ============================================================
// corrector profile
// ============================================================

double Corrector::q0_at(double r) const {
    const double w = 1.0 + r * r;
    return kappa_pot * double(n) * double(n + 2) / (w * w) -
           kappa_tail * pow_half(w, -n);
}

double Corrector::p0_at(double r) const {
    const int m = int(radii.size());
    const double r_end = radii(m - 1);
    if (r >= r_end) return p0(m - 1) * (r_end / r) * (r_end / r);
    auto begin = radii.data();
    const int j = int(std::upper_bound(begin, begin + m, r) - begin);
    if (j <= 0) return p0(0);
    const double w = (r - radii(j - 1)) / (radii(j) - radii(j - 1));
    return (1.0 - w) * p0(j - 1) + w * p0(j);
}

double Corrector::lap_p0_at(double r) const {
    const double w = 1.0 + r * r;
    return q0_at(r) - double(n) * double(n + 2) / (w * w) * p0_at(r);
}

Corrector solve_corrector(const dynamics::BlowupConstants& c, double r_max,
                          int cells) {
    const int n = c.n;
    if (!(r_max >= 10.0)) throw std::invalid_argument("corrector domain too small");
    if (cells < 100) throw std::invalid_argument("corrector grid too coarse");
    if (!(c.b > 0.0) || !(c.cn > 0.0) || !(c.c1 > 0.0))
        throw std::invalid_argument("constants must come from a positive assembly");

    Corrector co;
    co.n = n;
    co.gamma = 1.0 / c.b;
    co.cn = c.cn;
    const double d_far = 0.5 * double(n - 2) * Dims(n).alpha();
    const double scale = c.b * c.b / (double(n - 4) * ipow(c.cn, n - 4));
    co.kappa_pot = scale * c.c2 / c.c1;
    co.kappa_tail = scale * d_far;

    // Solvability: the source must carry no component along the scaling
    // kernel, otherwise no decaying solution exists.
    quad::Options qopt;
    qopt.rel_tol = 1e-12;
    auto weight = [&](double r) {
        return co.q0_at(r) * bubble_z0_radial(n, r) * std::pow(r, n - 1);
    };
    const double overlap = quad::integrate_to_inf(weight, 0.0, 2.0, qopt);
    const double mass = quad::integrate_to_inf(
        [&](double r) { return std::abs(weight(r)); }, 0.0, 2.0, qopt);
    co.orth_residual = std::abs(overlap) / mass;
    if (co.orth_residual > 1e-8)
        throw std::runtime_error("corrector source is not orthogonal to the kernel");

    const int m = cells + 1;
    const double h = r_max / double(cells);
    co.radii.resize(m);
    for (int j = 0; j < m; ++j) co.radii(j) = h * double(j);

    const double nn2 = double(n) * double(n + 2);
    auto solve_with_rhs = [&](const Vec& source) {
        Vec sub = Vec::Zero(m);
        Vec diag = Vec::Zero(m);
        Vec sup = Vec::Zero(m);
        Vec rhs = source;
        diag(0) = -2.0 * double(n) / (h * h) + nn2;
        sup(0) = 2.0 * double(n) / (h * h);
        for (int j = 1; j < m - 1; ++j) {
            const double r = co.radii(j);
            const double w = 1.0 + r * r;
            sub(j) = 1.0 / (h * h) - double(n - 1) / (2.0 * r * h);
            diag(j) = -2.0 / (h * h) + nn2 / (w * w);
            sup(j) = 1.0 / (h * h) + double(n - 1) / (2.0 * r * h);
        }
        sub(m - 1) = -1.0 / h;
        diag(m - 1) = 1.0 / h + 2.0 / r_max;
        rhs(m - 1) = 0.0;
        thomas_solve(sub, diag, sup, rhs);
        return rhs;
    };

    // The operator annihilates the scaling kernel on decaying radial fields,
    // so the plain solve carries a grid-dependent kernel component. Deflate
    // it: solve once against the source and once against the kernel, then
    // combine so the result has no kernel overlap in the localized pairing
    // with weight p U^{p-1} r^{n-1} (the plain r^{n-1} pairing diverges).
    Vec src(m);
    Vec kern(m);
    for (int j = 0; j < m; ++j) {
        src(j) = co.q0_at(co.radii(j));
        kern(j) = bubble_z0_radial(n, co.radii(j));
    }
    const Vec pa = solve_with_rhs(src);
    const Vec pb = solve_with_rhs(kern);
    double pair_a = 0.0;
    double pair_b = 0.0;
    for (int j = 1; j < m - 1; ++j) {
        const double r = co.radii(j);
        const double w = 1.0 + r * r;
        const double weight = h * nn2 / (w * w) * std::pow(r, n - 1) * kern(j);
        pair_a += weight * pa(j);
        pair_b += weight * pb(j);
    }
    co.p0 = pa - (pair_a / pair_b) * pb;
    return co;
}

// ============================================================
// ansatz assembly and its residual
// ============================================================

AnsatzTrajectory self_similar_ansatz(const dynamics::BlowupConstants& c,
                                     const Vec& q) {
    if (int(q.size()) != c.n)
        throw std::invalid_argument("center dimension mismatch");
    AnsatzTrajectory traj;
    const double b = c.b;
    traj.mu = [b, c](double t) { return b * dynamics::mu0(t, c); };
    traj.mu_dot = [b, c](double t) { return b * dynamics::mu0_dot(t, c); };
    traj.xi = [q](double) { return q; };
    const int n = c.n;
    traj.xi_dot = [n](double) { return Vec(Vec::Zero(n)); };
    traj.a = [](double) { return Vec(Vec::Zero(2)); };
    traj.a_dot = [](double) { return Vec(Vec::Zero(2)); };
    return traj;
}

AnsatzConfig ball_ansatz_config(int n, double t0) {
    if (!(t0 > 0.0)) throw std::invalid_argument("start time must be positive");
    AnsatzConfig cfg;
    cfg.n = n;
    cfg.t0 = t0;
    cfg.profile = Profile::bubble(n);
    const double alpha = Dims(n).alpha();
    cfg.D = 0.5 * double(n - 2) * alpha;
    cfg.E = -double(n - 2) * alpha;
    cfg.q = Vec::Zero(n);
    cfg.dom = DomainSpec::ball(n, Vec::Zero(n), 1.0);
    const double h_qq = regular_part_ball_diag(cfg.dom, cfg.q);
    const Vec grad_h = grad_regular_part_ball(cfg.dom, cfg.q);
    const dynamics::BlowupConstants c =
        dynamics::assemble_constants(n, cfg.D, h_qq, grad_h);
    cfg.traj = self_similar_ansatz(c, cfg.q);
    return cfg;
}

namespace {

hp::HeatPotentialSpec make_heat_spec(const AnsatzConfig& cfg) {
    hp::HeatPotentialSpec spec;
    spec.n = cfg.n;
    spec.t0 = cfg.t0;
    spec.D = cfg.D;
    spec.E = cfg.E;
    spec.traj.mu = cfg.traj.mu;
    spec.traj.mu_dot = cfg.traj.mu_dot;
    spec.traj.xi = cfg.traj.xi;
    spec.traj.xi_dot = cfg.traj.xi_dot;
    auto a_dot = cfg.traj.a_dot;
    spec.traj.a_dot = [a_dot](double t) {
        const Vec v = a_dot(t);
        return Eigen::Vector2d(v(0), v(1));
    };
    spec.time_refine = cfg.time_refine;
    spec.rel_tol = cfg.rel_tol;
    return spec;
}

TransformParams transform_at(const AnsatzConfig& cfg, double t) {
    TransformParams A = TransformParams::identity(cfg.n);
    A.mu = cfg.traj.mu(t);
    A.xi = cfg.traj.xi(t);
    const Vec av = cfg.traj.a(t);
    A.a = Eigen::Vector2d(av(0), av(1));
    return A;
}

double corrector_value(const AnsatzConfig& cfg, const Vec& x, double t) {
    const Corrector* co = cfg.corrector;
    if (!co) return 0.0;
    const double mu = cfg.traj.mu(t);
    const Vec y = (x - cfg.traj.xi(t)) / mu;
    const double m0 = co->cn * std::pow(t, -1.0 / double(cfg.n - 4));
    return pow_half(mu, 2 - cfg.n) * co->gamma * ipow(m0, cfg.n - 2) *
           co->p0_at(y.norm());
}

double potentials_at(const hp::HeatPotentialSpec& spec, const Vec& x, double t) {
    return hp::phi0(spec, x, t) + hp::phi1(spec, x, t) +
           hp::phi2i(spec, 1, x, t) + hp::phi2i(spec, 2, x, t);
}

double sources_at(const hp::HeatPotentialSpec& spec, const Vec& x, double t) {
    return hp::source_value(spec, hp::SourceKind::dilation, 0, x, t) +
           hp::source_value(spec, hp::SourceKind::translation, 0, x, t) +
           hp::source_value(spec, hp::SourceKind::kelvin, 1, x, t) +
           hp::source_value(spec, hp::SourceKind::kelvin, 2, x, t);
}

void check_regular_domain(const AnsatzConfig& cfg) {
    if (cfg.with_regular && !cfg.dom.is_ball())
        throw std::invalid_argument("regular part needs the closed-form ball domain");
}

} // namespace

AnsatzParts ansatz_value(const AnsatzConfig& cfg, const Vec& x, double t) {
    if (!(t >= cfg.t0)) throw std::invalid_argument("time precedes the start");
    check_regular_domain(cfg);
    AnsatzParts parts;
    parts.profile = eval_transformed(cfg.profile, transform_at(cfg, t), x);
    const double muk = pow_half(cfg.traj.mu(t), cfg.n - 2);
    if (cfg.with_potentials) {
        const hp::HeatPotentialSpec spec = make_heat_spec(cfg);
        parts.potentials = muk * potentials_at(spec, x, t);
    }
    if (cfg.with_regular)
        parts.regular = -muk * regular_part_ball(cfg.dom, x, cfg.q);
    if (cfg.corrector) parts.corrector = corrector_value(cfg, x, t);
    return parts;
}

Vec ansatz_error(const AnsatzConfig& cfg, double t,
                 const std::vector<Vec>& points) {
    check_regular_domain(cfg);
    const double h = cfg.fd_scale * t;
    if (!(h > 0.0)) throw std::invalid_argument("difference spacing must be positive");
    if (!(t - 2.0 * h > cfg.t0))
        throw std::invalid_argument("time too close to the start for the stencil");

    const int n = cfg.n;
    const hp::HeatPotentialSpec spec = make_heat_spec(cfg);
    const double mu = cfg.traj.mu(t);
    const double mu_dot = cfg.traj.mu_dot(t);
    const double muk = pow_half(mu, n - 2);
    const double muk_dot = 0.5 * double(n - 2) * pow_half(mu, n - 4) * mu_dot;

    Vec out(points.size());
    for (size_t k = 0; k < points.size(); ++k) {
        const Vec& x = points[k];
        const double h_xq =
            cfg.with_regular ? regular_part_ball(cfg.dom, x, cfg.q) : 0.0;
        auto slow_part = [&](double s) {
            double v = eval_transformed(cfg.profile, transform_at(cfg, s), x);
            if (cfg.with_regular) v -= pow_half(cfg.traj.mu(s), n - 2) * h_xq;
            if (cfg.corrector) v += corrector_value(cfg, x, s);
            return v;
        };
        const double dW =
            (8.0 * (slow_part(t + h) - slow_part(t - h)) -
             (slow_part(t + 2.0 * h) - slow_part(t - 2.0 * h))) /
            (12.0 * h);
        double phi_star = 0.0;
        double src = 0.0;
        if (cfg.with_potentials) {
            phi_star = potentials_at(spec, x, t);
            src = sources_at(spec, x, t);
        }
        const double q_a = eval_transformed(cfg.profile, transform_at(cfg, t), x);
        // Assemble the departure from the transformed profile out of its
        // small pieces directly; forming u* first would round them away
        // against the large core value.
        double delta = muk * phi_star;
        if (cfg.with_regular) delta -= muk * h_xq;
        if (cfg.corrector) delta += corrector_value(cfg, x, t);
        double f_diff;
        if (std::abs(delta) <= 0.125 * std::abs(q_a)) {
            const double p = double(n + 2) / double(n - 2);
            f_diff = pow_p(n, q_a) * std::expm1(p * std::log1p(delta / q_a));
        } else {
            f_diff = pow_p(n, q_a + delta) - pow_p(n, q_a);
        }
        double lap_corr = 0.0;
        if (cfg.corrector) {
            const Vec y = (x - cfg.traj.xi(t)) / mu;
            const double m0 = cfg.corrector->cn * std::pow(t, -1.0 / double(n - 4));
            lap_corr = pow_half(mu, -(n + 2)) * cfg.corrector->gamma *
                       ipow(m0, n - 2) * cfg.corrector->lap_p0_at(y.norm());
        }
        out(k) = -dW - muk_dot * phi_star + f_diff + lap_corr - muk * src;
    }
    return out;
}

Vec leading_error_model(const AnsatzConfig& cfg, double t,
                        const std::vector<Vec>& points) {
    check_regular_domain(cfg);
    const int n = cfg.n;
    const double mu = cfg.traj.mu(t);
    const double mu_dot = cfg.traj.mu_dot(t);
    const Vec xi = cfg.traj.xi(t);
    const Vec xi_dot = cfg.traj.xi_dot(t);
    const Vec a_dot = cfg.traj.a_dot(t);

    const double kap = 0.5 * double(n - 2);

    hp::HeatPotentialSpec spec;
    if (cfg.with_potentials) spec = make_heat_spec(cfg);

    Vec out(points.size());
    for (size_t k = 0; k < points.size(); ++k) {
        const Vec& x = points[k];
        const Vec y = (x - xi) / mu;
        const double dpot = eval_dpot(cfg.profile, y);
        const Vec gq = grad(cfg.profile, y);

        double chain = mu_dot * eval_kernel(cfg.profile, 0, y);
        for (int l = 0; l < n; ++l) chain += xi_dot(l) * gq(l);
        for (int i = 0; i < 2; ++i)
            chain += mu * a_dot(i) * eval_kernel(cfg.profile, n + 2 + i, y);

        double field = 0.0;
        double src = 0.0;
        if (cfg.with_potentials) {
            field += potentials_at(spec, x, t);
            src = sources_at(spec, x, t);
        }
        if (cfg.with_regular) field -= regular_part_ball(cfg.dom, x, cfg.q);

        double corr = 0.0;
        if (cfg.corrector) {
            const double m0 =
                cfg.corrector->cn * std::pow(t, -1.0 / double(n - 4));
            corr = cfg.corrector->gamma * ipow(m0, n - 2) *
                   cfg.corrector->q0_at(y.norm());
        }

        out(k) = mu * chain +
                 (dpot * ipow(mu, n - 2) - kap * ipow(mu, n - 1) * mu_dot) *
                     field -
                 ipow(mu, n) * src + corr;
    }
    return out;
}

// ============================================================
// envelope norms
// ============================================================

double NormParams::beta() const {
    return 0.5 * double(n - 2) / double(n - 4) + sigma / double(n - 4);
}

double NormParams::nu() const { return 1.0 + sigma / double(n - 2); }

double NormParams::cutoff_radius() const { return std::pow(t0, rho); }

void NormParams::validate() const {
    if (n < 5) throw std::invalid_argument("dimension must be >= 5");
    if (!(sigma > 0.0) || !(sigma < double(n - 4)))
        throw std::invalid_argument("sigma must lie in (0, n-4)");
    if (!(alpha > 2.0) || !(alpha <= 3.0))
        throw std::invalid_argument("alpha must lie in (2, 3]");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(varsigma > 0.0) || !(varsigma < 1.0))
        throw std::invalid_argument("varsigma must lie in (0, 1)");
    if (!(t0 > 1.0)) throw std::invalid_argument("t0 must exceed 1");
    if (!(rho > 0.0) || !(rho < 0.5))
        throw std::invalid_argument("rho must lie in (0, 0.5)");
}

namespace {

double envelope_at(EnvelopeKind kind, const NormParams& np, const ScalarFn& mu,
                   double delta, double y, double t) {
    switch (kind) {
        case EnvelopeKind::inner_tau:
            return std::pow(t, -np.nu()) / (1.0 + std::pow(y, 2.0 + np.alpha));
        case EnvelopeKind::inner_mu:
            return std::pow(mu(t), double(np.n - 2) + np.sigma) /
                   (1.0 + std::pow(y, np.alpha));
        case EnvelopeKind::outer_source:
            return std::pow(mu(t), -2.0) * std::pow(t, -np.gamma) /
                   (1.0 + std::pow(y, 2.0 + np.varsigma));
        case EnvelopeKind::outer_field:
            return std::pow(t, -np.beta()) / (1.0 + std::pow(y, np.alpha - 2.0));
        case EnvelopeKind::scale_power:
            return std::pow(mu(t), delta);
    }
    throw std::logic_error("unknown envelope kind");
}

bool envelope_needs_scale(EnvelopeKind kind) {
    return kind == EnvelopeKind::inner_mu || kind == EnvelopeKind::outer_source ||
           kind == EnvelopeKind::scale_power;
}

} // namespace

double weighted_norm(const std::vector<FieldSample>& samples, EnvelopeKind kind,
                     const NormParams& np, const ScalarFn& mu, double delta) {
    np.validate();
    if (samples.empty()) throw std::invalid_argument("no samples");
    if (envelope_needs_scale(kind) && !mu)
        throw std::invalid_argument("this envelope needs the scale history");
    double best = 0.0;
    for (const FieldSample& s : samples) {
        if (!(s.y >= 0.0)) throw std::invalid_argument("radii must be nonnegative");
        if (!(s.t > 0.0)) throw std::invalid_argument("times must be positive");
        const double env = envelope_at(kind, np, mu, delta, s.y, s.t);
        if (!(env > 0.0)) throw std::invalid_argument("degenerate envelope value");
        best = std::max(best, std::abs(s.value) / env);
    }
    return best;
}

DivergenceCheck norm_divergence(const std::vector<FieldSample>& samples,
                                double y_split, EnvelopeKind kind,
                                const NormParams& np, const ScalarFn& mu,
                                double delta) {
    std::vector<FieldSample> inner_set;
    for (const FieldSample& s : samples)
        if (s.y <= y_split) inner_set.push_back(s);
    if (inner_set.empty())
        throw std::invalid_argument("no samples inside the split radius");
    if (inner_set.size() == samples.size())
        throw std::invalid_argument("no samples outside the split radius");
    DivergenceCheck check;
    check.inner = weighted_norm(inner_set, kind, np, mu, delta);
    check.outer = weighted_norm(samples, kind, np, mu, delta);
    if (!(check.inner > 0.0))
        throw std::invalid_argument("inner window carries no signal");
    check.ratio = check.outer / check.inner;
    check.divergent = check.ratio > 2.0;
    return check;
}

// ============================================================
// demonstration run
// ============================================================

DemoResult run_blowup_demo(const DemoConfig& cfg) {
    if (cfg.n < 5) throw std::invalid_argument("dimension must be >= 5");
    if (!(cfg.radius > 0.0)) throw std::invalid_argument("radius must be positive");
    if (!(cfg.horizon > 1.0)) throw std::invalid_argument("horizon must exceed 1");
    if (cfg.cells < 50) throw std::invalid_argument("need at least 50 cells");
    if (!(cfg.mu_start > 0.0) || !(cfg.mu_start < cfg.radius))
        throw std::invalid_argument("starting scale must sit inside the ball");
    if (!(cfg.dt_safety > 0.0) || !(cfg.dt_safety <= 1.0))
        throw std::invalid_argument("dt_safety must lie in (0, 1]");
    if (cfg.record_every < 1) throw std::invalid_argument("record_every must be >= 1");
    if (cfg.bisect_iters < 0) throw std::invalid_argument("bisect_iters must be >= 0");
    if (cfg.bisect_iters > 0 &&
        (!(cfg.bisect_lo > 0.0) || !(cfg.bisect_hi > cfg.bisect_lo)))
        throw std::invalid_argument("bisection bracket must satisfy 0 < lo < hi");

    const DomainSpec dom = DomainSpec::ball(cfg.n, Vec::Zero(cfg.n), cfg.radius);
    const Vec q = Vec::Zero(cfg.n);
    const double coeff_d = 0.5 * double(cfg.n - 2) * Dims(cfg.n).alpha();
    const dynamics::BlowupConstants bc = dynamics::assemble_constants(
        cfg.n, coeff_d, regular_part_ball_diag(dom, q),
        grad_regular_part_ball(dom, q));
    const double t_start =
        std::pow(bc.b * bc.cn / cfg.mu_start, double(cfg.n - 4));
    const double tau_end = (cfg.horizon - 1.0) * t_start;

    const RadialGrid grid =
        RadialGrid::graded(cfg.n, cfg.radius, cfg.cells, cfg.mu_start);
    const double rate_coeff = double(cfg.n) * double(cfg.n + 2);
    const long max_steps = 2000000;

    // Marches one run at the given amplitude until it blows up, decays, or
    // reaches the horizon ("ran"). Recorded times are offset by t_start so
    // that the modeled scale law and the run share a time axis.
    auto march = [&](double amplitude,
                     std::vector<DemoSample>* series) -> std::string {
        RadialField state = bubble_state(grid, cfg.mu_start, amplitude);
        const double start_max = state.u.cwiseAbs().maxCoeff();
        double tau = 0.0;
        double last_mu = cfg.mu_start;
        long steps = 0;
        long last_recorded = -1;
        auto record = [&]() {
            if (!series) return;
            const MuFit fit = fit_mu(state);
            DemoSample sample;
            sample.t = t_start + tau;
            sample.mu = fit.valid ? fit.mu : 0.0;
            sample.energy = energy(state);
            sample.fit_valid = fit.valid;
            series->push_back(sample);
            last_recorded = steps;
        };
        record();
        StepOptions opt;
        opt.boundary = 0.0;
        opt.nonlinear = true;
        while (tau < tau_end && steps < max_steps) {
            const MuFit fit = fit_mu(state);
            if (fit.valid) last_mu = fit.mu;
            double dt = cfg.dt_safety * last_mu * last_mu / rate_coeff;
            dt = std::max(dt, 1e-9 * t_start);
            dt = std::min(dt, tau_end - tau);
            opt.dt = dt;
            StepInfo info;
            state = step(state, opt, &info);
            tau += dt;
            ++steps;
            if (info.overflow || info.max_abs > 20.0 * start_max) {
                record();
                return "blowup";
            }
            if (start_max > 0.0 && info.max_abs < 0.05 * start_max) {
                record();
                return "decay";
            }
            if (steps % cfg.record_every == 0) record();
        }
        if (last_recorded != steps) record();
        return "ran";
    };

    DemoResult res;
    res.t_start = t_start;
    double amplitude = cfg.amplitude;
    if (cfg.bisect_iters > 0) {
        double lo = cfg.bisect_lo;
        double hi = cfg.bisect_hi;
        if (march(lo, nullptr) == "blowup") {
            amplitude = lo;
        } else if (march(hi, nullptr) != "blowup") {
            amplitude = hi;
        } else {
            for (int it = 0; it < cfg.bisect_iters; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (march(mid, nullptr) == "blowup")
                    hi = mid;
                else
                    lo = mid;
            }
            amplitude = lo;
        }
    }
    res.amplitude = amplitude;
    res.outcome = march(amplitude, &res.series);

    // Fit the scale decay over the stretch where the fitted scale shrinks
    // monotonically at the gentle slow-law pace. The threshold instability
    // eventually wins and the scale either collapses or rebounds; both show
    // up as a jump in the step-to-step log-log slope and end the window.
    std::vector<double> ts;
    std::vector<double> mus;
    for (const DemoSample& s : res.series) {
        if (!s.fit_valid) continue;
        if (!mus.empty() && !(s.mu < mus.back())) break;
        ts.push_back(s.t);
        mus.push_back(s.mu);
    }
    if (ts.size() >= 6) {
        std::vector<double> rates(ts.size() - 1);
        for (size_t i = 0; i + 1 < ts.size(); ++i)
            rates[i] = (std::log(mus[i + 1]) - std::log(mus[i])) /
                       (std::log(ts[i + 1]) - std::log(ts[i]));
        std::vector<double> sorted = rates;
        std::sort(sorted.begin(), sorted.end(),
                  [](double a, double b) { return std::abs(a) < std::abs(b); });
        const double med = std::abs(sorted[sorted.size() / 2]);
        size_t cut = ts.size();
        for (size_t i = 0; i + 1 < ts.size(); ++i)
            if (std::abs(rates[i]) > 3.0 * med) {
                cut = i + 1;
                break;
            }
        ts.resize(cut);
        mus.resize(cut);
    }
    const size_t keep = ts.size() >= 10 ? ts.size() / 2 : 0;
    if (ts.size() - keep >= 5) {
        const std::vector<double> ts_late(ts.begin() + keep, ts.end());
        const std::vector<double> mus_late(mus.begin() + keep, mus.end());
        res.slope = quad::fit_loglog_slope(ts_late, mus_late);
        res.slope_valid = true;
    }
    return res;
}

} // namespace blowup::sim
