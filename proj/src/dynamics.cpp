#include "blowup/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "blowup/constants.hpp"
#include "blowup/numerics.hpp"
#include "blowup/profiles.hpp"

namespace blowup::dynamics {

namespace {

double gamma_exp(int n) { return double(n - 3) / double(n - 4); }

double scale_rate_coeff(const BlowupConstants& c) {
    return 2.0 * c.c1 / ((2.0 * c.c1 * c.A + c.c2) * double(c.n - 2));
}

std::vector<double> log_grid(double t0, double t1, int samples) {
    if (!(t1 > t0) || samples < 2)
        throw std::invalid_argument("log grid needs t1 > t0 and >= 2 samples");
    std::vector<double> ts(samples);
    double r = std::log(t1 / t0) / double(samples - 1);
    for (int i = 0; i < samples; ++i) ts[i] = t0 * std::exp(r * i);
    ts.front() = t0;
    ts.back() = t1;
    return ts;
}

}  // namespace

BlowupConstants assemble_constants(int n, double D, double H_qq,
                                   const Vec& gradH) {
    if (gradH.size() != n)
        throw std::invalid_argument("gradient size must match the dimension");
    BlowupConstants c;
    c.n = n;
    c.c1 = constants::c1_closed(n);
    c.c2 = constants::c2_closed(n);
    c.A = constants::const_A(n, D);
    c.cn = constants::const_cn(n, c.c1, c.c2, c.A);
    c.B = constants::const_B(n, c.A, c.cn);
    c.H_qq = H_qq;
    c.b = solve_b(H_qq, n);
    c.gradH = gradH;
    return c;
}

double solve_b(double H, int n) {
    if (!(H > 0.0))
        throw std::invalid_argument("Green diagonal must be positive");
    return std::pow(2.0 / (double(n - 2) * H), 1.0 / double(n - 4));
}

double solve_b_residual(double H, int n, double b) {
    return std::abs(H * std::pow(b, n - 3) - 2.0 * b / double(n - 2));
}

double mu0(double t, const BlowupConstants& c) {
    return c.cn * std::pow(t, -1.0 / double(c.n - 4));
}

double mu0_dot(double t, const BlowupConstants& c) {
    double e = -1.0 / double(c.n - 4);
    return c.cn * e * std::pow(t, e - 1.0);
}

double mu0_consistency(const BlowupConstants& c, double t0, int samples) {
    double k = scale_rate_coeff(c);
    double worst = 0.0;
    for (double t : log_grid(t0, 100.0 * t0, samples)) {
        double r = mu0_dot(t, c) + k * ipow(mu0(t, c), c.n - 3);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

ScalarFn lambda_solution(double d, ScalarFn h, double t0, int n) {
    if (n < 5) throw std::invalid_argument("dimension must be >= 5");
    if (!(t0 > 0.0)) throw std::invalid_argument("t0 must be positive");
    double g = gamma_exp(n);
    return [d, h = std::move(h), t0, g](double t) {
        if (!(t > 0.0)) throw std::invalid_argument("time must be positive");
        double acc = d;
        if (h && t != t0) {
            quad::Options opt;
            opt.rel_tol = 1e-12;
            auto f = [&](double s) { return std::pow(s, g) * h(s); };
            acc += (t > t0) ? quad::integrate(f, t0, t, opt)
                            : -quad::integrate(f, t, t0, opt);
        }
        return acc * std::pow(t, -g);
    };
}

VecFn xi_solution(VecFn h, const BlowupConstants& c, const Vec& q) {
    if (q.size() != c.n)
        throw std::invalid_argument("point size must match the dimension");
    double cl = constants::cl_translation_closed(c.n);
    double bpow = ipow(c.b, c.n - 2);
    Vec drift = cl * (-bpow) * c.gradH;
    double tail_coef =
        ipow(c.cn, c.n - 2) * double(c.n - 4) / 2.0;
    double tail_exp = -2.0 / double(c.n - 4);
    int n = c.n;
    return [h = std::move(h), q, drift, tail_coef, tail_exp, n](double t) {
        if (!(t > 0.0)) throw std::invalid_argument("time must be positive");
        Vec x = q + drift * (tail_coef * std::pow(t, tail_exp));
        if (h) {
            quad::Options opt;
            opt.rel_tol = 1e-12;
            for (int l = 0; l < n; ++l) {
                x(l) += quad::integrate_to_inf(
                    [&, l](double s) { return h(s)(l); }, t, t, opt);
            }
        }
        return x;
    };
}

ReducedForcings model_forcings(const BlowupConstants& c, double sigma,
                               double amplitude) {
    double cl = constants::cl_translation_closed(c.n);
    double bpow = ipow(c.b, c.n - 2);
    int n = c.n;
    ReducedForcings f;
    f.pi.resize(3 * n);
    f.pi[0] = [c, sigma, amplitude](double t) {
        return amplitude * std::pow(mu0(t, c), c.n - 3 + sigma);
    };
    for (int l = 1; l <= n; ++l) {
        double drift = cl * bpow * c.gradH(l - 1);
        f.pi[l] = [c, sigma, amplitude, drift, n](double t) {
            double m = mu0(t, c);
            return drift * ipow(m, c.n - 2) +
                   amplitude * std::pow(m, c.n - 2 + sigma) / std::sqrt(n);
        };
    }
    for (int row = n + 1; row < 3 * n; ++row) {
        f.pi[row] = [c, sigma, amplitude](double t) {
            return amplitude * std::pow(mu0(t, c), c.n - 3 + sigma);
        };
    }
    return f;
}

namespace {

// Right-hand sides of the transformed rows, each a pure function of time.
// Row 0 integrates w = t^g lambda, the other rows integrate their state
// directly.
struct RowRates {
    const BlowupConstants* c;
    const ReducedForcings* f;
    double g;

    Vec operator()(double t) const {
        int rows = int(f->pi.size());
        Vec r(rows);
        r(0) = std::pow(t, g) * f->pi[0](t);
        int n = c->n;
        for (int l = 1; l <= n; ++l) r(l) = f->pi[l](t);
        double inv_mu = 1.0 / mu0(t, *c);
        for (int row = n + 1; row < rows; ++row)
            r(row) = inv_mu * f->pi[row](t);
        return r;
    }
};

int locate_segment(const std::vector<double>& ts, double t) {
    if (ts.size() < 2 || t < ts.front() - 1e-12 * ts.front() ||
        t > ts.back() * (1.0 + 1e-12))
        throw std::invalid_argument("time outside the integrated span");
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    int k = int(it - ts.begin()) - 1;
    return std::clamp(k, 0, int(ts.size()) - 2);
}

double hermite(double t, double ta, double tb, double ya, double yb,
               double fa, double fb) {
    double h = tb - ta;
    double s = (t - ta) / h;
    double s2 = s * s;
    double s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * ya + (s3 - 2.0 * s2 + s) * h * fa +
           (-2.0 * s3 + 3.0 * s2) * yb + (s3 - s2) * h * fb;
}

}  // namespace

double ParamTrajectory::state(int row, double t) const {
    if (row < 0 || row >= 3 * n)
        throw std::invalid_argument("row index out of range");
    int k = locate_segment(times, t);
    return hermite(t, times[k], times[k + 1], states[k](row),
                   states[k + 1](row), rates[k](row), rates[k + 1](row));
}

double ParamTrajectory::rate(int row, double t) const {
    if (row < 0 || row >= 3 * n)
        throw std::invalid_argument("row index out of range");
    double pi = forcing[row] ? forcing[row](t) : 0.0;
    if (row == 0)
        return pi - gamma_exp(n) / t * state(0, t);
    if (row <= n) return pi;
    return pi / mu0(t, consts);
}

double ParamTrajectory::lambda(double t) const { return state(0, t); }
double ParamTrajectory::lambda_dot(double t) const { return rate(0, t); }

Vec ParamTrajectory::xi_drift(double t) const {
    Vec v(n);
    for (int l = 0; l < n; ++l) v(l) = state(1 + l, t);
    return v;
}

Vec ParamTrajectory::xi_drift_dot(double t) const {
    Vec v(n);
    for (int l = 0; l < n; ++l) v(l) = rate(1 + l, t);
    return v;
}

Vec ParamTrajectory::a(double t) const {
    Vec v(2);
    v(0) = state(n + 2, t);
    v(1) = state(n + 3, t);
    return v;
}

Vec ParamTrajectory::a_dot(double t) const {
    Vec v(2);
    v(0) = rate(n + 2, t);
    v(1) = rate(n + 3, t);
    return v;
}

namespace {

std::vector<int> theta_rows(int n) {
    std::vector<int> rows;
    rows.push_back(n + 1);
    for (int r = n + 4; r < 3 * n; ++r) rows.push_back(r);
    return rows;
}

}  // namespace

Vec ParamTrajectory::theta(double t) const {
    auto rows = theta_rows(n);
    Vec v(int(rows.size()));
    for (int i = 0; i < v.size(); ++i) v(i) = state(rows[i], t);
    return v;
}

Vec ParamTrajectory::theta_dot(double t) const {
    auto rows = theta_rows(n);
    Vec v(int(rows.size()));
    for (int i = 0; i < v.size(); ++i) v(i) = rate(rows[i], t);
    return v;
}

ParamTrajectory integrate_reduced_system(const BlowupConstants& c,
                                         const ReducedForcings& f, double t0,
                                         double t1,
                                         const IntegrateOptions& opt) {
    int rows = 3 * c.n;
    if (int(f.pi.size()) != rows)
        throw std::invalid_argument("forcing count must equal 3n");
    for (const auto& p : f.pi)
        if (!p) throw std::invalid_argument("every row needs a forcing");
    if (!(t0 > 0.0) || !(t1 > t0))
        throw std::invalid_argument("need 0 < t0 < t1");

    double g = gamma_exp(c.n);
    RowRates rhs{&c, &f, g};

    ParamTrajectory traj;
    traj.n = c.n;
    traj.t0 = t0;
    traj.t1 = t1;
    traj.forcing = f.pi;
    traj.consts = c;

    auto untransform = [&](double t, const Vec& w) {
        Vec y = w;
        y(0) = w(0) * std::pow(t, -g);
        return y;
    };
    auto node_rate = [&](double t, const Vec& y, const Vec& fw) {
        Vec r = fw;
        r(0) = fw(0) * std::pow(t, -g) - g / t * y(0);
        return r;
    };

    double t = t0;
    Vec w = Vec::Zero(rows);
    Vec fw = rhs(t);
    traj.times.push_back(t);
    traj.states.push_back(untransform(t, w));
    traj.rates.push_back(node_rate(t, traj.states.back(), fw));

    double h = std::min(opt.first_step, (t1 - t0) / 4.0);
    int steps = 0;
    while (t < t1) {
        if (++steps > opt.max_steps) {
            std::ostringstream msg;
            msg << "reduced system integration exceeded " << opt.max_steps
                << " steps at t = " << t;
            throw std::runtime_error(msg.str());
        }
        h = std::min(h, t1 - t);
        if (h <= 16.0 * std::numeric_limits<double>::epsilon() * t) {
            std::ostringstream msg;
            msg << "reduced system step size collapsed at t = " << t;
            throw std::runtime_error(msg.str());
        }

        double tm = t + 0.5 * h;
        double tn = t + h;
        Vec fm = rhs(tm);
        Vec fn = rhs(tn);
        Vec full = w + 0.5 * h * (fw + fn);
        Vec halves = w + 0.25 * h * (fw + 2.0 * fm + fn);
        double err = 0.0;
        for (int i = 0; i < rows; ++i) {
            double sc = opt.abs_tol +
                        opt.rel_tol * std::max(std::abs(w(i)),
                                               std::abs(halves(i)));
            err = std::max(err, std::abs(halves(i) - full(i)) / (3.0 * sc));
        }
        if (err <= 1.0) {
            w = halves + (halves - full) / 3.0;
            t = tn;
            fw = fn;
            traj.times.push_back(t);
            traj.states.push_back(untransform(t, w));
            traj.rates.push_back(node_rate(t, traj.states.back(), fw));
            h *= std::min(4.0, 0.9 * std::pow(std::max(err, 1e-12), -1.0 / 3.0));
        } else {
            h *= std::max(0.1, 0.9 * std::pow(err, -1.0 / 3.0));
        }
    }
    return traj;
}

double weighted_norm(const ScalarFn& h, double delta,
                     const BlowupConstants& c, double t0, double t1,
                     int samples) {
    double worst = 0.0;
    for (double t : log_grid(t0, t1, samples))
        worst = std::max(worst, std::abs(h(t)) / std::pow(mu0(t, c), delta));
    return worst;
}

TrajectoryNorms trajectory_norms(const ParamTrajectory& traj,
                                 const BlowupConstants& c, int samples) {
    int n = traj.n;
    double sigma = traj.sigma;
    TrajectoryNorms out;
    auto rows_theta = theta_rows(n);
    for (double t : log_grid(traj.t0, traj.t1, samples)) {
        double m = mu0(t, c);
        auto w = [&](double v, double delta) {
            return std::abs(v) / std::pow(m, delta);
        };
        out.lambda_dot = std::max(out.lambda_dot,
                                  w(traj.rate(0, t), n - 3 + sigma));
        out.lambda = std::max(out.lambda, w(traj.state(0, t), 1 + sigma));
        for (int l = 1; l <= n; ++l) {
            out.xi_dot = std::max(out.xi_dot, w(traj.rate(l, t), n - 3 + sigma));
            out.xi_drift = std::max(out.xi_drift,
                                    w(traj.state(l, t), 1 + sigma));
        }
        for (int r : {n + 2, n + 3}) {
            out.a_dot = std::max(out.a_dot, w(traj.rate(r, t), n - 4 + sigma));
            out.a = std::max(out.a, w(traj.state(r, t), sigma));
        }
        for (int r : rows_theta) {
            out.theta_dot = std::max(out.theta_dot,
                                     w(traj.rate(r, t), n - 4 + sigma));
            out.theta = std::max(out.theta, w(traj.state(r, t), sigma));
        }
    }
    return out;
}

}  // namespace blowup::dynamics
