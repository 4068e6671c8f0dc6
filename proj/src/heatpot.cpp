#include "blowup/heatpot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "blowup/numerics.hpp"
#include "blowup/profiles.hpp"

namespace blowup::heatpot {

// ============================================================
// angular kernels
// ============================================================

namespace {

// exp(-kappa) I_nu(kappa) for integer nu: positive-term series at small
// kappa, std::cyl_bessel_i in the mid range, large-argument expansion
// beyond the overflow threshold of the unscaled Bessel function.
double scaled_bessel_i(int nu, double kappa) {
    if (kappa < 10.0) {
        const double q = 0.25 * kappa * kappa;
        double term = 1.0;
        double sum = 1.0;
        for (int m = 1; m <= 40; ++m) {
            term *= q / (double(m) * double(m + nu));
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        double lead = std::exp(-kappa + nu * std::log(0.5 * kappa) -
                               std::lgamma(double(nu) + 1.0));
        return lead * sum;
    }
    if (kappa <= 600.0) return std::exp(-kappa) * std::cyl_bessel_i(double(nu), kappa);
    const double mu4 = 4.0 * double(nu) * double(nu);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 4; ++k) {
        term *= -(mu4 - double((2 * k - 1) * (2 * k - 1))) / (8.0 * kappa * double(k));
        sum += term;
    }
    return sum / std::sqrt(2.0 * M_PI * kappa);
}

// n = 5 kernels are elementary in exp(-2 kappa); below the crossover the
// direct form loses digits to cancellation, so a power series with exact
// rational coefficients takes over.
double m0_five(double kappa) {
    if (kappa < 1.0) {
        double sum = 0.0;
        double pw = 4.0;     // (-2)^j
        double factj = 2.0;  // j!
        double kpow = 1.0;   // kappa^{j-2}
        for (int j = 2; j <= 30; ++j) {
            if (j > 2) {
                pw *= -2.0;
                factj *= double(j);
                kpow *= kappa;
            }
            sum += pw * (0.5 / factj - 1.0 / (factj * double(j + 1))) * kpow;
        }
        return 4.0 * sum;
    }
    const double e = std::exp(-2.0 * kappa);
    const double a = 0.5 * (1.0 + e);
    const double bt = (1.0 - e) / (2.0 * kappa);
    return 4.0 * (a - bt) / (kappa * kappa);
}

double m1_five(double kappa) {
    if (kappa < 1.0) {
        double sum = 0.0;
        double pw = 16.0;    // (-2)^j
        double fjm1 = 6.0;   // (j-1)!
        double fj = 24.0;    // j!
        double fj1 = 120.0;  // (j+1)!
        double kpow = kappa; // kappa^{j-3}
        for (int j = 4; j <= 32; ++j) {
            if (j > 4) {
                pw *= -2.0;
                fjm1 *= double(j - 1);
                fj *= double(j);
                fj1 *= double(j + 1);
                kpow *= kappa;
            }
            sum += pw * (0.25 / fjm1 + 3.0 / fj1 - 1.5 / fj) * kpow;
        }
        return 4.0 * sum;
    }
    const double e = std::exp(-2.0 * kappa);
    const double a = 0.5 * (1.0 + e);
    const double bt = (1.0 - e) / (2.0 * kappa);
    return 4.0 * ((kappa * kappa + 3.0) * bt - 3.0 * a) / (kappa * kappa * kappa);
}

void check_kernel_args(int n, double kappa) {
    if (!(kappa >= 0.0)) throw std::invalid_argument("heat kernel: kappa must be >= 0");
    if (n != 5 && n != 6)
        throw std::invalid_argument("heat kernel reductions cover n in {5, 6}");
}

} // namespace

double m0_kernel(int n, double kappa) {
    check_kernel_args(n, kappa);
    if (n == 5) return m0_five(kappa);
    if (kappa < 1e-6)
        return 0.375 * M_PI * std::exp(-kappa) * (1.0 + kappa * kappa / 12.0);
    return 3.0 * M_PI / (kappa * kappa) * scaled_bessel_i(2, kappa);
}

double m1_kernel(int n, double kappa) {
    check_kernel_args(n, kappa);
    if (n == 5) return m1_five(kappa);
    if (kappa < 1e-6)
        return 0.0625 * M_PI * kappa * std::exp(-kappa) * (1.0 + kappa * kappa / 16.0);
    return 3.0 * M_PI / (kappa * kappa) * scaled_bessel_i(3, kappa);
}

// ============================================================
// radial convolution
// ============================================================

double conv_radial(int n, int m, double R, double tau,
                   const std::function<double(double)>& profile, double scale,
                   double rel_tol) {
    if (m != 0 && m != 1) throw std::invalid_argument("conv_radial: m must be 0 or 1");
    if (!(tau > 0.0) || !(scale > 0.0) || !(R >= 0.0))
        throw std::invalid_argument("conv_radial: need tau > 0, scale > 0, R >= 0");
    const double sig = std::sqrt(tau);
    const double lo = std::max(0.0, R - 16.0 * sig);
    const double hi = R + 16.0 * sig;
    const double pref = std::pow(4.0 * M_PI * tau, -0.5 * n) * sphere_area(n - 1);
    auto kern = [&](double r) {
        double kappa = 0.5 * R * r / tau;
        double mm = (m == 0) ? m0_kernel(n, kappa) : m1_kernel(n, kappa);
        double dr = R - r;
        return pref * ipow(r, n - 1) * profile(r / scale) *
               std::exp(-0.25 * dr * dr / tau) * mm;
    };
    double fsup = 0.0;
    for (double r : {lo, 0.5 * (lo + hi), hi, std::clamp(scale, lo, hi), std::clamp(R, lo, hi)})
        fsup = std::max(fsup, std::abs(profile(r / scale)));
    quad::Options opt;
    opt.rel_tol = rel_tol;
    // the convolution is bounded by the profile sup times the unit heat mass
    opt.abs_tol = 0.25 * rel_tol * fsup;
    opt.max_panels = 800;
    opt.breakpoints = quad::geometric_breaks(lo, hi, scale);
    for (double b : {0.25 * scale, 0.5 * scale, R - 4.0 * sig, R - sig, R + sig, R + 4.0 * sig})
        opt.breakpoints.push_back(b);
    return quad::integrate(kern, lo, hi, opt);
}

// ============================================================
// Duhamel integration
// ============================================================

namespace {

// Edges in u = sqrt(t - s): geometric refinement toward u = 0 where the
// heat kernel concentrates on the scale mu(t), and toward u = sqrt(t - t0)
// where the source coefficient still varies on the scale of t0 itself.
std::vector<double> graded_u_edges(double mu_t, double t0, double t, int refine) {
    const double DT = t - t0;
    const double U = std::sqrt(DT);
    std::vector<double> edges{0.0, U};
    for (double u = std::max(mu_t, 1e-9 * U); u < 0.25 * U; u *= 2.0) edges.push_back(u);
    for (double d = 0.5 * DT; d > 0.45 * t0; d *= 0.5) {
        double u = std::sqrt(DT - d);
        if (u > 0.0 && u < U) edges.push_back(u);
    }
    std::sort(edges.begin(), edges.end());
    std::vector<double> uniq;
    for (double e : edges)
        if (uniq.empty() || e - uniq.back() > 1e-12 * U) uniq.push_back(e);
    uniq.back() = U;
    for (int level = 1; level < refine; ++level) {
        std::vector<double> fine;
        fine.reserve(uniq.size() * 2);
        for (size_t i = 0; i + 1 < uniq.size(); ++i) {
            fine.push_back(uniq[i]);
            fine.push_back(0.5 * (uniq[i] + uniq[i + 1]));
        }
        fine.push_back(uniq.back());
        uniq.swap(fine);
    }
    return uniq;
}

struct SourceSetup {
    int m = 0;
    std::function<double(double)> profile;
    std::function<double(double)> coef;
    std::function<Vec(double)> axis;
};

SourceSetup make_setup(const HeatPotentialSpec& spec, SourceKind kind, int i) {
    const int n = spec.n;
    SourceSetup S;
    switch (kind) {
    case SourceKind::dilation:
        S.m = 0;
        S.profile = [n](double rho) { return farfield_g(n, rho); };
        S.coef = [&spec, n](double s) {
            double mu = spec.traj.mu(s);
            return -(spec.traj.mu_dot(s) / mu) * ipow(1.0 / mu, n - 2) * spec.D;
        };
        break;
    case SourceKind::translation:
        S.m = 1;
        S.profile = [n](double rho) { return rho * pow_half(1.0 + rho * rho, -n); };
        S.coef = [&spec, n](double s) {
            double mu = spec.traj.mu(s);
            double v = spec.traj.xi_dot(s).norm();
            return v == 0.0 ? 0.0 : -spec.E * ipow(1.0 / mu, n - 2) * v / mu;
        };
        S.axis = [&spec](double s) {
            Vec v = spec.traj.xi_dot(s);
            return Vec(v / v.norm());
        };
        break;
    case SourceKind::kelvin: {
        if (i != 1 && i != 2)
            throw std::invalid_argument("inversion component must be 1 or 2");
        const double D = spec.D;
        const double E = spec.E;
        S.m = 1;
        S.profile = [n, D, E](double rho) {
            double r2 = rho * rho;
            return rho * (E * r2 + 2.0 * D * (2.0 - r2)) * pow_half(1.0 + r2, -n);
        };
        S.coef = [&spec, n, i](double s) {
            double mu = spec.traj.mu(s);
            return -spec.traj.a_dot(s)(i - 1) * ipow(1.0 / mu, n - 2);
        };
        S.axis = [&spec, i](double) { return Vec(Vec::Unit(spec.n, i - 1)); };
        break;
    }
    }
    return S;
}

double duhamel(const HeatPotentialSpec& spec, const Vec& x, double t,
               const SourceSetup& S, double u_lo) {
    if (!(spec.t0 > 0.0)) throw std::invalid_argument("heat potential: t0 must be > 0");
    if (!(t > spec.t0)) return 0.0;
    const double U = std::sqrt(t - spec.t0);
    if (u_lo >= U) return 0.0;
    std::vector<double> edges = graded_u_edges(spec.traj.mu(t), spec.t0, t, spec.time_refine);
    if (u_lo > 0.0) {
        std::vector<double> cut{u_lo};
        for (double e : edges)
            if (e > u_lo * (1.0 + 1e-12)) cut.push_back(e);
        edges.swap(cut);
    }
    auto f = [&](double u) {
        double s = std::max(t - u * u, spec.t0);
        double c = S.coef(s);
        if (c == 0.0) return 0.0;
        Vec dx = x - spec.traj.xi(s);
        double R = dx.norm();
        double dir = 1.0;
        if (S.m == 1) {
            if (R < 1e-300) return 0.0;
            dir = dx.dot(S.axis(s)) / R;
            if (dir == 0.0) return 0.0;
        }
        double I = conv_radial(spec.n, S.m, R, u * u, S.profile, spec.traj.mu(s),
                               spec.rel_tol);
        return 2.0 * u * c * dir * I;
    };
    double total = 0.0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        double val = 0.0;
        double err = 0.0;
        quad::detail::g7k15_panel(f, edges[i], edges[i + 1], val, err);
        total += val;
    }
    return total;
}

} // namespace

// ============================================================
// public evaluators
// ============================================================

SourceTrajectory self_similar_trajectory(int n, double b, double cn, Vec q) {
    if (!(b > 0.0) || !(cn > 0.0))
        throw std::invalid_argument("self_similar_trajectory: b and cn must be > 0");
    if (q.size() != n)
        throw std::invalid_argument("self_similar_trajectory: center has wrong dimension");
    const double beta = 1.0 / double(n - 4);
    const double sig = b * cn;
    SourceTrajectory T;
    T.mu = [sig, beta](double t) { return sig * std::pow(t, -beta); };
    T.mu_dot = [sig, beta](double t) { return -beta * sig * std::pow(t, -beta - 1.0); };
    T.xi = [q](double) { return q; };
    T.xi_dot = [n](double) { return Vec(Vec::Zero(n)); };
    T.a_dot = [](double) { return Eigen::Vector2d(0.0, 0.0); };
    return T;
}

double source_value(const HeatPotentialSpec& spec, SourceKind kind, int i,
                    const Vec& x, double t) {
    const int n = spec.n;
    const double mu = spec.traj.mu(t);
    Vec yh = (x - spec.traj.xi(t)) / mu;
    const double r2 = yh.squaredNorm();
    const double w = pow_half(1.0 + r2, -n);
    const double amp = ipow(1.0 / mu, n - 2);
    switch (kind) {
    case SourceKind::dilation:
        return -(spec.traj.mu_dot(t) / mu) * amp * spec.D * (2.0 - r2) * w;
    case SourceKind::translation:
        return -spec.E * amp * (spec.traj.xi_dot(t).dot(yh) / mu) * w;
    case SourceKind::kelvin:
        if (i != 1 && i != 2)
            throw std::invalid_argument("inversion component must be 1 or 2");
        return -spec.traj.a_dot(t)(i - 1) * amp * yh(i - 1) *
               (spec.E * r2 + 2.0 * spec.D * (2.0 - r2)) * w;
    }
    throw std::invalid_argument("unknown source kind");
}

double phi0(const HeatPotentialSpec& spec, const Vec& x, double t) {
    return duhamel(spec, x, t, make_setup(spec, SourceKind::dilation, 0), 0.0);
}

double phi1(const HeatPotentialSpec& spec, const Vec& x, double t) {
    return duhamel(spec, x, t, make_setup(spec, SourceKind::translation, 0), 0.0);
}

double phi2i(const HeatPotentialSpec& spec, int i, const Vec& x, double t) {
    return duhamel(spec, x, t, make_setup(spec, SourceKind::kelvin, i), 0.0);
}

double phi0_far_part(const HeatPotentialSpec& spec, const Vec& x, double t,
                     double delta) {
    if (delta <= 0.0) return phi0(spec, x, t);
    return duhamel(spec, x, t, make_setup(spec, SourceKind::dilation, 0),
                   std::sqrt(delta));
}

// ============================================================
// diagnostics
// ============================================================

namespace {

double eval_kind(const HeatPotentialSpec& spec, SourceKind kind, int i,
                 const Vec& x, double t) {
    switch (kind) {
    case SourceKind::dilation: return phi0(spec, x, t);
    case SourceKind::translation: return phi1(spec, x, t);
    case SourceKind::kelvin: return phi2i(spec, i, x, t);
    }
    throw std::invalid_argument("unknown source kind");
}

} // namespace

double residual_check(const HeatPotentialSpec& spec, SourceKind kind, int i,
                      const std::vector<std::pair<double, double>>& samples) {
    SourceSetup S = make_setup(spec, kind, i);
    const int n = spec.n;
    double worst = 0.0;
    for (const auto& [R, t] : samples) {
        if (!(R > 0.0)) throw std::invalid_argument("residual samples need R > 0");
        const double ht = 1e-3 * t;
        if (t - 2.0 * ht <= spec.t0)
            throw std::invalid_argument("residual samples must sit above t0");
        const double mu = spec.traj.mu(t);
        Vec e = (S.m == 1) ? S.axis(t) : Vec(Vec::Unit(n, 0));
        Vec q = spec.traj.xi(t);
        auto at = [&](double r, double tt) {
            return eval_kind(spec, kind, i, Vec(q + r * e), tt);
        };
        const double f0 = at(R, t);
        const double phi_t = (at(R, t - 2.0 * ht) - 8.0 * at(R, t - ht) +
                              8.0 * at(R, t + ht) - at(R, t + 2.0 * ht)) /
                             (12.0 * ht);
        const double hr = std::min(0.05 * std::max(R, mu), R / 3.0);
        const double fm2 = at(R - 2.0 * hr, t);
        const double fm1 = at(R - hr, t);
        const double fp1 = at(R + hr, t);
        const double fp2 = at(R + 2.0 * hr, t);
        const double d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * hr);
        const double d2 =
            (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * hr * hr);
        double lap = d2 + double(n - 1) / R * d1;
        if (S.m == 1) lap -= double(n - 1) / (R * R) * f0;
        const double src = source_value(spec, kind, i, Vec(q + R * e), t);
        const double resid = -phi_t + lap + src;
        double scale = 0.0;
        for (double rho : {0.5, 1.0, 2.0})
            scale = std::max(scale,
                             std::abs(source_value(spec, kind, i, Vec(q + rho * mu * e), t)));
        worst = std::max(worst, scale > 0.0 ? std::abs(resid) / scale : std::abs(resid));
    }
    return worst;
}

DecayFit decay_profile_check(const HeatPotentialSpec& spec, SourceKind kind,
                             int i, double t) {
    SourceSetup S = make_setup(spec, kind, i);
    const double mu = spec.traj.mu(t);
    Vec q = spec.traj.xi(t);
    Vec e = (S.m == 1) ? S.axis(t) : Vec(Vec::Unit(spec.n, 0));
    const int npts = 12;
    std::vector<double> ls, vs;
    for (int j = 0; j < npts; ++j) {
        double yabs = 5.0 * std::pow(10.0, double(j) / double(npts - 1));
        double v = eval_kind(spec, kind, i, Vec(q + yabs * mu * e), t);
        if (v == 0.0) continue;
        ls.push_back(std::log(1.0 + yabs));
        vs.push_back(std::log(std::abs(v)));
    }
    if (ls.size() < 5)
        throw std::runtime_error("decay fit: potential vanishes on the sample ray");
    std::vector<std::function<double(double)>> basis{
        [](double) { return 1.0; }, [](double x) { return x; }};
    Eigen::VectorXd c = quad::lsq_fit(ls, vs, basis);
    return DecayFit{c(1), std::exp(c(0))};
}

} // namespace blowup::heatpot
