#include "blowup/constants.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "blowup/numerics.hpp"

namespace blowup::constants {

// ============================================================
// closed forms
// ============================================================

double J_n_closed(int n) {
    return 0.5 * (beta_fn(0.5 * n + 1.0, 0.5 * n - 1.0) - beta_fn(0.5 * n, 0.5 * n));
}

double K_n_closed(int n) {
    return 0.5 * (beta_fn(0.5 * n, 0.5 * n) - 2.0 * beta_fn(0.5 * n + 1.0, 0.5 * n - 1.0) +
                  beta_fn(0.5 * n + 2.0, 0.5 * n - 2.0));
}

double int_Up_closed(int n) {
    Dims d(n);
    return d.alpha_p() * d.omega() / double(n);
}

double int_z0_sq_closed(int n) {
    Dims d(n);
    double c = 0.5 * (n - 2) * d.alpha();
    return c * c * d.omega() * K_n_closed(n);
}

double int_z1_sq_closed(int n) {
    Dims d(n);
    double c = double(n - 2) * d.alpha();
    return c * c * (d.omega() / double(n)) * 0.5 *
           beta_fn(0.5 * n + 1.0, 0.5 * n - 1.0);
}

double c1_closed(int n) { return 0.5 * (n - 2) * int_Up_closed(n); }

double c2_closed(int n) {
    Dims d(n);
    double c = 0.5 * (n - 2) * d.alpha();
    return c * c * d.omega() * J_n_closed(n);
}

double cl_translation_closed(int n) {
    return int_Up_closed(n) / int_z1_sq_closed(n);
}

// ============================================================
// quadrature checks and pipeline constants
// ============================================================

GammaIdentity gamma_identity(int n, double rel_tol) {
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.breakpoints = {1.0, 4.0};
    GammaIdentity out;
    out.lhs = quad::integrate_to_inf(
        [n](double r) {
            double r2 = r * r;
            return (r2 - 1.0) * pow_half(1.0 + r2, -2 * n) * ipow(r, n - 1);
        },
        0.0, 1.0, opt);
    out.rhs = std::sqrt(M_PI) * std::pow(2.0, -n) *
              std::exp(std::lgamma(0.5 * n - 1.0) - std::lgamma(0.5 * (n + 1.0)));
    return out;
}

namespace {

// Reduced kernel vector at the representative point
// y = (w cos phi, w sin phi, rho, 0, ...): the six plane-symmetric scalar
// kernels, the shared radial factor of the out-of-plane translations, and
// the shared factors of the two out-of-plane rotation families.
constexpr int RK = 9;
constexpr std::array<double, RK> kReflectionSign = {1, 1, -1, -1, 1, -1, 1, 1, -1};

double reduced_kernels(const Profile& P, double w, double phi, double rho,
                       double* S) {
    const int n = P.n;
    double y[16] = {0};
    double g[16] = {0};
    const double c = std::cos(phi), s = std::sin(phi);
    y[0] = w * c;
    y[1] = w * s;
    y[2] = rho;
    double q;
    eval_value_grad(P, y, &q, g);
    const double r2 = w * w + rho * rho;
    const double ydotg = y[0] * g[0] + y[1] * g[1] + rho * g[2];
    const double a0 = 0.5 * (n - 2) * q + ydotg;
    S[0] = a0;
    S[1] = g[0];
    S[2] = g[1];
    S[3] = y[0] * g[1] - y[1] * g[0];
    S[4] = -2.0 * y[0] * a0 + r2 * g[0];
    S[5] = -2.0 * y[1] * a0 + r2 * g[1];
    S[6] = g[2];
    S[7] = y[0] * g[2] - rho * g[0];
    S[8] = y[1] * g[2] - rho * g[1];
    return q;
}

constexpr int NPROD = RK * (RK + 1) / 2;
using ProdVec = Eigen::Matrix<double, NPROD, 1>;

int tri_index(int i, int j) {  // i <= j
    return i * RK - i * (i - 1) / 2 + (j - i);
}

// Nested adaptive integration of f(w, phi, rho) * measure over
// phi in [phi_lo, phi_hi], w and rho in [0, inf).
template <class T, class F>
T sector_integral(const F& f, double phi_lo, double phi_hi,
                  const std::vector<double>& w_breaks,
                  const std::vector<double>& rho_breaks, double rel_tol) {
    auto over_w = [&](double phi, double rho) {
        quad::Options o;
        o.rel_tol = std::max(0.02 * rel_tol, 1e-12);
        o.max_panels = 1500;
        o.breakpoints = w_breaks;
        return quad::adaptive_to_inf<T>(
            [&](double w) { return f(w, phi, rho); }, 0.0, 1.5, o);
    };
    auto over_rho = [&](double phi) {
        quad::Options o;
        o.rel_tol = std::max(0.1 * rel_tol, 1e-11);
        o.max_panels = 1000;
        o.breakpoints = rho_breaks;
        return quad::adaptive_to_inf<T>(
            [&](double rho) { return over_w(phi, rho); }, 0.0, 1.5, o);
    };
    quad::Options o;
    o.rel_tol = rel_tol;
    o.max_panels = 400;
    return quad::adaptive<T>(over_rho, phi_lo, phi_hi, o);
}

std::vector<double> ring_breaks(const Profile& P) {
    if (P.is_bubble()) return {1.0, 4.0};
    double ring = std::sqrt(1.0 - P.zeta * P.zeta);
    double z = P.zeta;
    return {ring - 4.0 * z, ring - z, ring, ring + z, ring + 4.0 * z, 2.0, 6.0};
}

std::vector<double> polar_breaks(const Profile& P) {
    if (P.is_bubble()) return {1.0, 4.0};
    double z = P.zeta;
    return {z, 4.0 * z, 0.5, 2.0, 6.0};
}

struct KClass {
    bool scalar;
    int slot;  // index into the reduced vector
    int comp;  // out-of-plane component for vector kernels
};

KClass classify(int n, int idx) {
    if (idx == 0) return {true, 0, 0};
    if (idx == 1) return {true, 1, 0};
    if (idx == 2) return {true, 2, 0};
    if (idx >= 3 && idx <= n) return {false, 6, idx - 3};
    if (idx == n + 1) return {true, 3, 0};
    if (idx == n + 2) return {true, 4, 0};
    if (idx == n + 3) return {true, 5, 0};
    if (idx <= 2 * n + 1) return {false, 7, idx - (n + 4)};
    return {false, 8, idx - (2 * n + 2)};
}

// Expands the 9 x 9 reduced pairings to the 3n x 3n Gram block using the
// exact sphere moments of the out-of-plane direction: odd moments vanish
// and the quadratic moment is 1/(n-2) per component.
Mat expand_reduced(const Eigen::Matrix<double, RK, RK>& S9, int n) {
    Mat G = Mat::Zero(3 * n, 3 * n);
    for (int a = 0; a < 3 * n; ++a) {
        KClass ka = classify(n, a);
        for (int b = a; b < 3 * n; ++b) {
            KClass kb = classify(n, b);
            double v = 0.0;
            if (ka.scalar && kb.scalar)
                v = S9(ka.slot, kb.slot);
            else if (!ka.scalar && !kb.scalar && ka.comp == kb.comp)
                v = S9(ka.slot, kb.slot) / double(n - 2);
            G(a, b) = v;
            G(b, a) = v;
        }
    }
    return G;
}

Eigen::Matrix<double, RK, RK> products_to_matrix(const ProdVec& H) {
    Eigen::Matrix<double, RK, RK> S9;
    for (int i = 0; i < RK; ++i)
        for (int j = i; j < RK; ++j) {
            S9(i, j) = H[tri_index(i, j)];
            S9(j, i) = S9(i, j);
        }
    return S9;
}

Mat rep_rotation(int n, double beta) {
    Mat T = Mat::Identity(3 * n, 3 * n);
    const double c = std::cos(beta), s = std::sin(beta);
    auto put2 = [&](int i, int j) {
        T(i, i) = c;
        T(i, j) = -s;
        T(j, i) = s;
        T(j, j) = c;
    };
    put2(1, 2);
    put2(n + 2, n + 3);
    for (int i = 0; i + 3 <= n; ++i) put2(n + 4 + i, 2 * n + 2 + i);
    return T;
}

} // namespace

Mat gram_matrix(const Profile& P, double rel_tol) {
    const int n = P.n;
    const int k_eff = P.is_bubble() ? 1 : P.k;
    const double vol = sphere_area(n - 2);

    auto f = [&](double w, double phi, double rho) {
        double S[RK];
        reduced_kernels(P, w, phi, rho, S);
        const double m = vol * ipow(rho, n - 3) * w;
        ProdVec out;
        int idx = 0;
        for (int i = 0; i < RK; ++i)
            for (int j = i; j < RK; ++j) out[idx++] = m * S[i] * S[j];
        return out;
    };

    ProdVec H = sector_integral<ProdVec>(f, 0.0, M_PI / k_eff, ring_breaks(P),
                                         polar_breaks(P), rel_tol);

    Eigen::Matrix<double, RK, RK> S9 = products_to_matrix(H);
    for (int i = 0; i < RK; ++i)
        for (int j = 0; j < RK; ++j)
            S9(i, j) *= 1.0 + kReflectionSign[i] * kReflectionSign[j];

    Mat S0 = expand_reduced(S9, n);
    Mat G = Mat::Zero(3 * n, 3 * n);
    for (int j = 0; j < k_eff; ++j) {
        Mat T = rep_rotation(n, 2.0 * M_PI * j / k_eff);
        G += T * S0 * T.transpose();
    }
    return G;
}

Mat gram_matrix_direct(const Profile& P, double rel_tol) {
    const int n = P.n;
    const double vol = sphere_area(n - 2);
    auto f = [&](double w, double phi, double rho) {
        double S[RK];
        reduced_kernels(P, w, phi, rho, S);
        const double m = vol * ipow(rho, n - 3) * w;
        ProdVec out;
        int idx = 0;
        for (int i = 0; i < RK; ++i)
            for (int j = i; j < RK; ++j) out[idx++] = m * S[i] * S[j];
        return out;
    };
    ProdVec H = sector_integral<ProdVec>(f, 0.0, 2.0 * M_PI, ring_breaks(P),
                                         polar_breaks(P), rel_tol);
    return expand_reduced(products_to_matrix(H), n);
}

double const_c1(const Profile& P, double rel_tol) {
    const int n = P.n;
    const double p = Dims(n).p();
    if (P.is_bubble()) {
        const double omega = Dims(n).omega();
        quad::Options opt;
        opt.rel_tol = rel_tol;
        opt.breakpoints = {1.0, 4.0};
        return quad::integrate_to_inf(
            [&](double r) {
                double r2 = r * r;
                double dpot = Dims(n).p_up_coeff() * pow_half(1.0 + r2, -4);
                return -dpot * bubble_z0_radial(n, r) * omega * ipow(r, n - 1);
            },
            0.0, 1.5, opt);
    }
    const double vol = sphere_area(n - 2);
    auto f = [&](double w, double phi, double rho) {
        double S[RK];
        double q = reduced_kernels(P, w, phi, rho, S);
        double dpot = p * std::pow(std::abs(q), p - 1.0);
        return -dpot * S[0] * vol * ipow(rho, n - 3) * w;
    };
    double half = sector_integral<double>(f, 0.0, M_PI / P.k, ring_breaks(P),
                                          polar_breaks(P), rel_tol);
    return 2.0 * P.k * half;
}

double const_c2(const Profile& P, double D, double rel_tol) {
    const int n = P.n;
    if (P.is_bubble()) {
        const double omega = Dims(n).omega();
        quad::Options opt;
        opt.rel_tol = rel_tol;
        opt.breakpoints = {1.0, 4.0};
        return quad::integrate_to_inf(
            [&](double r) {
                double z0 = bubble_z0_radial(n, r);
                return (z0 - D * farfield_g(n, r)) * z0 * omega * ipow(r, n - 1);
            },
            0.0, 1.5, opt);
    }
    const double vol = sphere_area(n - 2);
    auto f = [&](double w, double phi, double rho) {
        double S[RK];
        reduced_kernels(P, w, phi, rho, S);
        double r = std::sqrt(w * w + rho * rho);
        return (S[0] - D * farfield_g(n, r)) * S[0] * vol * ipow(rho, n - 3) * w;
    };
    double half = sector_integral<double>(f, 0.0, M_PI / P.k, ring_breaks(P),
                                          polar_breaks(P), rel_tol);
    return 2.0 * P.k * half;
}

double F_of_a(int n, double D, double a, double rel_tol) {
    const double norm = D * std::pow(4.0 * M_PI, -0.5 * n) * Dims(n).omega();
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.breakpoints = {2.0, 4.0, 8.0};
    if (a > 0.0) {
        for (double c : {0.5, std::sqrt(2.0), 4.0, 16.0}) {
            double r = c / a;
            if (r > 1e-12 && r < 50.0) opt.breakpoints.push_back(r);
        }
    }
    return norm * quad::integrate(
                      [&](double r) {
                          return ipow(r, n - 1) * std::exp(-0.25 * r * r) *
                                 farfield_g(n, a * r);
                      },
                      0.0, 50.0, opt);
}

double const_A(int n, double D, double cutoff, double rel_tol) {
    const double inner_tol = std::max(0.01 * rel_tol, 1e-12);
    auto sF = [&](double s) { return s * F_of_a(n, D, s, inner_tol); };
    quad::Options head;
    head.rel_tol = rel_tol;
    head.max_panels = 2000;
    head.breakpoints = quad::geometric_breaks(1e-3, cutoff, 0.5);
    double A = quad::integrate(sF, 0.0, cutoff, head);
    quad::Options tail;
    tail.rel_tol = rel_tol;
    A += quad::integrate_to_inf(sF, cutoff, cutoff, tail);
    return A;
}

double const_cn(int n, double c1, double c2, double A) {
    double base = (2.0 * c1 * A + c2) * double(n - 2) / (2.0 * double(n - 4) * c1);
    if (!(base > 0.0)) throw std::runtime_error("nonpositive rate constant");
    return std::pow(base, 1.0 / double(n - 4));
}

double const_B(int n, double A, double cn) {
    return 2.0 * A / (double(n - 4) * std::pow(cn, double(n - 4)));
}

ScalePair satellite_scaling_check(const Profile& P, double rel_tol) {
    if (P.is_bubble()) throw std::invalid_argument("needs a tower");
    const int n = P.n;
    const double z = P.zeta;
    const double amp = pow_half(z, -(n - 2));
    quad::Options opt;
    opt.rel_tol = rel_tol;
    opt.breakpoints = {0.5 * z, z, 2.0 * z, 8.0 * z};
    ScalePair out;
    out.lhs = quad::integrate_to_inf(
        [&](double s) {
            double v = amp * bubble_z0_radial(n, s / z);
            return v * v * Dims(n).omega() * ipow(s, n - 1);
        },
        0.0, 2.0 * z, opt);
    out.rhs = z * z * int_z0_sq_closed(n);
    return out;
}

} // namespace blowup::constants
