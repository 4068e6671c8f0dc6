#include "blowup/profiles.hpp"

#include <cmath>
#include <stdexcept>

#include "blowup/numerics.hpp"

namespace blowup {

// ============================================================
// radial bubble values
// ============================================================

double bubble_value(int n, double r2) {
    return Dims(n).alpha() * pow_half(1.0 + r2, 2 - n);
}

double bubble_p_value(int n, double r2) {
    return Dims(n).alpha_p() * pow_half(1.0 + r2, -(n + 2));
}

double bubble_z0_radial(int n, double r) {
    double r2 = r * r;
    return 0.5 * (n - 2) * Dims(n).alpha() * (1.0 - r2) * pow_half(1.0 + r2, -n);
}

double bubble_dz1_amp(int n) { return -double(n - 2) * Dims(n).alpha(); }

double farfield_g(int n, double r) {
    double r2 = r * r;
    return (2.0 - r2) * pow_half(1.0 + r2, -n);
}

// ============================================================
// profile construction
// ============================================================

Profile Profile::bubble(int n) {
    Dims d(n);
    Profile P;
    P.n = n;
    P.k = 0;
    P.centers.resize(0, n);
    return P;
}

Profile Profile::tower(int n, int k, double kappa) {
    Dims d(n);
    if (k < 2) throw std::invalid_argument("tower needs at least two satellites");
    Profile P;
    P.n = n;
    P.k = k;
    P.kappa = kappa;
    P.zeta = kappa / double(k) / double(k);
    if (P.zeta <= 0.0 || P.zeta >= 1.0)
        throw std::invalid_argument("satellite scale out of range");
    double ring = std::sqrt(1.0 - P.zeta * P.zeta);
    P.centers = Mat::Zero(k, n);
    for (int j = 0; j < k; ++j) {
        double th = 2.0 * M_PI * j / k;
        P.centers(j, 0) = ring * std::cos(th);
        P.centers(j, 1) = ring * std::sin(th);
    }
    return P;
}

Profile Profile::tower(int n, int k) { return tower(n, k, calibrate_kappa(n, k)); }

double calibrate_kappa(int n, int k) {
    Dims d(n);
    if (k < 2) throw std::invalid_argument("tower needs at least two satellites");
    const double alpha = d.alpha();
    const int m = n - 2;
    // Satellite sum at a center minus the main bubble there, as a function
    // of kappa. Increasing in kappa over the bracket.
    auto balance = [&](double kappa) {
        double zeta = kappa / double(k) / double(k);
        double ring2 = 1.0 - zeta * zeta;
        double lhs = 0.0;
        for (int l = 1; l < k; ++l) {
            double s = 2.0 * std::sin(M_PI * l / k);
            double dist2 = ring2 * s * s;
            lhs += alpha * pow_half(zeta / (zeta * zeta + dist2), m);
        }
        double rhs = alpha * pow_half(1.0 + ring2, -m);
        return lhs - rhs;
    };
    double lo = 1e-3, hi = 0.9 * double(k) * double(k);
    if (balance(lo) >= 0.0 || balance(hi) <= 0.0)
        throw std::runtime_error("ring balance bracket failed");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (balance(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ============================================================
// evaluation
// ============================================================

void eval_value_grad(const Profile& P, const double* y, double* value,
                     double* gradient) {
    const int n = P.n;
    const double alpha = Dims(n).alpha();

    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += y[i] * y[i];
    double s = 1.0 + r2;
    double U = alpha * pow_half(s, 2 - n);
    double gU = -double(n - 2) * alpha * pow_half(s, -n);
    double q = U;
    for (int i = 0; i < n; ++i) gradient[i] = gU * y[i];

    if (P.k > 0) {
        const double zeta = P.zeta;
        const double inv_z2 = 1.0 / (zeta * zeta);
        const double amp_v = pow_half(zeta, -(n - 2));
        const double ring2 = 1.0 - zeta * zeta;
        for (int j = 0; j < P.k; ++j) {
            const double cx = P.centers(j, 0);
            const double cy = P.centers(j, 1);
            double d2 = r2 - 2.0 * (y[0] * cx + y[1] * cy) + ring2;
            double sz = 1.0 + d2 * inv_z2;
            double Uz = alpha * pow_half(sz, 2 - n);
            q -= amp_v * Uz;
            double gz = double(n - 2) * alpha * pow_half(sz, -n) * amp_v * inv_z2;
            gradient[0] += gz * (y[0] - cx);
            gradient[1] += gz * (y[1] - cy);
            for (int i = 2; i < n; ++i) gradient[i] += gz * y[i];
        }
    }
    *value = q;
}

double eval(const Profile& P, const Vec& y) {
    const int n = P.n;
    const double alpha = Dims(n).alpha();
    double r2 = y.squaredNorm();
    double q = alpha * pow_half(1.0 + r2, 2 - n);
    if (P.k > 0) {
        const double inv_z2 = 1.0 / (P.zeta * P.zeta);
        const double amp_v = pow_half(P.zeta, -(n - 2));
        const double ring2 = 1.0 - P.zeta * P.zeta;
        for (int j = 0; j < P.k; ++j) {
            double d2 = r2 - 2.0 * (y[0] * P.centers(j, 0) + y[1] * P.centers(j, 1)) + ring2;
            q -= amp_v * alpha * pow_half(1.0 + d2 * inv_z2, 2 - n);
        }
    }
    return q;
}

Vec grad(const Profile& P, const Vec& y) {
    Vec g(P.n);
    double q;
    eval_value_grad(P, y.data(), &q, g.data());
    return g;
}

double laplacian(const Profile& P, const Vec& y) {
    const int n = P.n;
    double r2 = y.squaredNorm();
    double lap = -bubble_p_value(n, r2);
    if (P.k > 0) {
        const double inv_z2 = 1.0 / (P.zeta * P.zeta);
        const double amp = pow_half(P.zeta, -(n + 2));
        const double ring2 = 1.0 - P.zeta * P.zeta;
        const double ap = Dims(n).alpha_p();
        for (int j = 0; j < P.k; ++j) {
            double d2 = r2 - 2.0 * (y[0] * P.centers(j, 0) + y[1] * P.centers(j, 1)) + ring2;
            lap += amp * ap * pow_half(1.0 + d2 * inv_z2, -(n + 2));
        }
    }
    return lap;
}

double eval_pow_p(const Profile& P, const Vec& y) {
    double q = eval(P, y);
    double p = Dims(P.n).p();
    return (q >= 0.0 ? 1.0 : -1.0) * std::pow(std::abs(q), p);
}

double eval_dpot(const Profile& P, const Vec& y) {
    double q = eval(P, y);
    double p = Dims(P.n).p();
    return p * std::pow(std::abs(q), p - 1.0);
}

// ============================================================
// kernels
// ============================================================

namespace {

void kernels_from_value_grad(int n, const Vec& y, double q, const double* g,
                             double* z) {
    const double r2 = y.squaredNorm();
    double ydotg = 0.0;
    for (int i = 0; i < n; ++i) ydotg += y[i] * g[i];
    const double z0 = 0.5 * (n - 2) * q + ydotg;
    z[0] = z0;
    for (int i = 0; i < n; ++i) z[1 + i] = g[i];
    z[n + 1] = y[0] * g[1] - y[1] * g[0];
    z[n + 2] = -2.0 * y[0] * z0 + r2 * g[0];
    z[n + 3] = -2.0 * y[1] * z0 + r2 * g[1];
    for (int i = 0; i + 3 <= n; ++i) {
        int l = 2 + i;  // coordinate index 3 + i, zero based
        z[n + 4 + i] = -y[l] * g[0] + y[0] * g[l];
        z[2 * n + 2 + i] = -y[l] * g[1] + y[1] * g[l];
    }
}

} // namespace

Vec eval_kernels(const Profile& P, const Vec& y) {
    const int n = P.n;
    Vec g(n), z(3 * n);
    double q;
    eval_value_grad(P, y.data(), &q, g.data());
    kernels_from_value_grad(n, y, q, g.data(), z.data());
    return z;
}

double eval_kernel(const Profile& P, int alpha, const Vec& y) {
    const int n = P.n;
    if (alpha < 0 || alpha >= 3 * n) throw std::invalid_argument("kernel index");
    return eval_kernels(P, y)[alpha];
}

double apply_linearized(const Profile& P,
                        const std::function<double(const Vec&)>& phi,
                        const Vec& x, double h) {
    const int n = P.n;
    const double center = phi(x);
    double lap = 0.0;
    Vec xp = x;
    for (int i = 0; i < n; ++i) {
        xp[i] = x[i] + h;
        double fp = phi(xp);
        xp[i] = x[i] - h;
        double fm = phi(xp);
        xp[i] = x[i];
        lap += fp - 2.0 * center + fm;
    }
    lap /= h * h;
    return lap + eval_dpot(P, x) * center;
}

double linearized_residual(const Profile& P, int alpha, const Vec& x, double h) {
    return apply_linearized(
        P, [&](const Vec& y) { return eval_kernel(P, alpha, y); }, x, h);
}

// ============================================================
// transformed family
// ============================================================

TransformParams TransformParams::identity(int n) {
    TransformParams A;
    A.mu = 1.0;
    A.xi = Vec::Zero(n);
    A.a.setZero();
    A.theta = Vec::Zero(2 * n - 3);
    return A;
}

Mat rotation_matrix(int n, const Vec& theta) {
    if (theta.size() != 2 * n - 3) throw std::invalid_argument("angle count");
    Mat R = Mat::Identity(n, n);
    int m = 0;
    auto apply = [&](int i, int j, double th) {
        if (th == 0.0) return;
        double c = std::cos(th), s = std::sin(th);
        Vec ci = R.col(i), cj = R.col(j);
        R.col(i) = c * ci + s * cj;
        R.col(j) = -s * ci + c * cj;
    };
    apply(0, 1, theta[m++]);
    for (int j = 2; j < n; ++j) apply(0, j, theta[m++]);
    for (int j = 2; j < n; ++j) apply(1, j, theta[m++]);
    return R;
}

double eval_transformed(const Profile& P, const TransformParams& A,
                        const Vec& x) {
    const int n = P.n;
    Vec y = (x - A.xi) / A.mu;
    const double y2 = y.squaredNorm();
    const double ady = A.a[0] * y[0] + A.a[1] * y[1];
    const double a2 = A.a.squaredNorm();
    double eta2 = 1.0 - 2.0 * ady + a2 * y2;
    if (eta2 < 1e-100) eta2 = 1e-100;
    Vec w = y;
    w[0] -= A.a[0] * y2;
    w[1] -= A.a[1] * y2;
    Vec arg;
    if (A.theta.isZero(0.0))
        arg = w / eta2;
    else
        arg = rotation_matrix(n, A.theta) * w / eta2;
    return pow_half(A.mu, 2 - n) * pow_half(eta2, 2 - n) * eval(P, arg);
}

TransformParams perturb_param(const TransformParams& A, int alpha, double h) {
    const int n = int(A.xi.size());
    TransformParams B = A;
    if (alpha == 0)
        B.mu += h;
    else if (alpha >= 1 && alpha <= n)
        B.xi[alpha - 1] += h;
    else if (alpha == n + 1)
        B.theta[0] += h;
    else if (alpha == n + 2)
        B.a[0] += h;
    else if (alpha == n + 3)
        B.a[1] += h;
    else if (alpha >= n + 4 && alpha <= 2 * n + 1)
        B.theta[1 + (alpha - n - 4)] += h;
    else if (alpha >= 2 * n + 2 && alpha <= 3 * n - 1)
        B.theta[n - 1 + (alpha - 2 * n - 2)] += h;
    else
        throw std::invalid_argument("parameter index");
    return B;
}

double kernel_scale(int n, const TransformParams& A, int alpha) {
    if (alpha <= n) return -pow_half(A.mu, -n);
    if (alpha == n + 2 || alpha == n + 3) return -pow_half(A.mu, -(n - 2));
    return pow_half(A.mu, -(n - 2));
}

DerivativeCheck check_transform_derivative(const Profile& P,
                                           const TransformParams& A, int alpha,
                                           double h,
                                           const std::vector<Vec>& points) {
    const int n = P.n;
    const double scale = kernel_scale(n, A, alpha);
    double norm = 0.0;
    std::vector<double> expected(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        Vec y = (points[i] - A.xi) / A.mu;
        expected[i] = scale * eval_kernel(P, alpha, y);
        norm = std::max(norm, std::abs(expected[i]));
    }
    norm = std::max(norm, 1e-12);

    auto residual = [&](double step) {
        TransformParams Ap = perturb_param(A, alpha, step);
        TransformParams Am = perturb_param(A, alpha, -step);
        double worst = 0.0;
        for (size_t i = 0; i < points.size(); ++i) {
            double fd = (eval_transformed(P, Ap, points[i]) -
                         eval_transformed(P, Am, points[i])) /
                        (2.0 * step);
            worst = std::max(worst, std::abs(fd - expected[i]));
        }
        return worst / norm;
    };

    DerivativeCheck out;
    out.res_h = residual(h);
    out.res_half = residual(0.5 * h);
    out.ratio = out.res_h / std::max(out.res_half, 1e-300);
    out.scale = norm;
    return out;
}

// ============================================================
// far field fits
// ============================================================

FarfieldFit fit_farfield_constants(const Profile& P) {
    const int n = P.n;
    const double alpha = Dims(n).alpha();
    const int nr = 12;
    const int na = P.is_bubble() ? 8 : 4 * P.k;

    std::vector<double> rs(nr), zbar0(nr), proj1(nr), qnorm(nr);
    for (int i = 0; i < nr; ++i)
        rs[i] = 6.0 * std::pow(2.0, double(i) / double(nr - 1));

    Vec y = Vec::Zero(n), g(n);
    for (int i = 0; i < nr; ++i) {
        const double r = rs[i];
        double s0 = 0.0, s1 = 0.0, sq = 0.0;
        for (int j = 0; j < na; ++j) {
            double phi = 2.0 * M_PI * (j + 0.5) / na;
            double c = std::cos(phi), s = std::sin(phi);
            y.setZero();
            y[0] = r * c;
            y[1] = r * s;
            double q;
            eval_value_grad(P, y.data(), &q, g.data());
            double ydotg = r * (c * g[0] + s * g[1]);
            s0 += 0.5 * (n - 2) * q + ydotg;
            s1 += c * g[0] + s * g[1];
            sq += q;
        }
        zbar0[i] = s0 / na;
        proj1[i] = s1 / na;
        qnorm[i] = (sq / na) * pow_half(r * r, n - 2) / alpha - 1.0;
    }

    FarfieldFit out;
    {
        std::vector<std::function<double(double)>> basis = {
            [n](double r) { return farfield_g(n, r); },
            [n](double r) { return pow_half(1.0 + r * r, -n); }};
        Vec c = quad::lsq_fit(rs, zbar0, basis);
        out.D = c[0];
        double worst = 0.0;
        for (int i = 0; i < nr; ++i) {
            double fit = c[0] * basis[0](rs[i]) + c[1] * basis[1](rs[i]);
            worst = std::max(worst, std::abs(fit - zbar0[i]));
        }
        out.d_resid = worst / std::max(std::abs(out.D), 1e-300);
    }
    {
        std::vector<std::function<double(double)>> basis = {
            [n](double r) { return r * pow_half(1.0 + r * r, -n); },
            [n](double r) { return r * pow_half(1.0 + r * r, -(n + 2)); }};
        Vec c = quad::lsq_fit(rs, proj1, basis);
        out.E = c[0];
        double worst = 0.0;
        for (int i = 0; i < nr; ++i) {
            double fit = c[0] * basis[0](rs[i]) + c[1] * basis[1](rs[i]);
            worst = std::max(worst, std::abs(fit - proj1[i]));
        }
        out.e_resid = worst / std::max(std::abs(out.E), 1e-300);
    }
    {
        std::vector<std::function<double(double)>> basis = {
            [](double) { return 1.0; },
            [](double r) { return 1.0 / (r * r); },
            [](double r) { return 1.0 / (r * r * r * r); }};
        Vec c = quad::lsq_fit(rs, qnorm, basis);
        out.dk = c[0];
        double worst = 0.0;
        for (int i = 0; i < nr; ++i) {
            double fit = c[0] + c[1] * basis[1](rs[i]) + c[2] * basis[2](rs[i]);
            worst = std::max(worst, std::abs(fit - qnorm[i]));
        }
        out.dk_resid = worst;
    }
    return out;
}

double kelvin_eval(const Profile& P, const Vec& y) {
    double r2 = y.squaredNorm();
    Vec img = y / r2;
    return pow_half(r2, 2 - P.n) * eval(P, img);
}

} // namespace blowup
