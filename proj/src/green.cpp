#include "blowup/green.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "blowup/profiles.hpp"

namespace blowup {

namespace {

double uniform01(std::mt19937_64& rng) {
    return ((rng() >> 11) + 0.5) * 0x1.0p-53;
}

Vec random_unit(int n, std::mt19937_64& rng) {
    Vec d(n);
    while (true) {
        for (int i = 0; i < n; i += 2) {
            double u1 = uniform01(rng);
            double u2 = uniform01(rng);
            double r = std::sqrt(-2.0 * std::log(u1));
            d[i] = r * std::cos(2.0 * M_PI * u2);
            if (i + 1 < n) d[i + 1] = r * std::sin(2.0 * M_PI * u2);
        }
        double nrm = d.norm();
        if (nrm > 1e-8) return d / nrm;
    }
}

// Antithetic pairs +-d cancel odd-mode sampling noise, which measurably
// tightens the least-squares fit at fixed point count.
Mat boundary_samples(const DomainSpec& dom, int count, std::mt19937_64& rng,
                     double inflate) {
    Mat pts(count, dom.n);
    for (int i = 0; i < count; i += 2) {
        Vec d = random_unit(dom.n, rng);
        for (int sgn : {1, -1}) {
            if (i + (1 - sgn) / 2 >= count) break;
            Vec dir = sgn * d;
            double rho = dom.radius_in(dir);
            if (!(rho > 0.0))
                throw std::invalid_argument("boundary radius must stay positive");
            pts.row(i + (1 - sgn) / 2) =
                (dom.center + inflate * rho * dir).transpose();
        }
    }
    return pts;
}

} // namespace

double gamma_fundamental(int n, const Vec& x) {
    double r2 = x.squaredNorm();
    if (r2 == 0.0) throw std::domain_error("gamma_fundamental: x = 0");
    return Dims(n).alpha() * pow_half(r2, 2 - n);
}

Vec grad_gamma_fundamental(int n, const Vec& x) {
    double r2 = x.squaredNorm();
    if (r2 == 0.0) throw std::domain_error("grad_gamma_fundamental: x = 0");
    return (Dims(n).alpha() * (2 - n) * pow_half(r2, -n)) * x;
}

double mass_constant(int n) {
    Dims d(n);
    return (n - 2) * d.omega() * d.alpha();
}

MfsOptions MfsOptions::accurate() {
    MfsOptions opt;
    opt.n_boundary = 12000;
    opt.n_charges = 2000;
    opt.inflate = 5.0;
    opt.residual_tol = 1e-3;
    return opt;
}

double DomainSpec::radius_in(const Vec& dir) const {
    return is_ball() ? radius : boundary_radius(dir);
}

bool DomainSpec::contains(const Vec& q) const {
    Vec rel = q - center;
    double r = rel.norm();
    if (r == 0.0) return true;
    return r < radius_in(rel / r);
}

DomainSpec DomainSpec::ball(int n, const Vec& center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    if (center.size() != n) throw std::invalid_argument("center size mismatch");
    DomainSpec dom;
    dom.n = n;
    dom.center = center;
    dom.radius = radius;
    return dom;
}

DomainSpec DomainSpec::star(int n, const Vec& center,
                            std::function<double(const Vec&)> rho) {
    if (center.size() != n) throw std::invalid_argument("center size mismatch");
    DomainSpec dom;
    dom.n = n;
    dom.center = center;
    dom.boundary_radius = std::move(rho);
    std::mt19937_64 rng(12345u);
    double mean = 0.0;
    const int samples = 32;
    for (int i = 0; i < samples; ++i) {
        double r = dom.boundary_radius(random_unit(n, rng));
        if (!(r > 0.0))
            throw std::invalid_argument("boundary radius must stay positive");
        mean += r / samples;
    }
    dom.radius = mean;
    return dom;
}

double boundary_distance(const DomainSpec& dom, const Vec& q) {
    Vec rel = q - dom.center;
    double r = rel.norm();
    if (r == 0.0) return dom.radius_in(Vec::Unit(dom.n, 0));
    return dom.radius_in(rel / r) - r;
}

double regular_part_ball(const DomainSpec& dom, const Vec& x, const Vec& y) {
    if (!dom.is_ball())
        throw std::invalid_argument("closed form needs a ball domain");
    const int n = dom.n;
    Vec xs = (x - dom.center) / dom.radius;
    Vec ys = (y - dom.center) / dom.radius;
    double s = ys.squaredNorm() * xs.squaredNorm() - 2.0 * xs.dot(ys) + 1.0;
    return pow_half(dom.radius * dom.radius, 2 - n) * Dims(n).alpha() *
           pow_half(s, 2 - n);
}

double regular_part_ball_diag(const DomainSpec& dom, const Vec& q) {
    if (!dom.is_ball())
        throw std::invalid_argument("closed form needs a ball domain");
    const int n = dom.n;
    double rho = dom.radius;
    double d2 = (q - dom.center).squaredNorm();
    double gap = rho * rho - d2;
    if (!(gap > 0.0)) throw std::domain_error("point not strictly inside");
    return Dims(n).alpha() * ipow(rho / gap, n - 2);
}

Vec grad_regular_part_ball(const DomainSpec& dom, const Vec& q) {
    if (!dom.is_ball())
        throw std::invalid_argument("closed form needs a ball domain");
    const int n = dom.n;
    double rho = dom.radius;
    Vec rel = q - dom.center;
    double gap = rho * rho - rel.squaredNorm();
    if (!(gap > 0.0)) throw std::domain_error("point not strictly inside");
    return (Dims(n).alpha() * (n - 2) * ipow(rho, n - 2) * ipow(1.0 / gap, n - 1)) *
           rel;
}

Vec GreenSolver::solve_weights(const Vec& y) const {
    const int m = static_cast<int>(boundary_nodes.rows());
    Vec b(m);
    for (int i = 0; i < m; ++i)
        b[i] = gamma_fundamental(domain.n, boundary_nodes.row(i).transpose() - y);
    return factorization.solve(b);
}

GreenSolver make_green_solver(const DomainSpec& dom, const MfsOptions& opt) {
    if (dom.n < 3) throw std::invalid_argument("dimension must be at least 3");
    if (opt.n_charges < dom.n || opt.n_boundary < opt.n_charges)
        throw std::invalid_argument("need n_boundary >= n_charges >= n");
    if (!(opt.inflate > 1.0))
        throw std::invalid_argument("charges must sit outside the boundary");

    GreenSolver s;
    s.domain = dom;
    s.options = opt;

    std::mt19937_64 rng(opt.seed);
    s.boundary_nodes = boundary_samples(dom, opt.n_boundary, rng, 1.0);
    s.source_points = boundary_samples(dom, opt.n_charges, rng, opt.inflate);

    Mat A(opt.n_boundary, opt.n_charges);
    for (int i = 0; i < opt.n_boundary; ++i) {
        Vec node = s.boundary_nodes.row(i).transpose();
        for (int j = 0; j < opt.n_charges; ++j)
            A(i, j) = gamma_fundamental(
                dom.n, node - s.source_points.row(j).transpose());
    }

    s.factorization =
        Eigen::BDCSVD<Mat>(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    s.factorization.setThreshold(opt.svd_threshold);
    const Vec& sv = s.factorization.singularValues();
    Eigen::Index rank = s.factorization.rank();
    s.cond_estimate = rank > 0 ? sv[0] / sv[rank - 1] : 0.0;
    s.node_spacing =
        dom.radius * std::pow(Dims(dom.n).omega() / opt.n_boundary,
                              1.0 / (dom.n - 1));

    Vec probe = dom.center;
    probe[0] += 0.3 * dom.radius_in(Vec::Unit(dom.n, 0));
    s.probe_weights = s.solve_weights(probe);
    s.fit_residual = boundary_residual(s, probe);
    if (s.fit_residual > opt.residual_tol)
        throw std::runtime_error("collocation failure: boundary residual " +
                                 std::to_string(s.fit_residual));
    return s;
}

double eval_with_weights(const GreenSolver& s, const Vec& w, const Vec& x) {
    double sum = 0.0;
    for (int j = 0; j < s.source_points.rows(); ++j)
        sum += w[j] * gamma_fundamental(
                          s.domain.n, x - s.source_points.row(j).transpose());
    return sum;
}

double eval_regular(const GreenSolver& s, const Vec& x, const Vec& y) {
    return eval_with_weights(s, s.solve_weights(y), x);
}

double regular_part(const GreenSolver& s, const Vec& q) {
    if (!s.domain.contains(q))
        throw std::domain_error("query point must be strictly inside");
    return eval_regular(s, q, q);
}

Vec grad_regular_part(const GreenSolver& s, const Vec& q) {
    if (!s.domain.contains(q))
        throw std::domain_error("query point must be strictly inside");
    Vec w = s.solve_weights(q);
    Vec grad = Vec::Zero(s.domain.n);
    for (int j = 0; j < s.source_points.rows(); ++j)
        grad += w[j] * grad_gamma_fundamental(
                           s.domain.n, q - s.source_points.row(j).transpose());
    return grad;
}

double green_value(const GreenSolver& s, const Vec& x, const Vec& y) {
    return gamma_fundamental(s.domain.n, x - y) - eval_regular(s, x, y);
}

double boundary_residual(const GreenSolver& s, const Vec& y, int n_probe,
                         unsigned seed) {
    std::mt19937_64 rng(seed);
    Mat pts = boundary_samples(s.domain, n_probe, rng, 1.0);
    Vec w = s.solve_weights(y);
    double worst = 0.0;
    double scale = 0.0;
    for (int i = 0; i < n_probe; ++i) {
        Vec p = pts.row(i).transpose();
        double target = gamma_fundamental(s.domain.n, p - y);
        worst = std::max(worst, std::abs(eval_with_weights(s, w, p) - target));
        scale = std::max(scale, std::abs(target));
    }
    return worst / scale;
}

} // namespace blowup
