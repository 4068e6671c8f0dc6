#pragma once

// Generic numerical kernels: adaptive Gauss-Kronrod (G7K15) quadrature for
// scalar and Eigen-valued integrands, range compactification for tails, and
// small least-squares fitting helpers.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

namespace blowup::quad {

// ======================== G7K15 nodes and weights ========================

// Positive Kronrod abscissae on [-1,1]; even entries are the Gauss-7 nodes.
inline constexpr double k15_nodes[8] = {
    0.0,
    0.2077849550078984676006894,
    0.4058451513773971669066064,
    0.5860872354676911302941448,
    0.7415311855993944398638648,
    0.8648644233597690727897128,
    0.9491079123427585245261897,
    0.9914553711208126392068547,
};

inline constexpr double k15_weights[8] = {
    0.2094821410847278280129992,
    0.2044329400752988924141620,
    0.1903505780647854099132564,
    0.1690047266392679028265834,
    0.1406532597155259187451896,
    0.1047900103222501838398763,
    0.0630920926299785532907007,
    0.0229353220105292249637320,
};

inline constexpr double g7_weights[4] = {
    0.4179591836734693877551020,
    0.3818300505051189449503698,
    0.2797053914892766679014678,
    0.1294849661688696932706114,
};

// ===================== value traits (double / Eigen) =====================

template <class T> struct value_traits {
    static double norm(const T& v) { return std::abs(v); }
    static T zero(const T&) { return T(0); }
};

template <class Derived> struct eigen_value_traits {
    static double norm(const Derived& v) { return v.cwiseAbs().maxCoeff(); }
    static Derived zero(const Derived& v) { return Derived::Zero(v.rows(), v.cols()); }
};

template <int R, int C>
struct value_traits<Eigen::Matrix<double, R, C>>
    : eigen_value_traits<Eigen::Matrix<double, R, C>> {};

// =========================== adaptive engine =============================

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_panels = 4000;
    std::vector<double> breakpoints; // seed interval splits inside [a,b]
};

struct Status {
    bool converged = true;
    double err_estimate = 0.0;
    int panels = 0;
};

namespace detail {

template <class T, class F>
void g7k15_panel(const F& f, double a, double b, T& k15, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    using VT = value_traits<T>;
    T fc = f(c);
    T acc_k = k15_weights[0] * fc;
    T acc_g = g7_weights[0] * fc;
    for (int i = 1; i < 8; ++i) {
        T lo = f(c - h * k15_nodes[i]);
        T hi = f(c + h * k15_nodes[i]);
        T pair = lo + hi;
        acc_k = acc_k + k15_weights[i] * pair;
        if (i % 2 == 0) acc_g = acc_g + g7_weights[i / 2] * pair;
    }
    k15 = h * acc_k;
    T diff = h * (acc_k - acc_g);
    err = VT::norm(diff);
}

struct Seg {
    double err;
    double a, b;
    long id;
    bool operator<(const Seg& o) const {
        if (err != o.err) return err < o.err;
        return id > o.id;
    }
};

} // namespace detail

// Globally adaptive G7K15 on [a,b]. T is double or a fixed-size Eigen matrix.
// The worst-error panel is bisected until the summed error estimate meets
// max(abs_tol, rel_tol * |I|) or the panel budget runs out.
template <class T, class F>
T adaptive(const F& f, double a, double b, const Options& opt, Status* status = nullptr) {
    using VT = value_traits<T>;
    std::vector<double> cuts;
    cuts.push_back(a);
    for (double x : opt.breakpoints)
        if (x > a && x < b) cuts.push_back(x);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    struct Entry {
        detail::Seg seg;
        T val;
        bool live;
    };
    std::vector<Entry> store;
    std::priority_queue<detail::Seg> heap;
    bool have_sum = false;
    T run_sum{};
    double run_err = 0.0;
    int live_panels = 0;

    auto push_seg = [&](double lo, double hi) {
        T val;
        double err;
        detail::g7k15_panel(f, lo, hi, val, err);
        detail::Seg s{err, lo, hi, long(store.size())};
        store.push_back(Entry{s, val, true});
        heap.push(s);
        if (!have_sum) {
            run_sum = val;
            have_sum = true;
        } else {
            run_sum = run_sum + val;
        }
        run_err += err;
        ++live_panels;
    };
    for (size_t i = 0; i + 1 < cuts.size(); ++i) push_seg(cuts[i], cuts[i + 1]);

    while (true) {
        double goal = std::max(opt.abs_tol, opt.rel_tol * VT::norm(run_sum));
        if (run_err <= goal || live_panels >= opt.max_panels) break;
        detail::Seg worst = heap.top();
        heap.pop();
        Entry& parent = store[size_t(worst.id)];
        parent.live = false;
        run_sum = run_sum - parent.val;
        run_err -= parent.seg.err;
        --live_panels;
        double mid = 0.5 * (worst.a + worst.b);
        push_seg(worst.a, mid);
        push_seg(mid, worst.b);
    }

    // Deterministic final summation ordered by left endpoint.
    std::vector<const Entry*> live;
    live.reserve(size_t(live_panels));
    for (const auto& e : store)
        if (e.live) live.push_back(&e);
    std::sort(live.begin(), live.end(),
              [](const Entry* x, const Entry* y) { return x->seg.a < y->seg.a; });
    T sum = VT::zero(live.front()->val);
    double err = 0.0;
    for (const Entry* e : live) {
        sum = sum + e->val;
        err += e->seg.err;
    }
    if (status) {
        status->converged = (err <= std::max(opt.abs_tol, opt.rel_tol * VT::norm(sum)));
        status->err_estimate = err;
        status->panels = live_panels;
    }
    return sum;
}

template <class F>
double integrate(const F& f, double a, double b, const Options& opt = {}, Status* st = nullptr) {
    return adaptive<double>(f, a, b, opt, st);
}

// Integral over [a, inf) via the rational substitution x = a + s*u/(1-u).
// `scale` sets the decade where half the mapped interval lands.
template <class T, class F>
T adaptive_to_inf(const F& f, double a, double scale, const Options& opt = {},
                  Status* st = nullptr) {
    auto g = [&](double u) {
        double om = 1.0 - u;
        double x = a + scale * u / om;
        return T(f(x) * (scale / (om * om)));
    };
    Options o = opt;
    o.breakpoints.clear();
    for (double x : opt.breakpoints) {
        if (x > a) {
            double u = (x - a) / (x - a + scale);
            if (u > 0.0 && u < 1.0) o.breakpoints.push_back(u);
        }
    }
    return adaptive<T>(g, 0.0, 1.0, o, st);
}

template <class F>
double integrate_to_inf(const F& f, double a, double scale, const Options& opt = {},
                        Status* st = nullptr) {
    return adaptive_to_inf<double>(f, a, scale, opt, st);
}

// Geometric breakpoints {base*2^j} inside (lo, hi), plus both interval ends.
inline std::vector<double> geometric_breaks(double lo, double hi, double base) {
    std::vector<double> out;
    if (base <= 0) return out;
    double x = base;
    while (x < lo) x *= 2.0;
    for (; x < hi; x *= 2.0) out.push_back(x);
    return out;
}

// ============================ fitting helpers ============================

// Least squares coefficients for y ~ sum_j c_j basis_j(x).
inline Eigen::VectorXd lsq_fit(const std::vector<double>& xs,
                               const std::vector<double>& ys,
                               const std::vector<std::function<double(double)>>& basis) {
    const int m = int(xs.size());
    const int k = int(basis.size());
    Eigen::MatrixXd A(m, k);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < k; ++j) A(i, j) = basis[j](xs[i]);
        b(i) = ys[i];
    }
    return A.colPivHouseholderQr().solve(b);
}

// Slope of log|y| against log x.
inline double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const int m = int(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        double lx = std::log(xs[i]);
        double ly = std::log(std::abs(ys[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace blowup::quad
