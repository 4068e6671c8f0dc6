#pragma once

// Dimension-dependent constants for the critical semilinear heat equation
// u_t = Lap(u) + |u|^{p-1} u with p = (n+2)/(n-2), n >= 5.

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace blowup {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Surface area of the unit sphere S^{m-1} in R^m.
inline double sphere_area(int m) {
    return 2.0 * std::pow(M_PI, 0.5 * m) / std::tgamma(0.5 * m);
}

inline double beta_fn(double a, double b) {
    return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

// Scalar constants tied to the space dimension n.
struct Dims {
    int n;

    explicit Dims(int n_) : n(n_) {
        if (n < 5) throw std::invalid_argument("dimension must be >= 5");
    }

    double p() const { return double(n + 2) / double(n - 2); }

    // Amplitude of the standard bubble U(y) = alpha * (1+|y|^2)^{-(n-2)/2}.
    double alpha() const {
        return std::pow(double(n) * double(n - 2), 0.25 * (n - 2));
    }

    // U^p has amplitude alpha^p = n(n-2) * alpha.
    double alpha_p() const { return double(n) * double(n - 2) * alpha(); }

    // Surface area of S^{n-1}.
    double omega() const { return sphere_area(n); }

    // p * U^{p-1}(y) = n(n+2) / (1+|y|^2)^2.
    double p_up_coeff() const { return double(n) * double(n + 2); }
};

} // namespace blowup
