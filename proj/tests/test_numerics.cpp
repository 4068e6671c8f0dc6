#include <cmath>

#include "doctest.h"

#include "blowup/dims.hpp"
#include "blowup/numerics.hpp"

using namespace blowup;

TEST_SUITE("numerics") {

TEST_CASE("dimension constants") {
    CHECK(sphere_area(2) == doctest::Approx(2.0 * M_PI).epsilon(1e-14));
    CHECK(sphere_area(3) == doctest::Approx(4.0 * M_PI).epsilon(1e-14));
    CHECK(sphere_area(5) == doctest::Approx(8.0 * M_PI * M_PI / 3.0).epsilon(1e-14));
    CHECK(beta_fn(2.0, 3.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    Dims d(5);
    CHECK(d.p() == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
    CHECK(d.alpha() == doctest::Approx(std::pow(15.0, 0.75)).epsilon(1e-14));
    CHECK(d.alpha_p() == doctest::Approx(15.0 * d.alpha()).epsilon(1e-14));
    CHECK(Dims(6).alpha() == doctest::Approx(24.0).epsilon(1e-14));
    CHECK_THROWS_AS(Dims(4), std::invalid_argument);
}

TEST_CASE("adaptive quadrature on smooth integrands") {
    quad::Status st;
    double v = quad::integrate([](double x) { return std::exp(-x); }, 0.0, 10.0, {}, &st);
    CHECK(v == doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-12));
    CHECK(st.converged);

    v = quad::integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0);
    CHECK(v == doctest::Approx(M_PI / 4.0).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature with vector values") {
    using V2 = Eigen::Matrix<double, 2, 1>;
    V2 v = quad::adaptive<V2>(
        [](double x) { return V2(std::sin(x), std::cos(x)); }, 0.0, M_PI, {});
    CHECK(v[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(v[1]) <= 1e-12);
}

TEST_CASE("integrable endpoint singularity") {
    quad::Options opt;
    opt.rel_tol = 1e-9;
    opt.max_panels = 3000;
    double v = quad::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, opt);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("breakpoints capture kinks") {
    quad::Options opt;
    opt.breakpoints = {0.3};
    double v = quad::integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, opt);
    CHECK(v == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-13));
}

TEST_CASE("semi-infinite integrals") {
    double v = quad::integrate_to_inf([](double x) { return std::exp(-x); }, 0.0, 1.0);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    v = quad::integrate_to_inf([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0);
    CHECK(v == doctest::Approx(M_PI / 2.0).epsilon(1e-10));
    // Decaying tail with a scale far from 1.
    v = quad::integrate_to_inf([](double x) { return x * std::exp(-0.01 * x); }, 0.0, 100.0);
    CHECK(v == doctest::Approx(1e4).epsilon(1e-9));
}

TEST_CASE("quadrature reruns are identical") {
    auto f = [](double x) { return std::cos(7.0 * x) / (1.0 + x); };
    double a = quad::integrate(f, 0.0, 5.0);
    double b = quad::integrate(f, 0.0, 5.0);
    CHECK(a == b);
}

TEST_CASE("geometric breakpoints") {
    auto br = quad::geometric_breaks(0.1, 3.0, 0.25);
    REQUIRE(br.size() == 4);
    CHECK(br[0] == doctest::Approx(0.25));
    CHECK(br[3] == doctest::Approx(2.0));
    CHECK(quad::geometric_breaks(1.0, 1.0, 0.5).empty());
}

TEST_CASE("least squares recovers exact coefficients") {
    std::vector<double> xs = {1, 2, 3, 4, 5};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(2.0 + 3.0 * x);
    std::vector<std::function<double(double)>> basis = {
        [](double) { return 1.0; }, [](double x) { return x; }};
    Eigen::VectorXd c = quad::lsq_fit(xs, ys, basis);
    CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("log-log slope") {
    std::vector<double> xs = {1.0, 2.0, 4.0, 8.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(5.0 * std::pow(x, -2.5));
    CHECK(quad::fit_loglog_slope(xs, ys) == doctest::Approx(-2.5).epsilon(1e-12));
}

} // TEST_SUITE
