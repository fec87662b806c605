#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "invctl/scg.hpp"
#include "test_support.hpp"

using namespace invctl;

namespace {

// Well-conditioned SPD quadratic: f(w) = 0.5 w'Qw - b'w, minimum Q^{-1}b.
struct Quadratic {
    Eigen::MatrixXd q;
    Eigen::VectorXd b;

    double operator()(const Eigen::VectorXd& w, Eigen::VectorXd* grad) const {
        const Eigen::VectorXd qw = q * w;
        if (grad) *grad = qw - b;
        return 0.5 * w.dot(qw) - b.dot(w);
    }
};

Quadratic make_quadratic(int n, std::uint64_t seed) {
    auto rng = test_support::make_rng(seed);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = test_support::uniform(rng, -1.0, 1.0);
    Quadratic quad;
    quad.q = m.transpose() * m + Eigen::MatrixXd::Identity(n, n);
    quad.b = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) {
        return test_support::uniform(rng, -2.0, 2.0);
    });
    return quad;
}

}  // namespace

TEST_CASE("quadratic minimization reaches the analytic solution") {
    const int n = 12;
    const auto quad = make_quadratic(n, 41);
    const Eigen::VectorXd solution = quad.q.ldlt().solve(quad.b);

    ScgOptions opt;
    opt.max_iterations = 5000;
    opt.grad_tolerance = 1e-10;
    const auto res = scg_minimize([&](const Eigen::VectorXd& w, Eigen::VectorXd* g) {
        return quad(w, g);
    }, Eigen::VectorXd::Zero(n), opt);

    CHECK((res.w - solution).norm() <= 1e-6 * (1.0 + solution.norm()));
    // Acceptance compares loss differences, so the reachable gradient floor
    // is sqrt(eps)-scale, not eps-scale.
    Eigen::VectorXd grad;
    quad(res.w, &grad);
    CHECK(grad.norm() <= 1e-6 * (1.0 + quad.b.norm()));
}

TEST_CASE("reported loss never increases") {
    const auto quad = make_quadratic(8, 42);
    std::vector<double> losses;
    ScgOptions opt;
    opt.max_iterations = 100;
    scg_minimize([&](const Eigen::VectorXd& w, Eigen::VectorXd* g) { return quad(w, g); },
                 Eigen::VectorXd::Constant(8, 1.0), opt,
                 [&](const ScgIterate& it, const Eigen::VectorXd&) {
                     losses.push_back(it.loss);
                     return true;
                 });
    REQUIRE(losses.size() > 2);
    for (std::size_t i = 1; i < losses.size(); ++i) {
        CHECK(losses[i] <= losses[i - 1] + 1e-12 * (1.0 + std::abs(losses[i - 1])));
    }
}

TEST_CASE("callback can stop the run early") {
    const auto quad = make_quadratic(8, 43);
    ScgOptions opt;
    opt.max_iterations = 500;
    int seen = 0;
    const auto res = scg_minimize([&](const Eigen::VectorXd& w, Eigen::VectorXd* g) {
        return quad(w, g);
    }, Eigen::VectorXd::Zero(8), opt, [&](const ScgIterate&, const Eigen::VectorXd&) {
        return ++seen < 5;
    });
    CHECK(seen == 5);
    CHECK(res.iterations == 5);
}

TEST_CASE("gradient tolerance stops once satisfied") {
    const auto quad = make_quadratic(6, 44);
    ScgOptions opt;
    opt.max_iterations = 1000;
    opt.grad_tolerance = 1e-6;
    const auto res = scg_minimize([&](const Eigen::VectorXd& w, Eigen::VectorXd* g) {
        return quad(w, g);
    }, Eigen::VectorXd::Zero(6), opt);
    Eigen::VectorXd grad;
    quad(res.w, &grad);
    CHECK(grad.norm() <= 1e-6);
    CHECK(res.iterations < 1000);
}

TEST_CASE("non-finite starting objective throws") {
    ScgOptions opt;
    CHECK_THROWS_AS(scg_minimize([](const Eigen::VectorXd&, Eigen::VectorXd* g) {
                        if (g) g->setZero(2);
                        return std::numeric_limits<double>::quiet_NaN();
                    }, Eigen::VectorXd::Zero(2), opt),
                    std::runtime_error);
}

TEST_CASE("rosenbrock valley is followed to the optimum") {
    // Classic nonconvex sanity check for the damping and restart logic.
    const auto rosen = [](const Eigen::VectorXd& w, Eigen::VectorXd* g) {
        const double x = w(0), y = w(1);
        if (g) {
            g->resize(2);
            (*g)(0) = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
            (*g)(1) = 200.0 * (y - x * x);
        }
        return (1.0 - x) * (1.0 - x) + 100.0 * (y - x * x) * (y - x * x);
    };
    ScgOptions opt;
    opt.max_iterations = 20000;
    opt.grad_tolerance = 1e-10;
    Eigen::VectorXd w0(2);
    w0 << -1.2, 1.0;
    const auto res = scg_minimize(rosen, w0, opt);
    CHECK(res.loss <= 1e-8);
    CHECK(std::abs(res.w(0) - 1.0) <= 1e-3);
    CHECK(std::abs(res.w(1) - 1.0) <= 1e-3);
}
