#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>

// Independent numerical oracles for the unit and acceptance tests. These
// deliberately avoid the closed forms the library uses so agreement is
// evidence, not tautology.
namespace test_support {

/// e^{A t} and its running integral psi(t) = int_0^t e^{A tau} d tau,
/// computed by truncated Taylor series with scaling and squaring. The pair
/// doubles together through psi(2t) = psi(t) + e^{A t} psi(t).
struct ExpmPair {
    Eigen::MatrixXd e;
    Eigen::MatrixXd psi;
};

inline ExpmPair expm_with_integral(const Eigen::MatrixXd& a, double t, int terms = 24) {
    const auto n = a.rows();
    double tau = t;
    double scale = a.cwiseAbs().maxCoeff() * std::abs(t);
    int squarings = 0;
    while (scale > 0.5) {
        tau *= 0.5;
        scale *= 0.5;
        ++squarings;
    }
    const Eigen::MatrixXd at = a * tau;
    Eigen::MatrixXd e = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= terms; ++k) {
        term = term * at / static_cast<double>(k);
        e += term;
    }
    // psi(tau) = tau * sum_k (A tau)^k / (k+1)!
    Eigen::MatrixXd psi = Eigen::MatrixXd::Identity(n, n);
    term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= terms; ++k) {
        term = term * at / static_cast<double>(k + 1);
        psi += term;
    }
    psi *= tau;
    for (int s = 0; s < squarings; ++s) {
        psi = psi + e * psi;
        e = e * e;
    }
    return {e, psi};
}

inline Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& a, int terms = 24) {
    return expm_with_integral(a, 1.0, terms).e;
}

/// Continuous-time LC filter axes: state (i_f, v_c), input v_i,
/// disturbance i_o.
inline Eigen::Matrix2d lc_matrix(double l, double c) {
    Eigen::Matrix2d a;
    a << 0.0, -1.0 / l, 1.0 / c, 0.0;
    return a;
}

/// Filter with a resistive load folded in: i_o = v_c / r.
inline Eigen::Matrix2d lc_resistive_matrix(double l, double c, double r) {
    Eigen::Matrix2d a;
    a << 0.0, -1.0 / l, 1.0 / c, -1.0 / (r * c);
    return a;
}

/// Exact one-period map x(k+1) = e x(k) + f * v_i for one alpha/beta axis of
/// the resistive-load plant.
struct ExactAxisStep {
    Eigen::Matrix2d e;
    Eigen::Vector2d f;
};

inline ExactAxisStep exact_resistive_step(double l, double c, double r, double ts) {
    const auto pair = expm_with_integral(lc_resistive_matrix(l, c, r), ts, 28);
    Eigen::Vector2d b;
    b << 1.0 / l, 0.0;
    return {pair.e, Eigen::Vector2d(pair.psi * b)};
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>{lo, hi}(g);
}

inline int uniform_int(std::mt19937_64& g, int lo, int hi) {
    return std::uniform_int_distribution<int>{lo, hi}(g);
}

}  // namespace test_support
