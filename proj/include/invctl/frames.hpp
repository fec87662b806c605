#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace invctl {

/// Leg configuration of a two-level three-phase inverter. The two switches
/// of each leg operate complementarily, so one binary per leg describes the
/// whole bridge. index() uses the natural binary encoding sa*4 + sb*2 + sc.
struct SwitchingState {
    std::uint8_t sa = 0;
    std::uint8_t sb = 0;
    std::uint8_t sc = 0;

    constexpr int index() const { return sa * 4 + sb * 2 + sc; }

    static constexpr SwitchingState from_index(int index) {
        return SwitchingState{static_cast<std::uint8_t>((index >> 2) & 1),
                              static_cast<std::uint8_t>((index >> 1) & 1),
                              static_cast<std::uint8_t>(index & 1)};
    }

    friend constexpr bool operator==(const SwitchingState&, const SwitchingState&) = default;
};

/// Stationary-frame quantity (volts or amperes depending on what it carries).
struct AlphaBetaVector {
    double alpha = 0.0;
    double beta = 0.0;

    double norm() const { return std::hypot(alpha, beta); }
    double squared_norm() const { return alpha * alpha + beta * beta; }

    friend constexpr AlphaBetaVector operator+(const AlphaBetaVector& x, const AlphaBetaVector& y) {
        return {x.alpha + y.alpha, x.beta + y.beta};
    }
    friend constexpr AlphaBetaVector operator-(const AlphaBetaVector& x, const AlphaBetaVector& y) {
        return {x.alpha - y.alpha, x.beta - y.beta};
    }
    friend constexpr AlphaBetaVector operator*(double s, const AlphaBetaVector& x) {
        return {s * x.alpha, s * x.beta};
    }
    friend constexpr AlphaBetaVector operator*(const AlphaBetaVector& x, double s) { return s * x; }
};

/// Per-phase quantity. Balanced three-wire signals carry no zero sequence,
/// and the Clarke transform discards whatever common mode is present.
struct AbcTriple {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// Amplitude-invariant Clarke transform (the 2/3-scaled two-row matrix).
AlphaBetaVector clarke(const AbcTriple& abc);

/// Zero-sequence-free preimage of the Clarke transform.
/// clarke(inverse_clarke(v)) == v for every v.
AbcTriple inverse_clarke(const AlphaBetaVector& v);

/// Inverter output voltage vector for a switching state: vdc times the
/// Clarke image of the leg signals. Throws std::invalid_argument unless
/// vdc > 0.
AlphaBetaVector voltage_vector(const SwitchingState& state, double vdc);

/// One switching state together with the voltage vector it produces.
struct VectorCandidate {
    SwitchingState state;
    AlphaBetaVector v;
};

/// The seven distinct inverter voltage vectors: the null vector first
/// (canonical state (0,0,0); (1,1,1) produces the same vector and is never
/// enumerated), then the six active vectors counterclockwise starting on the
/// positive alpha axis. Throws std::invalid_argument unless vdc > 0.
std::array<VectorCandidate, 7> enumerate_distinct_vectors(double vdc);

}  // namespace invctl
