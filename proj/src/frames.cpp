#include "invctl/frames.hpp"

#include <cmath>
#include <stdexcept>

namespace invctl {

namespace {
constexpr double kTwoThirds = 2.0 / 3.0;
const double kSqrt3 = std::sqrt(3.0);
}  // namespace

AlphaBetaVector clarke(const AbcTriple& abc) {
    return {kTwoThirds * (abc.a - 0.5 * abc.b - 0.5 * abc.c),
            (abc.b - abc.c) / kSqrt3};
}

AbcTriple inverse_clarke(const AlphaBetaVector& v) {
    return {v.alpha,
            0.5 * (-v.alpha + kSqrt3 * v.beta),
            0.5 * (-v.alpha - kSqrt3 * v.beta)};
}

AlphaBetaVector voltage_vector(const SwitchingState& state, double vdc) {
    if (!(vdc > 0.0)) {
        throw std::invalid_argument("voltage_vector: vdc must be positive");
    }
    return vdc * clarke({static_cast<double>(state.sa),
                         static_cast<double>(state.sb),
                         static_cast<double>(state.sc)});
}

std::array<VectorCandidate, 7> enumerate_distinct_vectors(double vdc) {
    if (!(vdc > 0.0)) {
        throw std::invalid_argument("enumerate_distinct_vectors: vdc must be positive");
    }
    // Hexagon order: each active state differs from the next by one leg flip,
    // and consecutive vectors are 60 degrees apart.
    constexpr std::array<SwitchingState, 7> order = {
        SwitchingState{0, 0, 0},
        SwitchingState{1, 0, 0},
        SwitchingState{1, 1, 0},
        SwitchingState{0, 1, 0},
        SwitchingState{0, 1, 1},
        SwitchingState{0, 0, 1},
        SwitchingState{1, 0, 1},
    };
    std::array<VectorCandidate, 7> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        out[i] = {order[i], voltage_vector(order[i], vdc)};
    }
    return out;
}

}  // namespace invctl
