#pragma once

#include "invctl/frames.hpp"
#include "invctl/plant.hpp"

namespace invctl {

/// Controller memory between sampling instants. Both previous samples start
/// at zero, which is what the first control cycle assumes.
struct MpcState {
    AlphaBetaVector i_f_prev;
    AlphaBetaVector v_c_prev;
    bool first_step = true;
};

/// Outcome of one control cycle.
struct MpcDecision {
    int optimal_index = 0;  ///< 0..6 into the distinct-vector enumeration
    SwitchingState switching;
    double cost = 0.0;  ///< squared tracking error [V^2] of the chosen vector
    AlphaBetaVector predicted_v_c;
    AlphaBetaVector estimated_i_o;
};

/// Squared stationary-frame tracking error between reference and prediction.
double cost(const AlphaBetaVector& v_ref, const AlphaBetaVector& v_pred);

/// One finite-control-set cycle: estimate the output current from the stored
/// previous samples, predict the capacitor voltage one period ahead for each
/// of the seven distinct vectors, and pick the cheapest. Ties resolve to the
/// earliest candidate in enumeration order (strict less-than). Updates the
/// stored previous samples to the current measurements.
MpcDecision control_step(MpcState& mpc, const AlphaBetaVector& i_f,
                         const AlphaBetaVector& v_c, const AlphaBetaVector& v_ref,
                         const DiscreteModel& model, const FilterParams& p);

}  // namespace invctl
