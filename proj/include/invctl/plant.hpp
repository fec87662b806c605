#pragma once

#include <Eigen/Core>
#include <cmath>
#include <variant>

#include "invctl/frames.hpp"

namespace invctl {

/// Converter and filter constants for one operating condition.
struct FilterParams {
    double l = 0.0;    ///< filter inductance [H]
    double c = 0.0;    ///< filter capacitance [F]
    double ts = 0.0;   ///< sampling period [s]
    double vdc = 0.0;  ///< DC-link voltage [V]

    double omega0() const { return 1.0 / std::sqrt(l * c); }

    /// Throws std::invalid_argument if any value is nonpositive or the
    /// sampling period does not resolve the filter resonance
    /// (omega0 * ts must stay below pi).
    void validate() const;
};

/// Zero-order-hold model of the filter over one sampling period. The same
/// 2x2 map applies independently to the alpha and beta channels of the
/// state (i_f, v_c).
struct DiscreteModel {
    Eigen::Matrix2d aq;
    Eigen::Vector2d bq;   ///< inverter-voltage input column
    Eigen::Vector2d bdq;  ///< output-current disturbance column
};

/// Exact ZOH discretization of the lossless LC filter. Uses the closed form
/// exp(A t) = cos(w0 t) I + sin(w0 t)/w0 A.
DiscreteModel discretize(const FilterParams& p);

/// Filter state without any load-internal state.
struct FilterState {
    AlphaBetaVector i_f;  ///< filter (inductor) current [A]
    AlphaBetaVector v_c;  ///< capacitor (output) voltage [V]
};

/// One sampling-period prediction: aq*x + bq*v_i + bdq*i_o, channel-wise.
FilterState predict(const DiscreteModel& m, const FilterState& x,
                    const AlphaBetaVector& v_i, const AlphaBetaVector& i_o);

/// Backward-difference estimate of the output current from the previous
/// filter current and the capacitor voltage increment.
AlphaBetaVector estimate_output_current(const AlphaBetaVector& i_f_prev,
                                        const AlphaBetaVector& v_c_now,
                                        const AlphaBetaVector& v_c_prev,
                                        const FilterParams& p);

// Load models attached to the filter output.
struct Resistive {
    double r = 0.0;  ///< [ohm]
};
struct OpenCircuit {};
struct Inductive {
    double l_load = 0.0;  ///< [H], pure inductor per phase
};
/// Six-pulse diode bridge with a parallel RC on the DC side. Diodes are
/// ideal apart from a small fixed conduction-path resistance that keeps the
/// capacitor-to-capacitor coupling well posed.
struct DiodeBridgeRectifier {
    double r_nl = 0.0;  ///< DC-side resistance [ohm]
    double c_nl = 0.0;  ///< DC-side capacitance [F]
};
/// Synthetic load drawing a fixed current, used for model validation.
struct ConstantCurrent {
    AlphaBetaVector i;
};

using LoadModel = std::variant<Resistive, OpenCircuit, Inductive, DiodeBridgeRectifier, ConstantCurrent>;

/// Full simulation state: filter state plus whatever internal state the
/// attached load carries. Fields unused by the active load stay zero.
struct PlantState {
    AlphaBetaVector i_f;
    AlphaBetaVector v_c;
    AlphaBetaVector load_current;  ///< inductive load current
    double dc_bus_v = 0.0;         ///< rectifier DC-side capacitor voltage [V]
};

/// Instantaneous output current drawn by the load at the given state.
AlphaBetaVector output_current(const PlantState& state, const LoadModel& load);

/// Advances the coupled filter+load ODE by one sampling period with the
/// inverter voltage held constant (zero-order hold). Fixed-step RK4 with
/// `substeps` internal steps; rectifier conduction is resolved once per
/// substep from the phase-voltage ordering and the DC-bus voltage.
/// Throws std::invalid_argument if substeps < 1.
PlantState step_truth(const PlantState& state, const SwitchingState& applied,
                      const FilterParams& p, const LoadModel& load, int substeps);

/// Default substep count used by the closed-loop harness.
inline constexpr int kDefaultSubsteps = 32;

}  // namespace invctl
