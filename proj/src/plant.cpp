#include "invctl/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace invctl {

namespace {

// Series resistance of the conducting bridge path. Regularizes the otherwise
// ideal diode coupling between the filter capacitor and the DC-side
// capacitor; small against every DC-side resistance in use.
constexpr double kBridgeOnResistance = 0.1;

struct RectifierConduction {
    bool on = false;
    int hi = 0;  // phase index with the highest instantaneous voltage
    int lo = 0;  // phase index with the lowest instantaneous voltage
};

RectifierConduction resolve_conduction(const AlphaBetaVector& v_c, double dc_bus_v) {
    const AbcTriple v = inverse_clarke(v_c);
    const double ph[3] = {v.a, v.b, v.c};
    int hi = 0;
    int lo = 0;
    for (int i = 1; i < 3; ++i) {
        if (ph[i] > ph[hi]) hi = i;
        if (ph[i] < ph[lo]) lo = i;
    }
    return {ph[hi] - ph[lo] > dc_bus_v, hi, lo};
}

struct StateDerivative {
    AlphaBetaVector di_f;
    AlphaBetaVector dv_c;
    AlphaBetaVector dload_current;
    double ddc_bus_v = 0.0;
};

AlphaBetaVector rectifier_phase_currents(const AlphaBetaVector& v_c, double dc_bus_v,
                                         const RectifierConduction& cond) {
    if (!cond.on) return {};
    const AbcTriple v = inverse_clarke(v_c);
    const double ph[3] = {v.a, v.b, v.c};
    const double i_dc = (ph[cond.hi] - ph[cond.lo] - dc_bus_v) / kBridgeOnResistance;
    double i_abc[3] = {0.0, 0.0, 0.0};
    i_abc[cond.hi] += i_dc;
    i_abc[cond.lo] -= i_dc;
    return clarke({i_abc[0], i_abc[1], i_abc[2]});
}

StateDerivative derivative(const PlantState& s, const AlphaBetaVector& v_i,
                           const FilterParams& p, const LoadModel& load,
                           const RectifierConduction& cond) {
    StateDerivative d;
    AlphaBetaVector i_o;
    if (const auto* r = std::get_if<Resistive>(&load)) {
        i_o = (1.0 / r->r) * s.v_c;
    } else if (std::holds_alternative<OpenCircuit>(load)) {
        i_o = {};
    } else if (const auto* ind = std::get_if<Inductive>(&load)) {
        i_o = s.load_current;
        d.dload_current = (1.0 / ind->l_load) * s.v_c;
    } else if (const auto* rect = std::get_if<DiodeBridgeRectifier>(&load)) {
        i_o = rectifier_phase_currents(s.v_c, s.dc_bus_v, cond);
        double i_dc = 0.0;
        if (cond.on) {
            const AbcTriple v = inverse_clarke(s.v_c);
            const double ph[3] = {v.a, v.b, v.c};
            i_dc = (ph[cond.hi] - ph[cond.lo] - s.dc_bus_v) / kBridgeOnResistance;
        }
        d.ddc_bus_v = (i_dc - s.dc_bus_v / rect->r_nl) / rect->c_nl;
    } else {
        i_o = std::get<ConstantCurrent>(load).i;
    }
    d.di_f = (1.0 / p.l) * (v_i - s.v_c);
    d.dv_c = (1.0 / p.c) * (s.i_f - i_o);
    return d;
}

PlantState advance(const PlantState& s, const StateDerivative& d, double h) {
    PlantState out = s;
    out.i_f = s.i_f + h * d.di_f;
    out.v_c = s.v_c + h * d.dv_c;
    out.load_current = s.load_current + h * d.dload_current;
    out.dc_bus_v = s.dc_bus_v + h * d.ddc_bus_v;
    return out;
}

}  // namespace

void FilterParams::validate() const {
    if (!(l > 0.0)) throw std::invalid_argument("FilterParams: l must be positive");
    if (!(c > 0.0)) throw std::invalid_argument("FilterParams: c must be positive");
    if (!(ts > 0.0)) throw std::invalid_argument("FilterParams: ts must be positive");
    if (!(vdc > 0.0)) throw std::invalid_argument("FilterParams: vdc must be positive");
    if (!(omega0() * ts < M_PI)) {
        throw std::invalid_argument("FilterParams: sampling slower than half the resonance period");
    }
}

DiscreteModel discretize(const FilterParams& p) {
    p.validate();
    const double theta = p.omega0() * p.ts;
    const double z0 = std::sqrt(p.l / p.c);  // characteristic impedance
    const double s = std::sin(theta);
    const double half = std::sin(0.5 * theta);
    const double one_minus_cos = 2.0 * half * half;

    DiscreteModel m;
    m.aq << 1.0 - one_minus_cos, -s / z0,
            z0 * s,              1.0 - one_minus_cos;
    m.bq << s / z0, one_minus_cos;
    m.bdq << one_minus_cos, -z0 * s;
    return m;
}

FilterState predict(const DiscreteModel& m, const FilterState& x,
                    const AlphaBetaVector& v_i, const AlphaBetaVector& i_o) {
    const Eigen::Vector2d xa(x.i_f.alpha, x.v_c.alpha);
    const Eigen::Vector2d xb(x.i_f.beta, x.v_c.beta);
    const Eigen::Vector2d na = m.aq * xa + m.bq * v_i.alpha + m.bdq * i_o.alpha;
    const Eigen::Vector2d nb = m.aq * xb + m.bq * v_i.beta + m.bdq * i_o.beta;
    return {{na(0), nb(0)}, {na(1), nb(1)}};
}

AlphaBetaVector estimate_output_current(const AlphaBetaVector& i_f_prev,
                                        const AlphaBetaVector& v_c_now,
                                        const AlphaBetaVector& v_c_prev,
                                        const FilterParams& p) {
    return i_f_prev - (p.c / p.ts) * (v_c_now - v_c_prev);
}

AlphaBetaVector output_current(const PlantState& state, const LoadModel& load) {
    if (const auto* r = std::get_if<Resistive>(&load)) {
        return (1.0 / r->r) * state.v_c;
    }
    if (std::holds_alternative<OpenCircuit>(load)) {
        return {};
    }
    if (std::holds_alternative<Inductive>(load)) {
        return state.load_current;
    }
    if (std::holds_alternative<DiodeBridgeRectifier>(load)) {
        const RectifierConduction cond = resolve_conduction(state.v_c, state.dc_bus_v);
        return rectifier_phase_currents(state.v_c, state.dc_bus_v, cond);
    }
    return std::get<ConstantCurrent>(load).i;
}

PlantState step_truth(const PlantState& state, const SwitchingState& applied,
                      const FilterParams& p, const LoadModel& load, int substeps) {
    p.validate();
    if (substeps < 1) throw std::invalid_argument("step_truth: substeps must be >= 1");

    const AlphaBetaVector v_i = voltage_vector(applied, p.vdc);
    const double h = p.ts / substeps;
    PlantState s = state;
    for (int n = 0; n < substeps; ++n) {
        // Conduction frozen over the substep so the RK4 stages see a smooth
        // right-hand side.
        const RectifierConduction cond = resolve_conduction(s.v_c, s.dc_bus_v);
        const StateDerivative k1 = derivative(s, v_i, p, load, cond);
        const StateDerivative k2 = derivative(advance(s, k1, 0.5 * h), v_i, p, load, cond);
        const StateDerivative k3 = derivative(advance(s, k2, 0.5 * h), v_i, p, load, cond);
        const StateDerivative k4 = derivative(advance(s, k3, h), v_i, p, load, cond);

        StateDerivative total;
        total.di_f = (1.0 / 6.0) * (k1.di_f + 2.0 * k2.di_f + 2.0 * k3.di_f + k4.di_f);
        total.dv_c = (1.0 / 6.0) * (k1.dv_c + 2.0 * k2.dv_c + 2.0 * k3.dv_c + k4.dv_c);
        total.dload_current = (1.0 / 6.0) * (k1.dload_current + 2.0 * k2.dload_current +
                                             2.0 * k3.dload_current + k4.dload_current);
        total.ddc_bus_v = (1.0 / 6.0) * (k1.ddc_bus_v + 2.0 * k2.ddc_bus_v +
                                         2.0 * k3.ddc_bus_v + k4.ddc_bus_v);
        s = advance(s, total, h);
    }
    return s;
}

}  // namespace invctl
