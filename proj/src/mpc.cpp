#include "invctl/mpc.hpp"

#include <limits>

namespace invctl {

double cost(const AlphaBetaVector& v_ref, const AlphaBetaVector& v_pred) {
    return (v_ref - v_pred).squared_norm();
}

MpcDecision control_step(MpcState& mpc, const AlphaBetaVector& i_f,
                         const AlphaBetaVector& v_c, const AlphaBetaVector& v_ref,
                         const DiscreteModel& model, const FilterParams& p) {
    const AlphaBetaVector i_o =
        estimate_output_current(mpc.i_f_prev, v_c, mpc.v_c_prev, p);

    const auto candidates = enumerate_distinct_vectors(p.vdc);
    const FilterState x{i_f, v_c};

    MpcDecision best;
    double j_opt = std::numeric_limits<double>::infinity();
    for (int l = 0; l < static_cast<int>(candidates.size()); ++l) {
        const FilterState next = predict(model, x, candidates[l].v, i_o);
        const double j = cost(v_ref, next.v_c);
        if (j < j_opt) {
            j_opt = j;
            best.optimal_index = l;
            best.switching = candidates[l].state;
            best.cost = j;
            best.predicted_v_c = next.v_c;
        }
    }
    best.estimated_i_o = i_o;

    mpc.i_f_prev = i_f;
    mpc.v_c_prev = v_c;
    mpc.first_step = false;
    return best;
}

}  // namespace invctl
