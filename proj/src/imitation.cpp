#include "invctl/imitation.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "invctl/io_util.hpp"

namespace invctl {

namespace {

constexpr char kDatasetHeader[] =
    "scenario_id,step,if_a,if_b,vc_a,vc_b,io_a,io_b,vref_a,vref_b,target";

std::int64_t scenario_steps(const ScenarioConfig& sc) {
    return std::llround(sc.cycles / (sc.frequency * sc.ts));
}

bool state_ok(const PlantState& s, const ScenarioConfig& sc, double blowup_factor) {
    const double limit = blowup_factor * sc.vdc;
    return std::isfinite(s.i_f.alpha) && std::isfinite(s.i_f.beta) &&
           std::isfinite(s.v_c.alpha) && std::isfinite(s.v_c.beta) && s.v_c.norm() <= limit;
}

/// decide(step, i_f, v_c, i_o, v_ref) -> chosen vector index.
ClosedLoopResult run_loop(const ScenarioConfig& sc, const LoopOptions& opt,
                          const std::function<int(std::int64_t, const AlphaBetaVector&,
                                                  const AlphaBetaVector&, const AlphaBetaVector&,
                                                  const AlphaBetaVector&)>& decide) {
    sc.validate();
    if (opt.substeps < 1) throw std::invalid_argument("run_loop: substeps must be >= 1");

    const auto candidates = enumerate_distinct_vectors(sc.vdc);
    const FilterParams params = sc.filter();
    const std::int64_t total = scenario_steps(sc);

    ClosedLoopResult out;
    out.steps.reserve(static_cast<std::size_t>(total));
    PlantState state;

    for (std::int64_t k = 0; k < total; ++k) {
        const double t = static_cast<double>(k) * sc.ts;
        const AlphaBetaVector i_o = output_current(state, sc.load);
        const AlphaBetaVector v_ref = reference_at(sc, opt.advance_reference ? t + sc.ts : t);

        StepTrace trace;
        trace.step = k;
        trace.t = t;
        trace.i_f = state.i_f;
        trace.v_c = state.v_c;
        trace.i_o = i_o;
        trace.v_ref = v_ref;
        trace.chosen = decide(k, state.i_f, state.v_c, i_o, v_ref);
        trace.switching = candidates[static_cast<std::size_t>(trace.chosen)].state;
        out.steps.push_back(trace);

        // The decided vector drives the plant over [k, k+1): computation is
        // treated as instantaneous. An uncompensated one-period actuation
        // lag self-oscillates on this lossless plant at light load, so the
        // idealized timing is the one that keeps the loop well posed.
        state = step_truth(state, trace.switching, params, sc.load, opt.substeps);
        if (!state_ok(state, sc, opt.blowup_factor)) {
            out.diverged = true;
            out.last_good_step = k - 1;
            break;
        }
        out.last_good_step = k;
    }
    out.final_state = state;
    return out;
}

}  // namespace

AlphaBetaVector reference_at(const ScenarioConfig& sc, double t) {
    const double theta = 2.0 * std::numbers::pi * sc.frequency * t;
    return {sc.vref_amplitude * std::cos(theta), sc.vref_amplitude * std::sin(theta)};
}

ClosedLoopResult run_mpc_loop(const ScenarioConfig& sc, const LoopOptions& opt) {
    const DiscreteModel model = discretize(sc.filter());
    const FilterParams params = sc.filter();
    MpcState mpc;
    return run_loop(sc, opt,
                    [&](std::int64_t, const AlphaBetaVector& i_f, const AlphaBetaVector& v_c,
                        const AlphaBetaVector&, const AlphaBetaVector& v_ref) {
                        return control_step(mpc, i_f, v_c, v_ref, model, params).optimal_index;
                    });
}

ClosedLoopResult run_ann_loop(const ScenarioConfig& sc, const MlpParameters& model,
                              const LoopOptions& opt, const AnnOptions& ann) {
    const int expected = ann.delayed_features ? 16 : 8;
    if (model.input_dim() != expected) {
        throw std::invalid_argument("run_ann_loop: model expects " +
                                    std::to_string(model.input_dim()) + " inputs, options need " +
                                    std::to_string(expected));
    }
    const FilterParams params = sc.filter();
    AlphaBetaVector i_f_prev;
    AlphaBetaVector v_c_prev;
    Eigen::VectorXd prev_features = Eigen::VectorXd::Zero(8);
    bool first = true;

    return run_loop(sc, opt,
                    [&](std::int64_t, const AlphaBetaVector& i_f, const AlphaBetaVector& v_c,
                        const AlphaBetaVector& i_o_true, const AlphaBetaVector& v_ref) {
                        AlphaBetaVector i_o = i_o_true;
                        if (ann.use_estimated_io) {
                            i_o = first ? AlphaBetaVector{}
                                        : estimate_output_current(i_f_prev, v_c, v_c_prev, params);
                        }
                        Eigen::VectorXd features = make_features(i_f, v_c, i_o, v_ref);
                        if (ann.delayed_features) {
                            Eigen::VectorXd full(16);
                            full << features, prev_features;
                            prev_features = features;
                            features = std::move(full);
                        }
                        i_f_prev = i_f;
                        v_c_prev = v_c;
                        first = false;
                        return predict_class(model, features);
                    });
}

MpcDecision ann_control_step(const MlpParameters& model, const AlphaBetaVector& i_f,
                             const AlphaBetaVector& v_c, const AlphaBetaVector& i_o,
                             const AlphaBetaVector& v_ref) {
    if (model.input_dim() != 8) {
        throw std::invalid_argument("ann_control_step: expects an eight-input model");
    }
    MpcDecision d;
    d.optimal_index = predict_class(model, make_features(i_f, v_c, i_o, v_ref));
    d.switching = enumerate_distinct_vectors(1.0)[static_cast<std::size_t>(d.optimal_index)].state;
    d.estimated_i_o = i_o;
    return d;
}

Eigen::VectorXd make_features(const AlphaBetaVector& i_f, const AlphaBetaVector& v_c,
                              const AlphaBetaVector& i_o, const AlphaBetaVector& v_ref) {
    Eigen::VectorXd f(8);
    f << i_f.alpha, i_f.beta, v_c.alpha, v_c.beta, i_o.alpha, i_o.beta, v_ref.alpha, v_ref.beta;
    return f;
}

Dataset collect(const std::vector<ScenarioConfig>& grid, const LoopOptions& opt) {
    Dataset d;
    for (const ScenarioConfig& sc : grid) {
        const ClosedLoopResult res = run_mpc_loop(sc, opt);
        if (res.diverged) {
            throw std::runtime_error("collect: scenario '" + sc.id + "' diverged at step " +
                                     std::to_string(res.last_good_step + 1));
        }
        for (const StepTrace& s : res.steps) {
            d.rows.push_back(DatasetRow{sc.id, s.step, s.i_f, s.v_c, s.i_o, s.v_ref, s.chosen});
        }
    }
    return d;
}

std::vector<TrainingSample> to_training_samples(const Dataset& d, bool delayed_features) {
    std::vector<TrainingSample> out;
    out.reserve(d.rows.size());
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(8);
    const std::string* prev_id = nullptr;
    for (const DatasetRow& r : d.rows) {
        Eigen::VectorXd f = make_features(r.i_f, r.v_c, r.i_o, r.v_ref);
        if (!delayed_features) {
            out.push_back(TrainingSample{std::move(f), r.target});
            continue;
        }
        if (prev_id == nullptr || *prev_id != r.scenario_id) prev.setZero();
        Eigen::VectorXd full(16);
        full << f, prev;
        prev = std::move(f);
        prev_id = &r.scenario_id;
        out.push_back(TrainingSample{std::move(full), r.target});
    }
    return out;
}

void save_dataset(const std::string& path, const Dataset& d) {
    std::ostringstream body;
    body << kDatasetHeader << '\n';
    for (const DatasetRow& r : d.rows) {
        body << r.scenario_id << ',' << r.step << ',' << format_double(r.i_f.alpha) << ','
             << format_double(r.i_f.beta) << ',' << format_double(r.v_c.alpha) << ','
             << format_double(r.v_c.beta) << ',' << format_double(r.i_o.alpha) << ','
             << format_double(r.i_o.beta) << ',' << format_double(r.v_ref.alpha) << ','
             << format_double(r.v_ref.beta) << ',' << r.target << '\n';
    }
    write_text_file(path, std::move(body).str());
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset " + path);
    std::string line;
    if (!std::getline(in, line) || line != kDatasetHeader) {
        throw std::runtime_error("dataset " + path + ": unexpected header");
    }
    Dataset d;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 11) {
            throw std::runtime_error("dataset " + path + " line " + std::to_string(line_no) +
                                     ": expected 11 fields, got " + std::to_string(f.size()));
        }
        try {
            DatasetRow r;
            r.scenario_id = f[0];
            r.step = parse_integer(f[1]);
            r.i_f = {parse_double(f[2]), parse_double(f[3])};
            r.v_c = {parse_double(f[4]), parse_double(f[5])};
            r.i_o = {parse_double(f[6]), parse_double(f[7])};
            r.v_ref = {parse_double(f[8]), parse_double(f[9])};
            const long long target = parse_integer(f[10]);
            if (target < 0 || target > 6) throw std::invalid_argument("target outside [0,6]");
            r.target = static_cast<int>(target);
            d.rows.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("dataset " + path + " line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
    }
    return d;
}

}  // namespace invctl
