#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "invctl/mpc.hpp"
#include "invctl/nn.hpp"
#include "invctl/scenario.hpp"

namespace invctl {

/// One recorded control step: measured state, reference, and the expert's
/// chosen vector index. i_o is the true simulated output current.
struct DatasetRow {
    std::string scenario_id;
    std::int64_t step = 0;
    AlphaBetaVector i_f;
    AlphaBetaVector v_c;
    AlphaBetaVector i_o;
    AlphaBetaVector v_ref;
    int target = 0;
};

struct Dataset {
    std::vector<DatasetRow> rows;
};

/// Harness options shared by both controllers.
struct LoopOptions {
    int substeps = kDefaultSubsteps;
    bool advance_reference = false;  ///< pass the reference one period ahead
    double blowup_factor = 2.0;      ///< abort when |v_c| exceeds this times vdc
};

/// Student-specific observation options.
struct AnnOptions {
    bool use_estimated_io = false;  ///< feed the backward-difference estimate instead
                                    ///< of the measured output current
    bool delayed_features = false;  ///< append the previous step's eight features
};

struct StepTrace {
    std::int64_t step = 0;
    double t = 0.0;  ///< seconds at the sampling instant
    AlphaBetaVector i_f;
    AlphaBetaVector v_c;
    AlphaBetaVector i_o;
    AlphaBetaVector v_ref;
    int chosen = 0;
    SwitchingState switching;
};

struct ClosedLoopResult {
    std::vector<StepTrace> steps;
    PlantState final_state;
    bool diverged = false;
    std::int64_t last_good_step = -1;  ///< last step whose post-step state passed the guard
};

/// Reference vector at time t: the configured amplitude rotating
/// counterclockwise from the positive alpha axis.
AlphaBetaVector reference_at(const ScenarioConfig& sc, double t);

/// Expert closed loop over the scenario's configured cycle count. Both
/// loops share the same actuation timing: the vector decided at instant k
/// drives the plant over [k, k+1), i.e. computation takes zero time.
ClosedLoopResult run_mpc_loop(const ScenarioConfig& sc, const LoopOptions& opt);

/// Student closed loop, same actuation timing as the expert loop. Throws
/// std::invalid_argument when the model's input width does not match the
/// feature options.
ClosedLoopResult run_ann_loop(const ScenarioConfig& sc, const MlpParameters& model,
                              const LoopOptions& opt, const AnnOptions& ann);

/// One student decision from measured quantities. The prediction fields of
/// the returned decision stay zero; only the class choice is produced.
/// Expects an eight-input model.
MpcDecision ann_control_step(const MlpParameters& model, const AlphaBetaVector& i_f,
                             const AlphaBetaVector& v_c, const AlphaBetaVector& i_o,
                             const AlphaBetaVector& v_ref);

/// Feature vector in the layout the dataset and the models use:
/// (i_f, v_c, i_o, v_ref), alpha before beta.
Eigen::VectorXd make_features(const AlphaBetaVector& i_f, const AlphaBetaVector& v_c,
                              const AlphaBetaVector& i_o, const AlphaBetaVector& v_ref);

/// Runs the expert over every scenario in order and records every step.
/// Throws std::runtime_error naming the scenario if a run diverges.
Dataset collect(const std::vector<ScenarioConfig>& grid, const LoopOptions& opt);

/// Training samples from dataset rows. With delayed features each sample
/// appends the previous row's features, zeros at each scenario's first row.
std::vector<TrainingSample> to_training_samples(const Dataset& d, bool delayed_features);

/// Dataset CSV round trip, round-trip-exact float formatting. Loading
/// validates the header and every field; both throw std::runtime_error.
void save_dataset(const std::string& path, const Dataset& d);
Dataset load_dataset(const std::string& path);

}  // namespace invctl
