#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace invctl {

enum class HiddenActivation : std::uint32_t { Tanh = 0, Logistic = 1 };

/// Shallow classifier over the seven inverter voltage vectors. Inputs are
/// raw physical features; the stored per-feature affine normalization is
/// applied inside forward().
struct MlpParameters {
    Eigen::MatrixXd w1;  ///< hidden x input
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  ///< output x hidden
    Eigen::VectorXd b2;
    HiddenActivation activation = HiddenActivation::Tanh;
    Eigen::VectorXd feature_mean;   ///< per input feature
    Eigen::VectorXd feature_scale;  ///< per input feature, strictly positive
    std::string feature_layout = "if_vc_io_vref_ab";

    int input_dim() const { return static_cast<int>(w1.cols()); }
    int hidden_dim() const { return static_cast<int>(w1.rows()); }
    int output_dim() const { return static_cast<int>(w2.rows()); }
};

/// One labeled control step: features are (i_f, v_c, i_o, v_ref), alpha
/// before beta for each, and the target is the expert's chosen vector index.
struct TrainingSample {
    Eigen::VectorXd features;
    int target = 0;  ///< 0..6
};

struct TrainConfig {
    int hidden_units = 15;
    HiddenActivation activation = HiddenActivation::Tanh;
    double train_fraction = 0.70;       ///< remainder splits evenly into validation and test
    double validation_fraction = 0.15;  ///< of the whole dataset
    int patience = 50;                  ///< epochs without validation improvement
    int max_epochs = 2000;
    std::uint64_t rng_seed = 1;
    double scg_sigma = 1e-4;
    double scg_lambda0 = 1e-6;
    std::string feature_layout = "if_vc_io_vref_ab";
};

struct TrainReport {
    int final_epoch = 0;
    int best_epoch = 0;
    double best_validation_loss = 0.0;
    double train_loss = 0.0;
    double validation_loss = 0.0;
    double test_loss = 0.0;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::size_t train_rows = 0;
    std::size_t validation_rows = 0;
    std::size_t test_rows = 0;
};

/// Training failed with a non-finite loss.
struct TrainingDivergence : std::runtime_error {
    TrainingDivergence(const std::string& what, int epoch)
        : std::runtime_error(what), epoch(epoch) {}
    int epoch = 0;
};

/// Class probabilities for one raw feature vector. Normalizes the input,
/// applies the hidden activation, and maps output scores onto the
/// probability simplex.
Eigen::VectorXd forward(const MlpParameters& p, const Eigen::VectorXd& features);

/// Batched forward: features are columns of x (input_dim x n).
Eigen::MatrixXd forward_batch(const MlpParameters& p, const Eigen::MatrixXd& x);

/// Gradient with the same shapes as the parameters it differentiates.
struct MlpGradient {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
};

/// Mean cross-entropy of the batch (columns of x, one target per column)
/// and its gradient with respect to the weights and biases. Throws
/// std::invalid_argument on an empty batch.
double loss_and_gradient(const MlpParameters& p, const Eigen::MatrixXd& x,
                         const std::vector<int>& targets, MlpGradient* grad);

/// Fraction of columns whose argmax matches the target.
double accuracy(const MlpParameters& p, const Eigen::MatrixXd& x,
                const std::vector<int>& targets);

/// Most probable class; ties resolve to the lowest index.
int predict_class(const MlpParameters& p, const Eigen::VectorXd& features);

/// Full-batch scaled-conjugate-gradient training with early stopping: the
/// returned parameters are the ones with the lowest recorded validation
/// loss. Deterministic for a fixed config. Throws TrainingDivergence on a
/// non-finite loss and std::invalid_argument on an empty dataset.
std::pair<MlpParameters, TrainReport> train_scg(const std::vector<TrainingSample>& data,
                                                const TrainConfig& cfg);

/// Binary model file, bit-exact round trip. Layout documented in the README.
void serialize_model(const std::string& path, const MlpParameters& p);
MlpParameters deserialize_model(const std::string& path);

/// Throws std::runtime_error naming both shapes when the model does not
/// match the expected layer sizes.
void check_shape(const MlpParameters& p, int input, int hidden, int output);

}  // namespace invctl
