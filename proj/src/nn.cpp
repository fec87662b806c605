#include "invctl/nn.hpp"

#include "invctl/scg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <random>
#include <utility>

namespace invctl {

namespace {

constexpr int kNumClasses = 7;
constexpr double kScaleFloor = 1e-12;

Eigen::MatrixXd normalize_batch(const MlpParameters& p, const Eigen::MatrixXd& x) {
    return (x.colwise() - p.feature_mean).array().colwise() / p.feature_scale.array();
}

Eigen::MatrixXd apply_hidden(HiddenActivation act, const Eigen::MatrixXd& z) {
    if (act == HiddenActivation::Tanh) return z.array().tanh();
    // Logistic written through tanh: no large exp() to overflow.
    return 0.5 * (1.0 + (0.5 * z.array()).tanh());
}

struct BatchForward {
    Eigen::MatrixXd xn;  // normalized inputs
    Eigen::MatrixXd h;   // hidden activations
    Eigen::MatrixXd z2;  // output scores
};

BatchForward run_batch(const MlpParameters& p, const Eigen::MatrixXd& x) {
    if (x.rows() != p.input_dim()) {
        throw std::invalid_argument("nn: feature rows " + std::to_string(x.rows()) +
                                    " do not match model input " + std::to_string(p.input_dim()));
    }
    BatchForward f;
    f.xn = normalize_batch(p, x);
    f.h = apply_hidden(p.activation, (p.w1 * f.xn).colwise() + p.b1);
    f.z2 = (p.w2 * f.h).colwise() + p.b2;
    return f;
}

Eigen::Index parameter_count(const MlpParameters& p) {
    return p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size();
}

Eigen::VectorXd pack(const MlpParameters& p) {
    Eigen::VectorXd w(parameter_count(p));
    Eigen::Index o = 0;
    std::copy_n(p.w1.data(), p.w1.size(), w.data() + o);
    o += p.w1.size();
    std::copy_n(p.b1.data(), p.b1.size(), w.data() + o);
    o += p.b1.size();
    std::copy_n(p.w2.data(), p.w2.size(), w.data() + o);
    o += p.w2.size();
    std::copy_n(p.b2.data(), p.b2.size(), w.data() + o);
    return w;
}

void unpack(const Eigen::VectorXd& w, MlpParameters& p) {
    Eigen::Index o = 0;
    std::copy_n(w.data() + o, p.w1.size(), p.w1.data());
    o += p.w1.size();
    std::copy_n(w.data() + o, p.b1.size(), p.b1.data());
    o += p.b1.size();
    std::copy_n(w.data() + o, p.w2.size(), p.w2.data());
    o += p.w2.size();
    std::copy_n(w.data() + o, p.b2.size(), p.b2.data());
}

Eigen::VectorXd pack_gradient(const MlpGradient& g) {
    MlpParameters view;
    view.w1 = g.w1;
    view.b1 = g.b1;
    view.w2 = g.w2;
    view.b2 = g.b2;
    return pack(view);
}

}  // namespace

Eigen::MatrixXd forward_batch(const MlpParameters& p, const Eigen::MatrixXd& x) {
    const BatchForward f = run_batch(p, x);
    const Eigen::RowVectorXd col_max = f.z2.colwise().maxCoeff();
    const Eigen::MatrixXd e = (f.z2.rowwise() - col_max).array().exp();
    const Eigen::RowVectorXd denom = e.colwise().sum();
    return e.array().rowwise() / denom.array();
}

Eigen::VectorXd forward(const MlpParameters& p, const Eigen::VectorXd& features) {
    return forward_batch(p, features);
}

double loss_and_gradient(const MlpParameters& p, const Eigen::MatrixXd& x,
                         const std::vector<int>& targets, MlpGradient* grad) {
    const Eigen::Index n = x.cols();
    if (n == 0) throw std::invalid_argument("loss_and_gradient: empty batch");
    if (static_cast<Eigen::Index>(targets.size()) != n) {
        throw std::invalid_argument("loss_and_gradient: " + std::to_string(targets.size()) +
                                    " targets for " + std::to_string(n) + " samples");
    }
    for (const int t : targets) {
        if (t < 0 || t >= p.output_dim()) {
            throw std::invalid_argument("loss_and_gradient: target " + std::to_string(t) +
                                        " outside [0," + std::to_string(p.output_dim() - 1) + "]");
        }
    }

    const BatchForward f = run_batch(p, x);
    const Eigen::RowVectorXd col_max = f.z2.colwise().maxCoeff();
    const Eigen::MatrixXd shifted = f.z2.rowwise() - col_max;
    const Eigen::MatrixXd e = shifted.array().exp();
    const Eigen::RowVectorXd denom = e.colwise().sum();

    // Compensated accumulation keeps the loss independent of sample order.
    double sum = 0.0;
    double carry = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double term = std::log(denom(j)) - shifted(targets[j], j);
        const double y = term - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    const double loss = sum / static_cast<double>(n);

    if (grad != nullptr) {
        Eigen::MatrixXd dz2 = e.array().rowwise() / denom.array();
        for (Eigen::Index j = 0; j < n; ++j) dz2(targets[j], j) -= 1.0;
        dz2 /= static_cast<double>(n);

        grad->w2 = dz2 * f.h.transpose();
        grad->b2 = dz2.rowwise().sum();
        const Eigen::MatrixXd dh = p.w2.transpose() * dz2;
        Eigen::MatrixXd dz1;
        if (p.activation == HiddenActivation::Tanh) {
            dz1 = dh.array() * (1.0 - f.h.array().square());
        } else {
            dz1 = dh.array() * (f.h.array() * (1.0 - f.h.array()));
        }
        grad->w1 = dz1 * f.xn.transpose();
        grad->b1 = dz1.rowwise().sum();
    }
    return loss;
}

namespace {

int argmax_lowest(const Eigen::MatrixXd& probs, Eigen::Index col) {
    int best = 0;
    for (int r = 1; r < probs.rows(); ++r) {
        if (probs(r, col) > probs(best, col)) best = r;  // ties keep the lowest index
    }
    return best;
}

}  // namespace

double accuracy(const MlpParameters& p, const Eigen::MatrixXd& x,
                const std::vector<int>& targets) {
    const Eigen::Index n = x.cols();
    if (n == 0) throw std::invalid_argument("accuracy: empty batch");
    if (static_cast<Eigen::Index>(targets.size()) != n) {
        throw std::invalid_argument("accuracy: target count does not match batch");
    }
    const Eigen::MatrixXd probs = forward_batch(p, x);
    Eigen::Index correct = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (argmax_lowest(probs, j) == targets[j]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

int predict_class(const MlpParameters& p, const Eigen::VectorXd& features) {
    return argmax_lowest(forward_batch(p, features), 0);
}

std::pair<MlpParameters, TrainReport> train_scg(const std::vector<TrainingSample>& data,
                                                const TrainConfig& cfg) {
    const std::size_t n = data.size();
    if (n == 0) throw std::invalid_argument("train_scg: empty dataset");
    if (cfg.hidden_units < 1) throw std::invalid_argument("train_scg: hidden_units must be >= 1");
    if (cfg.patience < 1) throw std::invalid_argument("train_scg: patience must be >= 1");
    if (cfg.max_epochs < 1) throw std::invalid_argument("train_scg: max_epochs must be >= 1");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) ||
        !(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0) ||
        cfg.train_fraction + cfg.validation_fraction > 1.0) {
        throw std::invalid_argument("train_scg: split fractions must lie in (0,1) and sum to <= 1");
    }

    const Eigen::Index input_dim = data.front().features.size();
    for (const TrainingSample& s : data) {
        if (s.features.size() != input_dim) {
            throw std::invalid_argument("train_scg: inconsistent feature dimensions");
        }
        if (!s.features.allFinite()) throw std::invalid_argument("train_scg: non-finite feature");
        if (s.target < 0 || s.target >= kNumClasses) {
            throw std::invalid_argument("train_scg: target outside [0,6]");
        }
    }

    std::mt19937_64 rng(cfg.rng_seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    std::size_t n_train = static_cast<std::size_t>(std::llround(cfg.train_fraction * n));
    n_train = std::clamp<std::size_t>(n_train, 1, n);
    std::size_t n_val = static_cast<std::size_t>(std::llround(cfg.validation_fraction * n));
    n_val = std::min(n_val, n - n_train);
    const std::size_t n_test = n - n_train - n_val;

    const auto fill = [&](std::size_t begin, std::size_t count, Eigen::MatrixXd& x,
                          std::vector<int>& t) {
        x.resize(input_dim, count);
        t.resize(count);
        for (std::size_t j = 0; j < count; ++j) {
            const TrainingSample& s = data[order[begin + j]];
            x.col(j) = s.features;
            t[j] = s.target;
        }
    };
    Eigen::MatrixXd x_train, x_val, x_test;
    std::vector<int> t_train, t_val, t_test;
    fill(0, n_train, x_train, t_train);
    fill(n_train, n_val, x_val, t_val);
    fill(n_train + n_val, n_test, x_test, t_test);

    // z-score from the training split only; constant features keep scale 1.
    const Eigen::VectorXd mean = x_train.rowwise().mean();
    const Eigen::VectorXd stddev =
        ((x_train.colwise() - mean).array().square().rowwise().mean()).sqrt();
    Eigen::VectorXd scale(input_dim);
    for (Eigen::Index i = 0; i < input_dim; ++i) {
        scale(i) = stddev(i) > kScaleFloor ? stddev(i) : 1.0;
    }
    x_train = (x_train.colwise() - mean).array().colwise() / scale.array();
    if (n_val > 0) x_val = (x_val.colwise() - mean).array().colwise() / scale.array();
    if (n_test > 0) x_test = (x_test.colwise() - mean).array().colwise() / scale.array();

    // Optimize with identity normalization over pre-normalized splits; the
    // real constants are attached to the returned model afterwards.
    MlpParameters model;
    model.activation = cfg.activation;
    model.feature_layout = cfg.feature_layout;
    model.w1.resize(cfg.hidden_units, input_dim);
    model.b1 = Eigen::VectorXd::Zero(cfg.hidden_units);
    model.w2.resize(kNumClasses, cfg.hidden_units);
    model.b2 = Eigen::VectorXd::Zero(kNumClasses);
    model.feature_mean = Eigen::VectorXd::Zero(input_dim);
    model.feature_scale = Eigen::VectorXd::Ones(input_dim);

    const double r1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_units));
    std::uniform_real_distribution<double> u1(-r1, r1);
    std::uniform_real_distribution<double> u2(-r2, r2);
    std::generate_n(model.w1.data(), model.w1.size(), [&] { return u1(rng); });
    std::generate_n(model.w2.data(), model.w2.size(), [&] { return u2(rng); });

    MlpParameters scratch = model;
    const auto objective = [&](const Eigen::VectorXd& w, Eigen::VectorXd* g) -> double {
        unpack(w, scratch);
        if (g == nullptr) return loss_and_gradient(scratch, x_train, t_train, nullptr);
        MlpGradient mg;
        const double loss = loss_and_gradient(scratch, x_train, t_train, &mg);
        *g = pack_gradient(mg);
        return loss;
    };
    const auto validation_loss = [&](const Eigen::VectorXd& w) -> double {
        unpack(w, scratch);
        return n_val > 0 ? loss_and_gradient(scratch, x_val, t_val, nullptr)
                         : loss_and_gradient(scratch, x_train, t_train, nullptr);
    };

    Eigen::VectorXd w0 = pack(model);
    Eigen::VectorXd best_w = w0;
    double best_val = validation_loss(w0);
    int best_epoch = 0;
    int since_best = 0;
    int last_epoch = 0;

    const auto callback = [&](const ScgIterate& it, const Eigen::VectorXd& w) -> bool {
        last_epoch = it.iteration;
        const double vl = validation_loss(w);
        if (vl < best_val) {
            best_val = vl;
            best_w = w;
            best_epoch = it.iteration;
            since_best = 0;
            return true;
        }
        return ++since_best < cfg.patience;
    };

    ScgOptions opt;
    opt.sigma = cfg.scg_sigma;
    opt.lambda0 = cfg.scg_lambda0;
    opt.max_iterations = cfg.max_epochs;
    ScgResult res;
    try {
        res = scg_minimize(objective, std::move(w0), opt, callback);
    } catch (const std::runtime_error& e) {
        throw TrainingDivergence(e.what(), last_epoch);
    }

    TrainReport rep;
    rep.final_epoch = last_epoch;
    rep.best_epoch = best_epoch;
    rep.best_validation_loss = best_val;
    rep.train_rows = n_train;
    rep.validation_rows = n_val;
    rep.test_rows = n_test;
    // Validation loss at the stop epoch, before restoring the best weights.
    rep.validation_loss = validation_loss(res.w);

    unpack(best_w, scratch);
    rep.train_loss = loss_and_gradient(scratch, x_train, t_train, nullptr);
    rep.train_accuracy = accuracy(scratch, x_train, t_train);
    if (n_val > 0) rep.validation_accuracy = accuracy(scratch, x_val, t_val);
    if (n_test > 0) {
        rep.test_loss = loss_and_gradient(scratch, x_test, t_test, nullptr);
        rep.test_accuracy = accuracy(scratch, x_test, t_test);
    }

    unpack(best_w, model);
    model.feature_mean = mean;
    model.feature_scale = scale;
    return {std::move(model), rep};
}

namespace {

constexpr char kMagic[8] = {'I', 'N', 'V', 'C', 'T', 'L', 'N', 'N'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kMaxDim = 1u << 20;

void write_raw(std::ostream& out, const void* p, std::size_t bytes) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
}

void write_u32(std::ostream& out, std::uint32_t v) { write_raw(out, &v, sizeof v); }

void write_row_major(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double v = m(r, c);
            write_raw(out, &v, sizeof v);
        }
    }
}

void read_raw(std::istream& in, void* p, std::size_t bytes) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
    if (!in) throw std::runtime_error("deserialize_model: truncated file");
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    read_raw(in, &v, sizeof v);
    return v;
}

void read_row_major(std::istream& in, Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            read_raw(in, &m(r, c), sizeof(double));
        }
    }
}

std::string shape_string(int input, int hidden, int output) {
    return std::to_string(input) + "-" + std::to_string(hidden) + "-" + std::to_string(output);
}

}  // namespace

void serialize_model(const std::string& path, const MlpParameters& p) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("serialize_model: cannot open " + path);
    write_raw(out, kMagic, sizeof kMagic);
    write_u32(out, kFormatVersion);
    write_u32(out, static_cast<std::uint32_t>(p.activation));
    write_u32(out, static_cast<std::uint32_t>(p.input_dim()));
    write_u32(out, static_cast<std::uint32_t>(p.hidden_dim()));
    write_u32(out, static_cast<std::uint32_t>(p.output_dim()));
    write_u32(out, static_cast<std::uint32_t>(p.feature_layout.size()));
    write_raw(out, p.feature_layout.data(), p.feature_layout.size());
    write_row_major(out, p.feature_mean);
    write_row_major(out, p.feature_scale);
    write_row_major(out, p.w1);
    write_row_major(out, p.b1);
    write_row_major(out, p.w2);
    write_row_major(out, p.b2);
    out.flush();
    if (!out) throw std::runtime_error("serialize_model: write failed for " + path);
}

MlpParameters deserialize_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("deserialize_model: cannot open " + path);
    char magic[8] = {};
    read_raw(in, magic, sizeof magic);
    if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
        throw std::runtime_error("deserialize_model: not a model file (bad magic)");
    }
    const std::uint32_t version = read_u32(in);
    if (version != kFormatVersion) {
        throw std::runtime_error("deserialize_model: unsupported format version " +
                                 std::to_string(version));
    }
    const std::uint32_t act = read_u32(in);
    if (act > 1) throw std::runtime_error("deserialize_model: unknown activation tag");
    const std::uint32_t input = read_u32(in);
    const std::uint32_t hidden = read_u32(in);
    const std::uint32_t output = read_u32(in);
    if (input == 0 || hidden == 0 || output == 0 || input > kMaxDim || hidden > kMaxDim ||
        output > kMaxDim) {
        throw std::runtime_error("deserialize_model: implausible layer sizes");
    }
    const std::uint32_t layout_len = read_u32(in);
    if (layout_len > 4096) throw std::runtime_error("deserialize_model: implausible layout tag");

    MlpParameters p;
    p.activation = static_cast<HiddenActivation>(act);
    p.feature_layout.resize(layout_len);
    if (layout_len > 0) read_raw(in, p.feature_layout.data(), layout_len);
    p.feature_mean.resize(input);
    p.feature_scale.resize(input);
    p.w1.resize(hidden, input);
    p.b1.resize(hidden);
    p.w2.resize(output, hidden);
    p.b2.resize(output);
    Eigen::MatrixXd buf;
    const auto read_vec = [&](Eigen::VectorXd& v) {
        buf.resize(v.size(), 1);
        read_row_major(in, buf);
        v = buf.col(0);
    };
    read_vec(p.feature_mean);
    read_vec(p.feature_scale);
    read_row_major(in, p.w1);
    read_vec(p.b1);
    read_row_major(in, p.w2);
    read_vec(p.b2);
    if (in.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error("deserialize_model: trailing bytes after payload");
    }
    return p;
}

void check_shape(const MlpParameters& p, int input, int hidden, int output) {
    if (p.input_dim() != input || p.hidden_dim() != hidden || p.output_dim() != output) {
        throw std::runtime_error("model shape " +
                                 shape_string(p.input_dim(), p.hidden_dim(), p.output_dim()) +
                                 " does not match expected " +
                                 shape_string(input, hidden, output));
    }
    if (p.b1.size() != p.hidden_dim() || p.b2.size() != p.output_dim() ||
        p.feature_mean.size() != p.input_dim() || p.feature_scale.size() != p.input_dim()) {
        throw std::runtime_error("model shape is internally inconsistent");
    }
}

}  // namespace invctl
