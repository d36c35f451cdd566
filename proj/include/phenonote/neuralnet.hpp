#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phenonote/rng.hpp"

namespace phenonote {

enum class CellType { Dense, Lstm };
enum class Activation { Relu, Tanh };

/// Network shape. Dense cells are fully connected layers with `activation`;
/// LSTM cells are stacked LSTM layers whose last hidden state feeds the
/// output layer. The output layer is always dense + softmax. Dropout (inverted)
/// is applied to every hidden layer's output, never to recurrent connections.
struct NetSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_layers{32, 16, 8, 4, 2, 1};
    CellType cell = CellType::Dense;
    std::size_t output_classes = 2;
    double dropout_rate = 0.0;
    Activation activation = Activation::Relu;

    /// Throws UsageError when a size is zero or dropout is outside [0, 1).
    void validate() const;
};

/// One input: `steps` x input_dim values, row-major. Dense nets need steps == 1.
struct Example {
    std::vector<double> input;
    std::size_t steps = 1;
    int label = 0;
};

struct Tensor {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 1;
    std::vector<double> values;
};

using Gradients = std::vector<std::vector<double>>;

struct ForwardTrace;

class NeuralNet {
public:
    /// All parameters start at zero.
    explicit NeuralNet(NetSpec spec);

    const NetSpec& spec() const { return spec_; }

    /// Glorot-uniform weights, zero biases (LSTM forget-gate bias 1).
    void init_glorot(std::uint64_t seed);
    void zero();

    std::vector<Tensor>& parameters() { return params_; }
    const std::vector<Tensor>& parameters() const { return params_; }
    std::size_t parameter_count() const;
    bool all_finite() const;

    /// Class probabilities. `rng` is only used (and required) when train_mode
    /// and dropout_rate > 0. Throws NumericError naming the layer on a
    /// non-finite activation.
    std::vector<double> forward(std::span<const double> input, std::size_t steps, bool train_mode = false,
                                Rng* rng = nullptr) const;
    std::vector<double> forward(const Example& ex) const { return forward(ex.input, ex.steps); }

    /// Forward pass that keeps what backward() needs.
    ForwardTrace trace(std::span<const double> input, std::size_t steps, bool train_mode, Rng* rng) const;

    /// Accumulate d(loss)/d(params) into `grads` for
    /// loss = class_weight * -log p[target]. Returns the loss.
    double backward(const ForwardTrace& trace, int target, double class_weight, Gradients& grads) const;

    Gradients zero_gradients() const;

    int predict(std::span<const double> input, std::size_t steps) const;
    int predict(const Example& ex) const { return predict(ex.input, ex.steps); }

private:
    void build();

    NetSpec spec_;
    std::vector<Tensor> params_;
};

/// Per-layer caches of one forward pass.
struct ForwardTrace {
    struct DenseLayer {
        std::vector<double> input;
        std::vector<double> pre;   // W a + b
        std::vector<double> mask;  // empty when no dropout
    };
    struct LstmLayer {
        std::size_t steps = 0;
        std::vector<double> input;  // steps x in
        std::vector<double> gates;  // steps x 4h, post-nonlinearity (i, f, g, o)
        std::vector<double> cell;   // (steps + 1) x h, row 0 is the zero state
        std::vector<double> hidden; // (steps + 1) x h, pre-dropout
        std::vector<double> mask;   // steps x h, empty when no dropout
    };
    std::vector<DenseLayer> dense;
    std::vector<LstmLayer> lstm;
    std::vector<double> head_input;
    std::vector<double> logits;
    std::vector<double> probs;
    double log_sum_exp = 0.0;
};

/// Balanced weights N / (n_classes * count_c). Throws DataError if any class
/// in [0, n_classes) has no example.
std::vector<double> compute_class_weights(std::span<const int> labels, std::size_t n_classes);

/// Adam with the usual defaults (beta1 0.9, beta2 0.999, epsilon 1e-7).
class AdamOptimizer {
public:
    explicit AdamOptimizer(const NeuralNet& net, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-7);
    void step(NeuralNet& net, const Gradients& grads, double learning_rate);

private:
    double beta1_, beta2_, epsilon_;
    long t_ = 0;
    Gradients m_, v_;
};

struct TrainerConfig {
    double learning_rate = 0.001;
    double lr_floor = 0.00005;
    double lr_reduce_factor = 0.5;
    int lr_patience = 10;
    int early_stop_patience = 25;
    double min_delta = 1e-4;
    int max_epochs = 500;
    double restart_f1_threshold = 0.6;
    int max_restarts = 5;
    /// Explicit per-class loss weights. When empty, `balance_classes`
    /// chooses between compute_class_weights() and all ones.
    std::vector<double> class_weights;
    bool balance_classes = true;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;      ///< mean weighted loss of the epoch's minibatches
    double monitored_loss = 0.0;  ///< inference-mode loss on validation (or training) data
    double train_f1 = 0.0;
    double learning_rate = 0.0;   ///< rate used during the epoch
};

struct TrainingHistory {
    std::vector<EpochRecord> epochs;
    std::vector<double> initial_f1;  ///< train micro-F1 of each candidate initialization
    int restarts = 0;
    int best_epoch = 0;
    int stopped_epoch = 0;
    bool early_stopped = false;
    std::string monitor;  ///< "val_loss" or "loss"
    double best_monitored_loss = 0.0;
    std::vector<double> class_weights;
};

struct TrainResult {
    NeuralNet net;
    TrainingHistory history;
};

/// Mean weighted cross-entropy in inference mode: sum(w_y * -log p_y) / N.
double weighted_loss(const NeuralNet& net, std::span<const Example> data, std::span<const double> class_weights);

std::vector<int> predict_all(const NeuralNet& net, std::span<const Example> data);

/// Minibatch Adam training with the restart guard, plateau learning-rate
/// reduction (floored), early stopping with best-epoch restore and a hard
/// epoch cap. `net` is used as the first initialization as given.
TrainResult train(NeuralNet net, std::span<const Example> train_set, std::span<const Example> valid_set,
                  const TrainerConfig& config);

std::string net_to_json(const NeuralNet& net, const TrainingHistory* history = nullptr);
NeuralNet net_from_json(const std::string& text);

std::string cell_name(CellType cell);
CellType parse_cell(const std::string& name);

}  // namespace phenonote
