#include "phenonote/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "phenonote/error.hpp"
#include "phenonote/metrics.hpp"

namespace phenonote {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double activate(Activation act, double x) {
    return act == Activation::Relu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

// Derivative expressed through the pre-activation.
double activate_grad(Activation act, double pre) {
    if (act == Activation::Relu) {
        return pre > 0.0 ? 1.0 : 0.0;
    }
    const double t = std::tanh(pre);
    return 1.0 - t * t;
}

// out = W x + b, W is rows x cols row-major
void affine(const std::vector<double>& w, const std::vector<double>& b, std::span<const double> x,
            std::size_t rows, std::size_t cols, std::span<double> out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* wr = w.data() + r * cols;
        double acc = b[r];
        for (std::size_t c = 0; c < cols; ++c) {
            acc += wr[c] * x[c];
        }
        out[r] = acc;
    }
}

void check_finite(std::span<const double> v, std::size_t layer, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError("non-finite " + std::string(what) + " at layer " + std::to_string(layer));
        }
    }
}

std::vector<double> dropout_mask(std::size_t n, double rate, Rng& rng) {
    const double keep = 1.0 - rate;
    std::vector<double> mask(n);
    for (double& m : mask) {
        m = rng.uniform() < keep ? 1.0 / keep : 0.0;
    }
    return mask;
}

}  // namespace

void NetSpec::validate() const {
    if (input_dim == 0 || output_classes == 0) {
        throw UsageError("network input and output sizes must be at least 1");
    }
    if (hidden_layers.empty()) {
        throw UsageError("network needs at least one hidden layer");
    }
    for (auto h : hidden_layers) {
        if (h == 0) {
            throw UsageError("hidden layer sizes must be at least 1");
        }
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw UsageError("dropout rate must be in [0, 1)");
    }
}

NeuralNet::NeuralNet(NetSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    build();
}

void NeuralNet::build() {
    params_.clear();
    std::size_t in = spec_.input_dim;
    for (std::size_t l = 0; l < spec_.hidden_layers.size(); ++l) {
        const std::size_t h = spec_.hidden_layers[l];
        const std::string prefix = (spec_.cell == CellType::Dense ? "dense" : "lstm") + std::to_string(l);
        if (spec_.cell == CellType::Dense) {
            params_.push_back({prefix + ".W", h, in, std::vector<double>(h * in, 0.0)});
            params_.push_back({prefix + ".b", h, 1, std::vector<double>(h, 0.0)});
        } else {
            params_.push_back({prefix + ".W", 4 * h, in, std::vector<double>(4 * h * in, 0.0)});
            params_.push_back({prefix + ".U", 4 * h, h, std::vector<double>(4 * h * h, 0.0)});
            params_.push_back({prefix + ".b", 4 * h, 1, std::vector<double>(4 * h, 0.0)});
        }
        in = h;
    }
    const std::size_t k = spec_.output_classes;
    params_.push_back({"output.W", k, in, std::vector<double>(k * in, 0.0)});
    params_.push_back({"output.b", k, 1, std::vector<double>(k, 0.0)});
}

void NeuralNet::zero() {
    for (auto& p : params_) {
        std::fill(p.values.begin(), p.values.end(), 0.0);
    }
}

void NeuralNet::init_glorot(std::uint64_t seed) {
    Rng rng(seed);
    auto glorot = [&](Tensor& t, std::size_t fan_in, std::size_t fan_out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : t.values) {
            v = rng.uniform(-limit, limit);
        }
    };
    for (auto& p : params_) {
        if (p.cols == 1 && p.name.ends_with(".b")) {
            std::fill(p.values.begin(), p.values.end(), 0.0);
            if (spec_.cell == CellType::Lstm && p.name.starts_with("lstm")) {
                const std::size_t h = p.rows / 4;
                std::fill(p.values.begin() + static_cast<std::ptrdiff_t>(h),
                          p.values.begin() + static_cast<std::ptrdiff_t>(2 * h), 1.0);
            }
        } else {
            // Gate matrices: fan-out counts all four gates.
            glorot(p, p.cols, p.rows);
        }
    }
}

std::size_t NeuralNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) {
        n += p.values.size();
    }
    return n;
}

bool NeuralNet::all_finite() const {
    for (const auto& p : params_) {
        for (double v : p.values) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
    }
    return true;
}

Gradients NeuralNet::zero_gradients() const {
    Gradients g;
    g.reserve(params_.size());
    for (const auto& p : params_) {
        g.emplace_back(p.values.size(), 0.0);
    }
    return g;
}

ForwardTrace NeuralNet::trace(std::span<const double> input, std::size_t steps, bool train_mode, Rng* rng) const {
    const bool drop = train_mode && spec_.dropout_rate > 0.0;
    if (drop && rng == nullptr) {
        throw UsageError("dropout in train mode needs a random generator");
    }
    if (steps == 0 || input.size() != steps * spec_.input_dim) {
        throw DataError("network input has " + std::to_string(input.size()) + " values, expected " +
                        std::to_string(spec_.input_dim) + " per step");
    }
    if (spec_.cell == CellType::Dense && steps != 1) {
        throw DataError("dense network cannot take a sequence input");
    }

    ForwardTrace tr;
    const std::size_t n_hidden = spec_.hidden_layers.size();
    std::vector<double> current(input.begin(), input.end());

    if (spec_.cell == CellType::Dense) {
        tr.dense.resize(n_hidden);
        for (std::size_t l = 0; l < n_hidden; ++l) {
            const auto& w = params_[2 * l];
            const auto& b = params_[2 * l + 1];
            auto& layer = tr.dense[l];
            layer.input = current;
            layer.pre.assign(w.rows, 0.0);
            affine(w.values, b.values, current, w.rows, w.cols, layer.pre);
            std::vector<double> out(w.rows);
            for (std::size_t i = 0; i < w.rows; ++i) {
                out[i] = activate(spec_.activation, layer.pre[i]);
            }
            if (drop) {
                layer.mask = dropout_mask(out.size(), spec_.dropout_rate, *rng);
                for (std::size_t i = 0; i < out.size(); ++i) {
                    out[i] *= layer.mask[i];
                }
            }
            check_finite(out, l, "activation");
            current = std::move(out);
        }
    } else {
        tr.lstm.resize(n_hidden);
        std::size_t in_dim = spec_.input_dim;
        for (std::size_t l = 0; l < n_hidden; ++l) {
            const std::size_t h = spec_.hidden_layers[l];
            const auto& w = params_[3 * l];
            const auto& u = params_[3 * l + 1];
            const auto& b = params_[3 * l + 2];
            auto& layer = tr.lstm[l];
            layer.steps = steps;
            layer.input = current;
            layer.gates.assign(steps * 4 * h, 0.0);
            layer.cell.assign((steps + 1) * h, 0.0);
            layer.hidden.assign((steps + 1) * h, 0.0);
            std::vector<double> pre(4 * h);
            for (std::size_t t = 0; t < steps; ++t) {
                std::span<const double> x(layer.input.data() + t * in_dim, in_dim);
                std::span<const double> h_prev(layer.hidden.data() + t * h, h);
                affine(w.values, b.values, x, 4 * h, in_dim, pre);
                for (std::size_t r = 0; r < 4 * h; ++r) {
                    const double* ur = u.values.data() + r * h;
                    double acc = 0.0;
                    for (std::size_t c = 0; c < h; ++c) {
                        acc += ur[c] * h_prev[c];
                    }
                    pre[r] += acc;
                }
                double* g = layer.gates.data() + t * 4 * h;
                for (std::size_t j = 0; j < h; ++j) {
                    g[j] = sigmoid(pre[j]);                  // input
                    g[h + j] = sigmoid(pre[h + j]);          // forget
                    g[2 * h + j] = std::tanh(pre[2 * h + j]); // candidate
                    g[3 * h + j] = sigmoid(pre[3 * h + j]);  // output
                }
                const double* c_prev = layer.cell.data() + t * h;
                double* c_now = layer.cell.data() + (t + 1) * h;
                double* h_now = layer.hidden.data() + (t + 1) * h;
                for (std::size_t j = 0; j < h; ++j) {
                    c_now[j] = g[h + j] * c_prev[j] + g[j] * g[2 * h + j];
                    h_now[j] = g[3 * h + j] * std::tanh(c_now[j]);
                }
            }
            check_finite(layer.hidden, l, "hidden state");
            std::vector<double> out(layer.hidden.begin() + static_cast<std::ptrdiff_t>(h), layer.hidden.end());
            if (drop) {
                layer.mask = dropout_mask(out.size(), spec_.dropout_rate, *rng);
                for (std::size_t i = 0; i < out.size(); ++i) {
                    out[i] *= layer.mask[i];
                }
            }
            current = std::move(out);
            in_dim = h;
        }
        // Only the final time step feeds the classifier head.
        const std::size_t h = spec_.hidden_layers.back();
        current.erase(current.begin(), current.end() - static_cast<std::ptrdiff_t>(h));
    }

    const auto& wo = params_[params_.size() - 2];
    const auto& bo = params_[params_.size() - 1];
    tr.head_input = current;
    tr.logits.assign(wo.rows, 0.0);
    affine(wo.values, bo.values, current, wo.rows, wo.cols, tr.logits);
    check_finite(tr.logits, n_hidden, "logit");

    const double mx = *std::max_element(tr.logits.begin(), tr.logits.end());
    double sum = 0.0;
    tr.probs.resize(tr.logits.size());
    for (std::size_t k = 0; k < tr.logits.size(); ++k) {
        tr.probs[k] = std::exp(tr.logits[k] - mx);
        sum += tr.probs[k];
    }
    for (double& p : tr.probs) {
        p /= sum;
    }
    tr.log_sum_exp = mx + std::log(sum);
    return tr;
}

std::vector<double> NeuralNet::forward(std::span<const double> input, std::size_t steps, bool train_mode,
                                       Rng* rng) const {
    return trace(input, steps, train_mode, rng).probs;
}

int NeuralNet::predict(std::span<const double> input, std::size_t steps) const {
    const auto p = forward(input, steps);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double NeuralNet::backward(const ForwardTrace& tr, int target, double class_weight, Gradients& grads) const {
    const std::size_t k_out = spec_.output_classes;
    if (target < 0 || static_cast<std::size_t>(target) >= k_out) {
        throw DataError("target class " + std::to_string(target) + " out of range");
    }
    const std::size_t n_p = params_.size();
    const double loss = class_weight * (tr.log_sum_exp - tr.logits[static_cast<std::size_t>(target)]);

    // Output layer.
    std::vector<double> dlogits(k_out);
    for (std::size_t k = 0; k < k_out; ++k) {
        dlogits[k] = class_weight * (tr.probs[k] - (static_cast<std::size_t>(target) == k ? 1.0 : 0.0));
    }
    const auto& wo = params_[n_p - 2];
    auto& gwo = grads[n_p - 2];
    auto& gbo = grads[n_p - 1];
    std::vector<double> dcur(wo.cols, 0.0);
    for (std::size_t r = 0; r < k_out; ++r) {
        gbo[r] += dlogits[r];
        for (std::size_t c = 0; c < wo.cols; ++c) {
            gwo[r * wo.cols + c] += dlogits[r] * tr.head_input[c];
            dcur[c] += wo.values[r * wo.cols + c] * dlogits[r];
        }
    }

    const std::size_t n_hidden = spec_.hidden_layers.size();
    if (spec_.cell == CellType::Dense) {
        for (std::size_t l = n_hidden; l-- > 0;) {
            const auto& layer = tr.dense[l];
            const auto& w = params_[2 * l];
            auto& gw = grads[2 * l];
            auto& gb = grads[2 * l + 1];
            std::vector<double> dprev(w.cols, 0.0);
            for (std::size_t r = 0; r < w.rows; ++r) {
                double d = dcur[r];
                if (!layer.mask.empty()) {
                    d *= layer.mask[r];
                }
                d *= activate_grad(spec_.activation, layer.pre[r]);
                if (d == 0.0) {
                    continue;
                }
                gb[r] += d;
                const double* wr = w.values.data() + r * w.cols;
                double* gwr = gw.data() + r * w.cols;
                for (std::size_t c = 0; c < w.cols; ++c) {
                    gwr[c] += d * layer.input[c];
                    dprev[c] += wr[c] * d;
                }
            }
            dcur = std::move(dprev);
        }
        return loss;
    }

    // LSTM stack. dseq holds the gradient w.r.t. a layer's (post-dropout)
    // output sequence.
    const std::size_t steps = tr.lstm.front().steps;
    std::size_t h_top = spec_.hidden_layers.back();
    std::vector<double> dseq(steps * h_top, 0.0);
    std::copy(dcur.begin(), dcur.end(), dseq.begin() + static_cast<std::ptrdiff_t>((steps - 1) * h_top));

    for (std::size_t l = n_hidden; l-- > 0;) {
        const auto& layer = tr.lstm[l];
        const std::size_t h = spec_.hidden_layers[l];
        const auto& w = params_[3 * l];
        const auto& u = params_[3 * l + 1];
        const std::size_t in_dim = w.cols;
        auto& gw = grads[3 * l];
        auto& gu = grads[3 * l + 1];
        auto& gb = grads[3 * l + 2];

        if (!layer.mask.empty()) {
            for (std::size_t i = 0; i < dseq.size(); ++i) {
                dseq[i] *= layer.mask[i];
            }
        }
        std::vector<double> dinput(steps * in_dim, 0.0);
        std::vector<double> dh_next(h, 0.0);
        std::vector<double> dc_next(h, 0.0);
        std::vector<double> dpre(4 * h);
        for (std::size_t t = steps; t-- > 0;) {
            const double* g = layer.gates.data() + t * 4 * h;
            const double* c_prev = layer.cell.data() + t * h;
            const double* c_now = layer.cell.data() + (t + 1) * h;
            const double* h_prev = layer.hidden.data() + t * h;
            const double* x = layer.input.data() + t * in_dim;
            for (std::size_t j = 0; j < h; ++j) {
                const double gi = g[j];
                const double gf = g[h + j];
                const double gg = g[2 * h + j];
                const double go = g[3 * h + j];
                const double tc = std::tanh(c_now[j]);
                const double dh = dseq[t * h + j] + dh_next[j];
                const double dc = dh * go * (1.0 - tc * tc) + dc_next[j];
                dpre[j] = dc * gg * gi * (1.0 - gi);
                dpre[h + j] = dc * c_prev[j] * gf * (1.0 - gf);
                dpre[2 * h + j] = dc * gi * (1.0 - gg * gg);
                dpre[3 * h + j] = dh * tc * go * (1.0 - go);
                dc_next[j] = dc * gf;
            }
            std::fill(dh_next.begin(), dh_next.end(), 0.0);
            for (std::size_t r = 0; r < 4 * h; ++r) {
                const double d = dpre[r];
                gb[r] += d;
                const double* wr = w.values.data() + r * in_dim;
                double* gwr = gw.data() + r * in_dim;
                double* dx = dinput.data() + t * in_dim;
                for (std::size_t c = 0; c < in_dim; ++c) {
                    gwr[c] += d * x[c];
                    dx[c] += wr[c] * d;
                }
                const double* ur = u.values.data() + r * h;
                double* gur = gu.data() + r * h;
                for (std::size_t c = 0; c < h; ++c) {
                    gur[c] += d * h_prev[c];
                    dh_next[c] += ur[c] * d;
                }
            }
        }
        dseq = std::move(dinput);
    }
    return loss;
}

std::vector<double> compute_class_weights(std::span<const int> labels, std::size_t n_classes) {
    if (n_classes == 0) {
        throw DataError("class weights need at least one class");
    }
    std::vector<std::size_t> counts(n_classes, 0);
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= n_classes) {
            throw DataError("label " + std::to_string(l) + " out of range for " + std::to_string(n_classes) +
                            " classes");
        }
        ++counts[static_cast<std::size_t>(l)];
    }
    if (n_classes < 2) {
        throw DataError("class weights need at least two classes");
    }
    std::vector<double> w(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (counts[c] == 0) {
            throw DataError("class " + std::to_string(c) + " has no examples");
        }
        w[c] = static_cast<double>(labels.size()) / (static_cast<double>(n_classes) * static_cast<double>(counts[c]));
    }
    return w;
}

AdamOptimizer::AdamOptimizer(const NeuralNet& net, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(net.zero_gradients()), v_(net.zero_gradients()) {}

void AdamOptimizer::step(NeuralNet& net, const Gradients& grads, double learning_rate) {
    ++t_;
    const double td = static_cast<double>(t_);
    const double lr_t = learning_rate * std::sqrt(1.0 - std::pow(beta2_, td)) / (1.0 - std::pow(beta1_, td));
    auto& params = net.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& values = params[p].values;
        auto& m = m_[p];
        auto& v = v_[p];
        const auto& g = grads[p];
        for (std::size_t i = 0; i < values.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            values[i] -= lr_t * m[i] / (std::sqrt(v[i]) + epsilon_);
        }
    }
}

void TrainerConfig::validate() const {
    if (!(learning_rate > 0.0) || !(lr_floor > 0.0) || lr_floor > learning_rate) {
        throw UsageError("need 0 < lr_floor <= learning_rate");
    }
    if (!(lr_reduce_factor > 0.0 && lr_reduce_factor < 1.0)) {
        throw UsageError("lr_reduce_factor must be in (0, 1)");
    }
    if (max_epochs < 1 || lr_patience < 1 || early_stop_patience < 1 || batch_size < 1 || max_restarts < 0) {
        throw UsageError("epochs, patiences and batch size must be positive");
    }
    if (min_delta < 0.0) {
        throw UsageError("min_delta must be non-negative");
    }
}

double weighted_loss(const NeuralNet& net, std::span<const Example> data, std::span<const double> class_weights) {
    if (data.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& ex : data) {
        const auto tr = net.trace(ex.input, ex.steps, false, nullptr);
        sum += class_weights[static_cast<std::size_t>(ex.label)] *
               (tr.log_sum_exp - tr.logits[static_cast<std::size_t>(ex.label)]);
    }
    return sum / static_cast<double>(data.size());
}

std::vector<int> predict_all(const NeuralNet& net, std::span<const Example> data) {
    std::vector<int> out;
    out.reserve(data.size());
    for (const auto& ex : data) {
        out.push_back(net.predict(ex));
    }
    return out;
}

namespace {

std::vector<int> labels_of(std::span<const Example> data) {
    std::vector<int> out;
    out.reserve(data.size());
    for (const auto& ex : data) {
        out.push_back(ex.label);
    }
    return out;
}

}  // namespace

TrainResult train(NeuralNet net, std::span<const Example> train_set, std::span<const Example> valid_set,
                  const TrainerConfig& config) {
    config.validate();
    if (train_set.empty()) {
        throw DataError("training set is empty");
    }
    const std::size_t n_classes = net.spec().output_classes;
    const auto gold = labels_of(train_set);
    for (int l : gold) {
        if (l < 0 || static_cast<std::size_t>(l) >= n_classes) {
            throw DataError("training label " + std::to_string(l) + " out of range");
        }
    }

    TrainingHistory history;
    history.monitor = valid_set.empty() ? "loss" : "val_loss";
    if (!config.class_weights.empty()) {
        if (config.class_weights.size() != n_classes) {
            throw UsageError("class_weights has " + std::to_string(config.class_weights.size()) +
                             " entries, network has " + std::to_string(n_classes) + " classes");
        }
        history.class_weights = config.class_weights;
    } else if (config.balance_classes) {
        history.class_weights = compute_class_weights(gold, n_classes);
    } else {
        history.class_weights.assign(n_classes, 1.0);
    }
    const auto& cw = history.class_weights;

    // Restart guard: an initialization that already scores well on the
    // training set is usually one that predicts a single class everywhere.
    for (;;) {
        const double f1 = micro_f1(predict_all(net, train_set), gold);
        history.initial_f1.push_back(f1);
        if (f1 >= config.restart_f1_threshold && history.restarts < config.max_restarts) {
            ++history.restarts;
            net.init_glorot(Rng::derive(config.seed, 1000 + static_cast<std::uint64_t>(history.restarts)));
            continue;
        }
        break;
    }

    Rng rng(Rng::derive(config.seed, 1));
    AdamOptimizer adam(net);
    double lr = config.learning_rate;
    double best = std::numeric_limits<double>::infinity();
    NeuralNet best_net = net;
    int wait_stop = 0;
    int wait_lr = 0;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            Gradients grads = net.zero_gradients();
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const auto& ex = train_set[order[k]];
                const auto tr = net.trace(ex.input, ex.steps, true, &rng);
                batch_loss += net.backward(tr, ex.label, cw[static_cast<std::size_t>(ex.label)], grads);
            }
            if (!std::isfinite(batch_loss)) {
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_index));
            }
            const double scale = 1.0 / static_cast<double>(end - start);
            for (auto& g : grads) {
                for (double& v : g) {
                    v *= scale;
                }
            }
            adam.step(net, grads, lr);
            epoch_loss += batch_loss;
        }
        if (!net.all_finite()) {
            throw NumericError("non-finite parameters after epoch " + std::to_string(epoch));
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.learning_rate = lr;
        rec.train_loss = epoch_loss / static_cast<double>(train_set.size());
        rec.train_f1 = micro_f1(predict_all(net, train_set), gold);
        rec.monitored_loss = valid_set.empty() ? weighted_loss(net, train_set, cw) : weighted_loss(net, valid_set, cw);
        if (!std::isfinite(rec.monitored_loss)) {
            throw NumericError("non-finite monitored loss at epoch " + std::to_string(epoch));
        }
        history.epochs.push_back(rec);
        history.stopped_epoch = epoch;

        if (rec.monitored_loss < best - config.min_delta) {
            best = rec.monitored_loss;
            best_net = net;
            history.best_epoch = epoch;
            wait_stop = 0;
            wait_lr = 0;
        } else {
            ++wait_stop;
            ++wait_lr;
            if (wait_lr >= config.lr_patience) {
                if (lr > config.lr_floor) {
                    lr = std::max(lr * config.lr_reduce_factor, config.lr_floor);
                }
                wait_lr = 0;
            }
            if (wait_stop >= config.early_stop_patience) {
                history.early_stopped = true;
                break;
            }
        }
    }
    history.best_monitored_loss = best;
    return {std::move(best_net), std::move(history)};
}

std::string cell_name(CellType cell) {
    return cell == CellType::Dense ? "dense" : "lstm";
}

CellType parse_cell(const std::string& name) {
    if (name == "dense") {
        return CellType::Dense;
    }
    if (name == "lstm") {
        return CellType::Lstm;
    }
    throw UsageError("unknown cell type '" + name + "'");
}

std::string net_to_json(const NeuralNet& net, const TrainingHistory* history) {
    const auto& s = net.spec();
    nlohmann::ordered_json j;
    j["spec"] = {
        {"input_dim", s.input_dim},
        {"hidden_layers", s.hidden_layers},
        {"cell", cell_name(s.cell)},
        {"output_classes", s.output_classes},
        {"dropout_rate", s.dropout_rate},
        {"activation", s.activation == Activation::Relu ? "relu" : "tanh"},
    };
    auto params = nlohmann::ordered_json::array();
    for (const auto& p : net.parameters()) {
        params.push_back({{"name", p.name}, {"rows", p.rows}, {"cols", p.cols}, {"values", p.values}});
    }
    j["parameters"] = params;
    if (history != nullptr) {
        auto epochs = nlohmann::ordered_json::array();
        for (const auto& e : history->epochs) {
            epochs.push_back({{"epoch", e.epoch},
                              {"train_loss", e.train_loss},
                              {"monitored_loss", e.monitored_loss},
                              {"train_f1", e.train_f1},
                              {"learning_rate", e.learning_rate}});
        }
        j["history"] = {
            {"monitor", history->monitor},
            {"restarts", history->restarts},
            {"initial_f1", history->initial_f1},
            {"best_epoch", history->best_epoch},
            {"stopped_epoch", history->stopped_epoch},
            {"early_stopped", history->early_stopped},
            {"best_monitored_loss", history->best_monitored_loss},
            {"class_weights", history->class_weights},
            {"epochs", epochs},
        };
    }
    return j.dump();
}

NeuralNet net_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        const auto& js = j.at("spec");
        NetSpec spec;
        spec.input_dim = js.at("input_dim").get<std::size_t>();
        spec.hidden_layers = js.at("hidden_layers").get<std::vector<std::size_t>>();
        spec.cell = parse_cell(js.at("cell").get<std::string>());
        spec.output_classes = js.at("output_classes").get<std::size_t>();
        spec.dropout_rate = js.at("dropout_rate").get<double>();
        const auto act = js.at("activation").get<std::string>();
        if (act != "relu" && act != "tanh") {
            throw DataError("unknown activation '" + act + "'");
        }
        spec.activation = act == "relu" ? Activation::Relu : Activation::Tanh;
        NeuralNet net(spec);
        const auto& jp = j.at("parameters");
        auto& params = net.parameters();
        if (jp.size() != params.size()) {
            throw DataError("network parameter count mismatch");
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto values = jp[i].at("values").get<std::vector<double>>();
            if (values.size() != params[i].values.size() || jp[i].at("name").get<std::string>() != params[i].name) {
                throw DataError("network parameter '" + params[i].name + "' has the wrong shape");
            }
            params[i].values = std::move(values);
        }
        if (!net.all_finite()) {
            throw DataError("network parameters contain non-finite values");
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("network model: ") + e.what());
    }
}

}  // namespace phenonote
