#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "phenonote/error.hpp"
#include "phenonote/metrics.hpp"
#include "phenonote/neuralnet.hpp"
#include "test_util.hpp"

using namespace phenonote;

namespace {

NetSpec dense_spec(std::size_t in, std::vector<std::size_t> hidden, std::size_t out,
                   Activation act = Activation::Relu) {
    NetSpec s;
    s.input_dim = in;
    s.hidden_layers = std::move(hidden);
    s.output_classes = out;
    s.activation = act;
    return s;
}

NetSpec lstm_spec(std::size_t in, std::size_t hidden, std::size_t out) {
    NetSpec s = dense_spec(in, {hidden}, out);
    s.cell = CellType::Lstm;
    return s;
}

Example random_example(std::size_t dim, std::size_t steps, int label, std::uint64_t seed) {
    Rng rng(seed);
    Example ex;
    ex.steps = steps;
    ex.label = label;
    for (std::size_t i = 0; i < dim * steps; ++i) {
        ex.input.push_back(rng.uniform(-1.0, 1.0));
    }
    return ex;
}

Tensor& param(NeuralNet& net, const std::string& name) {
    for (auto& t : net.parameters()) {
        if (t.name == name) {
            return t;
        }
    }
    throw std::runtime_error("no tensor " + name);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Two Gaussian-free clusters on either side of x0 = 0, margin 0.5.
std::vector<Example> separable(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Example> out;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const double side = label == 1 ? 1.0 : -1.0;
        out.push_back({{side * rng.uniform(0.5, 1.5), rng.uniform(-1.0, 1.0)}, 1, label});
    }
    return out;
}

double max_gradient_error(const NeuralNet& net, const Example& ex, double weight) {
    auto grads = net.zero_gradients();
    net.backward(net.trace(ex.input, ex.steps, false, nullptr), ex.label, weight, grads);
    const auto numeric = oracle::numeric_gradient(net, ex, weight);
    double worst = 0.0;
    for (std::size_t t = 0; t < grads.size(); ++t) {
        worst = std::max(worst, oracle::max_relative_error(grads[t], numeric[t]));
    }
    return worst;
}

}  // namespace

TEST(NetSpecTest, Validation) {
    EXPECT_THROW(NeuralNet(dense_spec(0, {3}, 2)), UsageError);
    EXPECT_THROW(NeuralNet(dense_spec(2, {3, 0}, 2)), UsageError);
    NetSpec s = dense_spec(2, {3}, 2);
    s.dropout_rate = 1.0;
    EXPECT_THROW(NeuralNet{s}, UsageError);
}

TEST(ForwardTest, ZeroNetIsUniform) {
    const NeuralNet net(dense_spec(5, {32, 16, 8, 4, 2, 1}, 4));
    const auto p = net.forward(std::vector<double>{1, -2, 3, 0.5, 9}, 1);
    for (double v : p) {
        EXPECT_DOUBLE_EQ(v, 0.25);
    }
}

TEST(ForwardTest, ProbabilitiesSumToOne) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        NeuralNet d(dense_spec(4, {6, 3}, 3, Activation::Tanh));
        d.init_glorot(seed);
        NeuralNet l(lstm_spec(4, 5, 4));
        l.init_glorot(seed);
        const auto pd = d.forward(random_example(4, 1, 0, seed + 100));
        const auto pl = l.forward(random_example(4, 3, 0, seed + 200));
        EXPECT_NEAR(std::accumulate(pd.begin(), pd.end(), 0.0), 1.0, 1e-9);
        EXPECT_NEAR(std::accumulate(pl.begin(), pl.end(), 0.0), 1.0, 1e-9);
    }
}

TEST(ForwardTest, InputChecks) {
    const NeuralNet d(dense_spec(3, {2}, 2));
    EXPECT_THROW(d.forward(std::vector<double>{1, 2}, 1), DataError);
    EXPECT_THROW(d.forward(std::vector<double>{1, 2, 3, 4, 5, 6}, 2), DataError);
    NeuralNet bad(dense_spec(1, {1}, 2));
    param(bad, "dense0.W").values[0] = std::numeric_limits<double>::infinity();
    try {
        bad.forward(std::vector<double>{1.0}, 1);
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("layer"), std::string::npos);
    }
}

TEST(ForwardTest, ZeroGateLstmCell) {
    // Zero weights and biases: i = f = o = 0.5, g = tanh(0) = 0, so c = h = 0
    // and the logits are the output bias.
    NeuralNet net(lstm_spec(3, 2, 2));
    param(net, "output.W").values = {0.7, -0.3, 0.2, 0.9};
    param(net, "output.b").values = {1.0, 2.0};
    const auto p = net.forward(std::vector<double>{0.4, -1.0, 2.0}, 1);
    const double e = std::exp(1.0);
    EXPECT_NEAR(p[1], e / (1.0 + e), 1e-15);
    const auto tr = net.trace(std::vector<double>{0.4, -1.0, 2.0}, 1, false, nullptr);
    EXPECT_DOUBLE_EQ(tr.lstm[0].gates[0], 0.5);  // input gate
    EXPECT_DOUBLE_EQ(tr.lstm[0].gates[2], 0.5);  // forget gate
    EXPECT_DOUBLE_EQ(tr.lstm[0].gates[4], 0.0);  // candidate
    EXPECT_DOUBLE_EQ(tr.lstm[0].hidden[2], 0.0);
}

TEST(ForwardTest, SingleStepLstmWithOpenGates) {
    // Input and output gates saturated open: h = tanh(tanh(Wg x + bg)).
    NeuralNet net(lstm_spec(2, 1, 2));
    auto& w = param(net, "lstm0.W").values;   // rows i, f, g, o
    auto& b = param(net, "lstm0.b").values;
    w = {0, 0, 0, 0, 0.8, -0.6, 0, 0};
    b = {40.0, 0.0, 0.1, 40.0};
    param(net, "output.W").values = {1.5, -1.5};
    const std::vector<double> x{0.5, 0.25};
    const double h = std::tanh(std::tanh(0.8 * 0.5 - 0.6 * 0.25 + 0.1)) * sigmoid(40.0) * 1.0;
    const double z = 3.0 * h;
    const auto p = net.forward(x, 1);
    EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(-z)), 1e-12);
}

TEST(GradientTest, DenseMatchesFiniteDifferences) {
    for (auto act : {Activation::Relu, Activation::Tanh}) {
        NeuralNet net(dense_spec(4, {3}, 2, act));
        net.init_glorot(3);
        for (auto& t : net.parameters()) {
            if (t.name.ends_with(".b")) {
                for (double& v : t.values) {
                    v = 0.1;
                }
            }
        }
        for (int label : {0, 1}) {
            EXPECT_LT(max_gradient_error(net, random_example(4, 1, label, 40 + label), 1.0), 1e-4);
        }
    }
}

TEST(GradientTest, DeepDenseMatchesFiniteDifferences) {
    NeuralNet net(dense_spec(5, {6, 4, 3}, 3, Activation::Tanh));
    net.init_glorot(8);
    EXPECT_LT(max_gradient_error(net, random_example(5, 1, 2, 9), 1.7), 1e-4);
}

TEST(GradientTest, LstmMatchesFiniteDifferences) {
    NeuralNet net(lstm_spec(4, 3, 2));
    net.init_glorot(5);
    for (std::size_t steps : {1u, 3u}) {
        EXPECT_LT(max_gradient_error(net, random_example(4, steps, 1, 50 + steps), 1.0), 1e-4);
    }
    NetSpec two = lstm_spec(3, 4, 3);
    two.hidden_layers = {4, 2};
    NeuralNet stacked(two);
    stacked.init_glorot(6);
    EXPECT_LT(max_gradient_error(stacked, random_example(3, 4, 2, 60), 0.5), 1e-4);
}

TEST(GradientTest, ClassWeightScalesGradientExactly) {
    NeuralNet net(dense_spec(4, {3}, 2, Activation::Tanh));
    net.init_glorot(12);
    const auto ex = random_example(4, 1, 1, 13);
    const auto tr = net.trace(ex.input, 1, false, nullptr);
    auto g1 = net.zero_gradients();
    auto g2 = net.zero_gradients();
    const double l1 = net.backward(tr, 1, 1.0, g1);
    const double l2 = net.backward(tr, 1, 2.0, g2);
    EXPECT_EQ(l2, 2.0 * l1);
    for (std::size_t t = 0; t < g1.size(); ++t) {
        for (std::size_t i = 0; i < g1[t].size(); ++i) {
            EXPECT_EQ(g2[t][i], 2.0 * g1[t][i]);
        }
    }
}

TEST(GradientTest, ConfidentCorrectPredictionHasTinyGradient) {
    NeuralNet net(dense_spec(4, {3}, 2));
    net.init_glorot(14);
    param(net, "output.b").values = {0.0, 40.0};
    const auto ex = random_example(4, 1, 1, 15);
    auto g = net.zero_gradients();
    const double loss = net.backward(net.trace(ex.input, 1, false, nullptr), 1, 1.0, g);
    double norm = 0.0;
    for (const auto& t : g) {
        for (double v : t) {
            norm += v * v;
        }
    }
    EXPECT_LT(std::sqrt(norm), 1e-6);
    EXPECT_TRUE(std::isfinite(loss));
}

TEST(GradientTest, ExtremeLogitsStayFinite) {
    NeuralNet net(dense_spec(1, {1}, 2));
    param(net, "output.b").values = {0.0, 800.0};
    auto g = net.zero_gradients();
    const double loss = net.backward(net.trace(std::vector<double>{1.0}, 1, false, nullptr), 0, 1.0, g);
    EXPECT_NEAR(loss, 800.0, 1e-9);
    for (const auto& t : g) {
        for (double v : t) {
            EXPECT_TRUE(std::isfinite(v));
        }
    }
}

TEST(DropoutTest, ZeroRateTrainModeEqualsInference) {
    NeuralNet net(dense_spec(4, {5, 3}, 2));
    net.init_glorot(20);
    Rng rng(1);
    const auto ex = random_example(4, 1, 0, 21);
    EXPECT_EQ(net.forward(ex.input, 1, true, &rng), net.forward(ex.input, 1, false));
}

TEST(DropoutTest, InvertedScalingAndRngRequirement) {
    NetSpec s = dense_spec(3, {200}, 2, Activation::Tanh);
    s.dropout_rate = 0.25;
    NeuralNet net(s);
    net.init_glorot(22);
    const std::vector<double> x{0.3, -0.2, 0.8};
    EXPECT_THROW(net.forward(x, 1, true, nullptr), UsageError);
    Rng rng(2);
    const auto tr = net.trace(x, 1, true, &rng);
    std::size_t dropped = 0;
    for (double m : tr.dense[0].mask) {
        EXPECT_TRUE(m == 0.0 || std::abs(m - 1.0 / 0.75) < 1e-15);
        dropped += m == 0.0;
    }
    EXPECT_GT(dropped, 20u);
    EXPECT_LT(dropped, 80u);
    EXPECT_TRUE(net.trace(x, 1, false, nullptr).dense[0].mask.empty());
}

TEST(ClassWeightTest, BalancedScheme) {
    std::vector<int> even(100);
    for (std::size_t i = 0; i < 100; ++i) {
        even[i] = static_cast<int>(i % 2);
    }
    EXPECT_EQ(compute_class_weights(even, 2), (std::vector<double>{1.0, 1.0}));
    std::vector<int> skew(90, 0);
    skew.insert(skew.end(), 10, 1);
    const auto w = compute_class_weights(skew, 2);
    EXPECT_NEAR(w[0], 0.5556, 1e-4);
    EXPECT_NEAR(w[1], 5.0, 1e-12);
    EXPECT_THROW(compute_class_weights(std::vector<int>(398, 0), 1), DataError);
    EXPECT_THROW(compute_class_weights(std::vector<int>(398, 0), 2), DataError);
}

TEST(TrainerTest, ConfigValidation) {
    TrainerConfig c;
    c.lr_floor = 0.01;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.lr_reduce_factor = 1.0;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.max_epochs = 0;
    EXPECT_THROW(c.validate(), UsageError);
}

TEST(TrainerTest, SeparableDataStopsEarlyWithPerfectFit) {
    const auto data = separable(60, 30);
    NeuralNet net(dense_spec(2, {8}, 2, Activation::Tanh));
    net.init_glorot(31);
    TrainerConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.max_restarts = 0;
    cfg.seed = 32;
    const auto r = train(net, data, {}, cfg);
    EXPECT_LT(r.history.stopped_epoch, 500);
    EXPECT_TRUE(r.history.early_stopped);
    std::vector<int> gold;
    for (const auto& e : data) {
        gold.push_back(e.label);
    }
    EXPECT_EQ(micro_f1(predict_all(r.net, data), gold), 1.0);
}

TEST(TrainerTest, PlateauClampsLearningRateAtFloor) {
    // Zero ReLU net on balanced full batches: every gradient is exactly zero.
    const auto data = separable(40, 33);
    NeuralNet net(dense_spec(2, {4}, 2));
    TrainerConfig cfg;
    cfg.lr_patience = 1;
    cfg.early_stop_patience = 40;
    cfg.batch_size = 40;
    cfg.max_restarts = 0;
    cfg.balance_classes = false;
    const auto r = train(net, data, {}, cfg);
    std::vector<double> lrs;
    for (const auto& e : r.history.epochs) {
        lrs.push_back(e.learning_rate);
    }
    ASSERT_GE(lrs.size(), 8u);
    EXPECT_EQ(lrs[0], 0.001);
    EXPECT_EQ(lrs[1], 0.001);
    EXPECT_EQ(lrs[2], 0.0005);
    EXPECT_EQ(lrs[3], 0.00025);
    EXPECT_EQ(lrs[4], 0.000125);
    EXPECT_EQ(lrs[5], 0.0000625);
    EXPECT_EQ(lrs[6], 0.00005);
    for (std::size_t i = 1; i < lrs.size(); ++i) {
        EXPECT_LE(lrs[i], lrs[i - 1]);
        EXPECT_GE(lrs[i], 0.00005);
    }
    EXPECT_EQ(lrs.back(), 0.00005);
    EXPECT_TRUE(r.history.early_stopped);
    EXPECT_EQ(r.history.stopped_epoch, 41);
}

TEST(TrainerTest, HardStopAtMaxEpochs) {
    const auto data = separable(8, 34);
    NeuralNet net(dense_spec(2, {2}, 2, Activation::Tanh));
    net.init_glorot(35);
    TrainerConfig cfg;
    cfg.early_stop_patience = 100000;
    cfg.min_delta = 0.0;
    cfg.max_restarts = 0;
    const auto r = train(net, data, {}, cfg);
    EXPECT_EQ(r.history.epochs.size(), 500u);
    EXPECT_EQ(r.history.stopped_epoch, 500);
    EXPECT_FALSE(r.history.early_stopped);
}

TEST(TrainerTest, MajorityInitTriggersRestart) {
    // 80% class 0; the zero net predicts class 0 everywhere (F1 = 0.8).
    std::vector<Example> data;
    for (int i = 0; i < 50; ++i) {
        data.push_back({{static_cast<double>(i % 7) - 3.0, 1.0}, 1, i % 5 == 0 ? 1 : 0});
    }
    NeuralNet net(dense_spec(2, {4}, 2));
    TrainerConfig cfg;
    cfg.max_epochs = 3;
    cfg.seed = 36;
    const auto r = train(net, data, {}, cfg);
    EXPECT_GE(r.history.restarts, 1);
    EXPECT_DOUBLE_EQ(r.history.initial_f1.front(), 0.8);
    EXPECT_EQ(r.history.initial_f1.size(), static_cast<std::size_t>(r.history.restarts) + 1);
}

TEST(TrainerTest, BestEpochRestored) {
    const auto all = separable(80, 37);
    const std::vector<Example> tr(all.begin(), all.begin() + 60);
    const std::vector<Example> va(all.begin() + 60, all.end());
    NeuralNet net(dense_spec(2, {6}, 2, Activation::Tanh));
    net.init_glorot(38);
    TrainerConfig cfg;
    cfg.max_epochs = 120;
    cfg.max_restarts = 0;
    cfg.seed = 39;
    const auto r = train(net, tr, va, cfg);
    EXPECT_EQ(r.history.monitor, "val_loss");
    EXPECT_LE(r.history.best_monitored_loss, r.history.epochs.back().monitored_loss);
    EXPECT_DOUBLE_EQ(weighted_loss(r.net, va, r.history.class_weights), r.history.best_monitored_loss);
    EXPECT_EQ(r.history.epochs[static_cast<std::size_t>(r.history.best_epoch) - 1].monitored_loss,
              r.history.best_monitored_loss);
}

TEST(TrainerTest, SeededTrainingIsReproducible) {
    const auto data = separable(40, 40);
    NetSpec s = dense_spec(2, {5}, 2);
    s.dropout_rate = 0.25;
    NeuralNet net(s);
    net.init_glorot(41);
    TrainerConfig cfg;
    cfg.max_epochs = 30;
    cfg.seed = 42;
    const auto a = train(net, data, {}, cfg);
    const auto b = train(net, data, {}, cfg);
    EXPECT_EQ(net_to_json(a.net, &a.history), net_to_json(b.net, &b.history));
}

TEST(TrainerTest, Errors) {
    NeuralNet net(dense_spec(2, {2}, 2));
    EXPECT_THROW(train(net, {}, {}, TrainerConfig{}), DataError);
    std::vector<Example> bad{{{1.0, 2.0}, 1, 5}};
    EXPECT_THROW(train(net, bad, {}, TrainerConfig{}), DataError);
    TrainerConfig cfg;
    cfg.class_weights = {1.0, 2.0, 3.0};
    EXPECT_THROW(train(net, separable(4, 1), {}, cfg), UsageError);
}

TEST(NetJsonTest, RoundTrip) {
    NeuralNet net(lstm_spec(3, 4, 2));
    net.init_glorot(50);
    const auto back = net_from_json(net_to_json(net));
    EXPECT_EQ(back.spec().cell, CellType::Lstm);
    ASSERT_EQ(back.parameters().size(), net.parameters().size());
    for (std::size_t i = 0; i < net.parameters().size(); ++i) {
        EXPECT_EQ(back.parameters()[i].values, net.parameters()[i].values);
    }
    EXPECT_THROW(net_from_json("[]"), DataError);
}
