#include "phenonote/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "phenonote/error.hpp"
#include "phenonote/io.hpp"
#include "phenonote/lexicon.hpp"
#include "phenonote/pca.hpp"
#include "phenonote/rng.hpp"

namespace phenonote {

namespace fs = std::filesystem;

std::string algo_name(Algo algo) {
    switch (algo) {
        case Algo::Knn:
            return "knn";
        case Algo::Svm:
            return "svm";
        case Algo::Mlp:
            return "mlp";
        case Algo::Lstm:
            return "lstm";
    }
    return "?";
}

Algo parse_algo(const std::string& name) {
    for (Algo a : {Algo::Knn, Algo::Svm, Algo::Mlp, Algo::Lstm}) {
        if (algo_name(a) == name) {
            return a;
        }
    }
    throw UsageError("unknown algorithm '" + name + "' (expected knn, svm, mlp or lstm)");
}

std::size_t ModelArtifact::input_dim() const {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, NeuralNet>) {
                return m.spec().input_dim;
            } else {
                return m.dim();
            }
        },
        model);
}

std::string artifact_to_json(const ModelArtifact& a) {
    nlohmann::ordered_json j;
    j["algo"] = algo_name(a.algo);
    j["label_space"] = std::string(label_space_name(a.label_space));
    j["classes"] = class_names(a.label_space);
    if (!a.config_hash.empty()) {
        j["config_hash"] = a.config_hash;
    }
    std::string inner;
    switch (a.algo) {
        case Algo::Knn:
            inner = knn_to_json(std::get<KnnModel>(a.model));
            break;
        case Algo::Svm:
            inner = svm_to_json(std::get<SvmModel>(a.model));
            break;
        case Algo::Mlp:
        case Algo::Lstm:
            inner = net_to_json(std::get<NeuralNet>(a.model), a.history ? &*a.history : nullptr);
            break;
    }
    j["model"] = nlohmann::ordered_json::parse(inner);
    return j.dump() + "\n";
}

ModelArtifact artifact_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("algo") || !j.contains("model") || !j.contains("label_space")) {
        throw DataError("model file lacks 'algo', 'label_space' or 'model'");
    }
    ModelArtifact a;
    try {
        a.algo = parse_algo(j["algo"].get<std::string>());
        a.label_space = parse_label_space(j["label_space"].get<std::string>());
    } catch (const UsageError& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    if (j.contains("config_hash")) {
        a.config_hash = j["config_hash"].get<std::string>();
    }
    const std::string inner = j["model"].dump();
    switch (a.algo) {
        case Algo::Knn:
            a.model = knn_from_json(inner);
            break;
        case Algo::Svm:
            if (a.label_space != LabelSpace::Binary2) {
                throw DataError("SVM models are binary only");
            }
            a.model = svm_from_json(inner);
            break;
        case Algo::Mlp:
        case Algo::Lstm: {
            NeuralNet net = net_from_json(inner);
            if (net.spec().output_classes != label_space_size(a.label_space)) {
                throw DataError("network output size does not match the label space");
            }
            a.model = std::move(net);
            break;
        }
    }
    return a;
}

ModelArtifact load_artifact(const fs::path& path) {
    try {
        return artifact_from_json(read_file(path));
    } catch (const DataError& e) {
        const std::string what = e.what();
        if (what.rfind(path.string(), 0) == 0) {
            throw;
        }
        throw DataError(path.string() + ": " + what);
    }
}

std::vector<int> predict_rows(const ModelArtifact& a, const Matrix& features) {
    if (features.cols() != a.input_dim()) {
        throw DataError("feature width " + std::to_string(features.cols()) + " does not match the " +
                        algo_name(a.algo) + " model's input width " + std::to_string(a.input_dim()));
    }
    switch (a.algo) {
        case Algo::Knn:
            return std::get<KnnModel>(a.model).predict(features);
        case Algo::Svm:
            return svm_predict(std::get<SvmModel>(a.model), features);
        case Algo::Mlp:
        case Algo::Lstm: {
            const auto& net = std::get<NeuralNet>(a.model);
            std::vector<int> out;
            out.reserve(features.rows());
            for (std::size_t i = 0; i < features.rows(); ++i) {
                out.push_back(net.predict(features.row(i), 1));
            }
            return out;
        }
    }
    return {};
}

std::vector<int> predict_embeddings(const ModelArtifact& a, const EmbeddingSet& set) {
    if (set.dim != a.input_dim()) {
        throw DataError("embedding dim " + std::to_string(set.dim) + " does not match the model's input width " +
                        std::to_string(a.input_dim()));
    }
    if (a.algo == Algo::Lstm) {
        const auto& net = std::get<NeuralNet>(a.model);
        std::vector<int> out;
        out.reserve(set.size());
        for (const auto& rec : set.records) {
            std::vector<double> in(rec.values.begin(), rec.values.end());
            out.push_back(net.predict(in, rec.chunks));
        }
        return out;
    }
    const EmbeddingSet avg = set.mode == EmbeddingMode::PerChunk ? average_chunks(set) : set;
    Matrix m(avg.size(), avg.dim);
    for (std::size_t i = 0; i < avg.size(); ++i) {
        std::copy(avg.records[i].values.begin(), avg.records[i].values.end(), m.row(i).begin());
    }
    return predict_rows(a, m);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

EvalReport evaluate_run(const ModelArtifact& a, const Matrix& features, std::span<const int> gold,
                        const std::string& name) {
    if (features.rows() == 0) {
        throw DataError("no instances to evaluate");
    }
    const auto start = Clock::now();
    const auto preds = predict_rows(a, features);
    const double secs = seconds_since(start);
    return make_report(name, preds, gold, class_names(a.label_space), secs);
}

EvalReport evaluate_run(const ModelArtifact& a, const EmbeddingSet& set, std::span<const int> gold,
                        const std::string& name) {
    if (set.size() == 0) {
        throw DataError("no instances to evaluate");
    }
    const auto start = Clock::now();
    const auto preds = predict_embeddings(a, set);
    const double secs = seconds_since(start);
    return make_report(name, preds, gold, class_names(a.label_space), secs);
}

std::vector<int> class_indices(std::span<const Label> labels, LabelSpace space) {
    std::vector<int> out;
    out.reserve(labels.size());
    for (Label l : labels) {
        const bool ok = space == LabelSpace::Raw4 ? l != Label::Smoker
                                                  : (l == Label::Smoker || l == Label::NonSmoker);
        if (!ok) {
            throw DataError("label '" + std::string(label_name(l)) + "' is not in the " +
                            std::string(label_space_name(space)) + " label space");
        }
        out.push_back(static_cast<int>(class_index(l, space)));
    }
    return out;
}

std::vector<Example> examples_from_rows(const Matrix& features, std::span<const int> labels) {
    if (labels.size() != features.rows()) {
        throw DataError("label count does not match row count");
    }
    std::vector<Example> out(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto r = features.row(i);
        out[i].input.assign(r.begin(), r.end());
        out[i].label = labels[i];
    }
    return out;
}

std::vector<Example> examples_from_embeddings(const EmbeddingSet& set, std::span<const int> labels, bool use_chunks) {
    if (labels.size() != set.size()) {
        throw DataError("label count " + std::to_string(labels.size()) + " does not match embedding count " +
                        std::to_string(set.size()));
    }
    const EmbeddingSet& src = set;
    EmbeddingSet averaged;
    const EmbeddingSet* use = &src;
    if (!use_chunks && set.mode == EmbeddingMode::PerChunk) {
        averaged = average_chunks(set);
        use = &averaged;
    }
    std::vector<Example> out(use->size());
    for (std::size_t i = 0; i < use->size(); ++i) {
        const auto& rec = use->records[i];
        out[i].input.assign(rec.values.begin(), rec.values.end());
        out[i].steps = rec.chunks;
        out[i].label = labels[i];
    }
    return out;
}

std::pair<std::vector<Example>, std::vector<Example>> split_validation(std::vector<Example> data, double fraction,
                                                                       std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0)) {
        throw UsageError("validation fraction must be in [0, 1)");
    }
    const auto n_valid = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.size())));
    if (n_valid == 0) {
        return {std::move(data), {}};
    }
    if (n_valid >= data.size()) {
        throw DataError("validation split leaves no training data");
    }
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<bool> is_valid(data.size(), false);
    for (std::size_t i = 0; i < n_valid; ++i) {
        is_valid[order[i]] = true;
    }
    std::vector<Example> train_part;
    std::vector<Example> valid_part;
    for (std::size_t i = 0; i < data.size(); ++i) {
        (is_valid[i] ? valid_part : train_part).push_back(std::move(data[i]));
    }
    return {std::move(train_part), std::move(valid_part)};
}

std::vector<double> observed_class_weights(std::span<const int> labels, std::size_t n_classes) {
    std::vector<std::size_t> counts(n_classes, 0);
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= n_classes) {
            throw DataError("label " + std::to_string(l) + " out of range");
        }
        ++counts[static_cast<std::size_t>(l)];
    }
    const auto present = static_cast<double>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
    if (present < 2) {
        throw DataError("training labels cover fewer than two classes");
    }
    std::vector<double> w(n_classes, 1.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (counts[c] > 0) {
            w[c] = static_cast<double>(labels.size()) / (present * static_cast<double>(counts[c]));
        }
    }
    return w;
}

TrainResult embed_baseline_train(const EmbeddingSet& embeddings, std::span<const int> labels, std::size_t n_classes,
                                 const BaselineConfig& config) {
    if (embeddings.size() == 0) {
        throw DataError("embedding set is empty");
    }
    auto examples = examples_from_embeddings(embeddings, labels, config.use_chunks);
    TrainerConfig tc = config.trainer;
    if (tc.class_weights.empty() && tc.balance_classes) {
        tc.class_weights = observed_class_weights(labels, n_classes);
    }
    NetSpec spec;
    spec.input_dim = embeddings.dim;
    spec.hidden_layers = config.hidden;
    spec.cell = CellType::Lstm;
    spec.output_classes = n_classes;
    spec.dropout_rate = config.dropout;
    spec.activation = Activation::Tanh;
    spec.validate();
    NeuralNet net(spec);
    net.init_glorot(Rng::derive(config.trainer.seed, 11));
    auto [train_part, valid_part] =
        split_validation(std::move(examples), config.validation_fraction, Rng::derive(config.trainer.seed, 12));
    return train(std::move(net), train_part, valid_part, tc);
}

// ---------------------------------------------------------------------------
// PipelineConfig

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        throw UsageError("config key '" + key + "': cannot parse '" + value + "' as a number");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    throw UsageError("config key '" + key + "': expected true or false, got '" + value + "'");
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_number<std::size_t>(key, trim(item)));
    }
    if (out.empty()) {
        throw UsageError("config key '" + key + "': empty list");
    }
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? "," : "") + std::to_string(v[i]);
    }
    return out;
}

std::string format_name(CorpusFormat f) {
    return f == CorpusFormat::Jsonl ? "jsonl" : "n2c2";
}

std::map<std::string, std::string> config_entries(const PipelineConfig& c) {
    const auto& t = c.trainer;
    return {
        {"baseline_dropout", format_double(c.baseline_dropout)},
        {"baseline_hidden", join_sizes(c.baseline_hidden)},
        {"baseline_label_space", std::string(label_space_name(c.baseline_label_space))},
        {"baseline_use_chunks", c.baseline_use_chunks ? "true" : "false"},
        {"batch_size", std::to_string(t.batch_size)},
        {"early_stop_patience", std::to_string(t.early_stop_patience)},
        {"embeddings_test", c.embeddings_test.generic_string()},
        {"embeddings_train", c.embeddings_train.generic_string()},
        {"format", format_name(c.format)},
        {"knn_k", std::to_string(c.knn_k)},
        {"learning_rate", format_double(t.learning_rate)},
        {"lexicon", c.lexicon.generic_string()},
        {"lr_floor", format_double(t.lr_floor)},
        {"lr_patience", std::to_string(t.lr_patience)},
        {"lr_reduce_factor", format_double(t.lr_reduce_factor)},
        {"max_epochs", std::to_string(t.max_epochs)},
        {"max_restarts", std::to_string(t.max_restarts)},
        {"min_delta", format_double(t.min_delta)},
        {"mlp_balance_classes", c.mlp_balance_classes ? "true" : "false"},
        {"mlp_dropout", format_double(c.mlp_dropout)},
        {"mlp_layers", join_sizes(c.mlp_layers)},
        {"out_dir", c.out_dir.generic_string()},
        {"pca_components", std::to_string(c.pca_components)},
        {"restart_f1_threshold", format_double(t.restart_f1_threshold)},
        {"run_knn", c.run_knn ? "true" : "false"},
        {"run_mlp", c.run_mlp ? "true" : "false"},
        {"run_svm", c.run_svm ? "true" : "false"},
        {"seed", std::to_string(c.seed)},
        {"svm_c", format_double(c.svm_c)},
        {"svm_kernel", kernel_name(c.svm_kernel)},
        {"test_corpus", c.test_corpus.generic_string()},
        {"test_unknown", c.test_unknown_as_non_smoker ? "non-smoker" : "drop"},
        {"top_k", std::to_string(c.top_k)},
        {"train_corpus", c.train_corpus.generic_string()},
        {"validation_fraction", format_double(c.validation_fraction)},
    };
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    auto& t = trainer;
    if (key == "train_corpus") {
        train_corpus = value;
    } else if (key == "test_corpus") {
        test_corpus = value;
    } else if (key == "lexicon") {
        lexicon = value;
    } else if (key == "out_dir") {
        out_dir = value;
    } else if (key == "embeddings_train") {
        embeddings_train = value;
    } else if (key == "embeddings_test") {
        embeddings_test = value;
    } else if (key == "format") {
        if (value == "jsonl") {
            format = CorpusFormat::Jsonl;
        } else if (value == "n2c2" || value == "n2c2_xml") {
            format = CorpusFormat::N2c2Xml;
        } else {
            throw UsageError("config key 'format': expected jsonl or n2c2, got '" + value + "'");
        }
    } else if (key == "top_k") {
        top_k = parse_number<std::size_t>(key, value);
    } else if (key == "pca_components") {
        pca_components = parse_number<std::size_t>(key, value);
    } else if (key == "knn_k") {
        knn_k = parse_number<std::size_t>(key, value);
    } else if (key == "svm_c") {
        svm_c = parse_number<double>(key, value);
    } else if (key == "svm_kernel") {
        svm_kernel = parse_kernel(value);
    } else if (key == "mlp_layers") {
        mlp_layers = parse_sizes(key, value);
    } else if (key == "mlp_dropout") {
        mlp_dropout = parse_number<double>(key, value);
    } else if (key == "mlp_balance_classes") {
        mlp_balance_classes = parse_bool(key, value);
    } else if (key == "validation_fraction") {
        validation_fraction = parse_number<double>(key, value);
    } else if (key == "test_unknown") {
        if (value == "drop") {
            test_unknown_as_non_smoker = false;
        } else if (value == "non-smoker") {
            test_unknown_as_non_smoker = true;
        } else {
            throw UsageError("config key 'test_unknown': expected drop or non-smoker, got '" + value + "'");
        }
    } else if (key == "run_knn") {
        run_knn = parse_bool(key, value);
    } else if (key == "run_svm") {
        run_svm = parse_bool(key, value);
    } else if (key == "run_mlp") {
        run_mlp = parse_bool(key, value);
    } else if (key == "baseline_hidden") {
        baseline_hidden = parse_sizes(key, value);
    } else if (key == "baseline_dropout") {
        baseline_dropout = parse_number<double>(key, value);
    } else if (key == "baseline_use_chunks") {
        baseline_use_chunks = parse_bool(key, value);
    } else if (key == "baseline_label_space") {
        baseline_label_space = parse_label_space(value);
    } else if (key == "learning_rate") {
        t.learning_rate = parse_number<double>(key, value);
    } else if (key == "lr_floor") {
        t.lr_floor = parse_number<double>(key, value);
    } else if (key == "lr_reduce_factor") {
        t.lr_reduce_factor = parse_number<double>(key, value);
    } else if (key == "lr_patience") {
        t.lr_patience = parse_number<int>(key, value);
    } else if (key == "early_stop_patience") {
        t.early_stop_patience = parse_number<int>(key, value);
    } else if (key == "min_delta") {
        t.min_delta = parse_number<double>(key, value);
    } else if (key == "max_epochs") {
        t.max_epochs = parse_number<int>(key, value);
    } else if (key == "restart_f1_threshold") {
        t.restart_f1_threshold = parse_number<double>(key, value);
    } else if (key == "max_restarts") {
        t.max_restarts = parse_number<int>(key, value);
    } else if (key == "batch_size") {
        t.batch_size = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
        seed = parse_number<std::uint64_t>(key, value);
    } else {
        throw UsageError("unknown config key '" + key + "'");
    }
}

void PipelineConfig::validate() const {
    if (top_k == 0) {
        throw UsageError("top_k must be at least 1");
    }
    if (pca_components == 0) {
        throw UsageError("pca_components must be at least 1");
    }
    if (knn_k == 0) {
        throw UsageError("knn_k must be at least 1");
    }
    if (!(svm_c > 0.0) || !std::isfinite(svm_c)) {
        throw UsageError("svm_c must be positive");
    }
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw UsageError("validation_fraction must be in [0, 1)");
    }
    NetSpec mlp;
    mlp.input_dim = pca_components;
    mlp.hidden_layers = mlp_layers;
    mlp.dropout_rate = mlp_dropout;
    mlp.validate();
    NetSpec base;
    base.input_dim = 1;
    base.cell = CellType::Lstm;
    base.hidden_layers = baseline_hidden;
    base.dropout_rate = baseline_dropout;
    base.validate();
    trainer.validate();
    if (embeddings_train.empty() != embeddings_test.empty()) {
        throw UsageError("embeddings_train and embeddings_test must be given together");
    }
}

std::string PipelineConfig::to_text() const {
    std::string out;
    for (const auto& [k, v] : config_entries(*this)) {
        out += k + " = " + v + "\n";
    }
    return out;
}

std::string PipelineConfig::hash() const {
    std::string text;
    for (const auto& [k, v] : config_entries(*this)) {
        if (k != "out_dir") {
            text += k + " = " + v + "\n";
        }
    }
    return fnv1a_hex(text);
}

PipelineConfig PipelineConfig::parse(std::string_view text, std::string_view source) {
    PipelineConfig c;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw UsageError(std::string(source) + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            c.set(trim(t.substr(0, eq)), t.substr(eq + 1));
        } catch (const UsageError& e) {
            throw UsageError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    PipelineConfig c = parse(read_file(path), path.string());
    // Relative paths in a config file are relative to the file itself.
    const fs::path base = path.parent_path();
    for (fs::path* p : {&c.train_corpus, &c.test_corpus, &c.lexicon, &c.out_dir, &c.embeddings_train,
                        &c.embeddings_test}) {
        if (!p->empty() && p->is_relative()) {
            *p = (base / *p).lexically_normal();
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// End-to-end run

namespace {

class StageRunner {
public:
    StageRunner(RunSummary& summary, const LogFn& log) : summary_(summary), log_(log) {}

    template <typename F>
    auto operator()(const std::string& stage, F&& body) {
        emit("stage " + stage + ": start");
        const auto start = Clock::now();
        try {
            if constexpr (std::is_void_v<decltype(body())>) {
                body();
                finish(stage, start);
            } else {
                auto result = body();
                finish(stage, start);
                return result;
            }
        } catch (const UsageError& e) {
            throw UsageError(stage + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(stage + ": " + e.what());
        } catch (const NumericError& e) {
            throw NumericError(stage + ": " + e.what());
        } catch (const Error& e) {
            throw Error(stage + ": " + e.what());
        } catch (const std::filesystem::filesystem_error& e) {
            throw DataError(stage + ": " + e.what());
        }
    }

    void emit(const std::string& line) const {
        if (log_) {
            log_(line);
        }
    }

private:
    void finish(const std::string& stage, Clock::time_point start) {
        const double secs = seconds_since(start);
        summary_.timings.push_back({stage, secs});
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f", secs);
        emit("stage " + stage + ": done in " + buf + " s");
    }

    RunSummary& summary_;
    const LogFn& log_;
};

void require_file(const fs::path& p, const std::string& what) {
    if (p.empty()) {
        throw UsageError(what + " path is not set");
    }
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) {
        throw DataError(what + " not found: " + p.string());
    }
}

Table projected_table(const Matrix& m, const std::vector<std::string>& ids, const std::vector<Label>& labels) {
    Table t;
    t.row_ids = ids;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        t.columns.push_back("pc" + std::to_string(c + 1));
    }
    t.values = m;
    std::vector<std::string> names;
    for (Label l : labels) {
        names.emplace_back(label_name(l));
    }
    t.labels = std::move(names);
    return t;
}

std::vector<Label> labels_of(const LabeledCorpus& c) {
    std::vector<Label> out;
    for (const auto& n : c.notes) {
        out.push_back(n.label);
    }
    return out;
}

std::vector<std::string> ids_of(const LabeledCorpus& c) {
    std::vector<std::string> out;
    for (const auto& n : c.notes) {
        out.push_back(n.id);
    }
    return out;
}

LabeledCorpus to_binary(const LabeledCorpus& c, UnknownPolicy policy, std::size_t& removed) {
    if (c.label_space == LabelSpace::Binary2) {
        removed = 0;
        return c;
    }
    auto r = consolidate_labels(c, policy);
    removed = r.removed_unknown;
    return std::move(r.corpus);
}

/// Keep the records whose id has a label in `corpus`, in file order, and
/// return their class indices.
std::pair<EmbeddingSet, std::vector<int>> label_embeddings(const EmbeddingSet& set, const LabeledCorpus& corpus,
                                                           LabelSpace space, const fs::path& source,
                                                           bool drop_missing) {
    std::unordered_map<std::string_view, Label> by_id;
    for (const auto& n : corpus.notes) {
        by_id.emplace(n.id, n.label);
    }
    EmbeddingSet out;
    out.dim = set.dim;
    out.mode = set.mode;
    std::vector<int> labels;
    for (const auto& rec : set.records) {
        auto it = by_id.find(rec.id);
        if (it == by_id.end()) {
            if (drop_missing) {
                continue;
            }
            throw DataError(source.string() + ": embedding id '" + rec.id + "' is not in the corpus");
        }
        out.records.push_back(rec);
        const Label l = it->second;
        labels.push_back(static_cast<int>(class_index(l, space)));
    }
    if (out.size() == 0) {
        throw DataError(source.string() + ": no embedding record matches a corpus note");
    }
    return {std::move(out), std::move(labels)};
}

}  // namespace

std::string summary_to_json(const RunSummary& s) {
    nlohmann::ordered_json j;
    j["config_hash"] = s.config_hash;
    j["train_notes"] = s.train_notes;
    j["test_notes"] = s.test_notes;
    j["removed_unknown_train"] = s.removed_unknown_train;
    j["removed_unknown_test"] = s.removed_unknown_test;
    j["vocabulary_size"] = s.vocabulary_size;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : s.reports) {
        rows.push_back({{"model", r.model},
                        {"micro_f1", r.micro_f1},
                        {"n_instances", r.n_instances},
                        {"label_space_cardinality", r.label_space_cardinality}});
    }
    j["models"] = rows;
    return j.dump(2) + "\n";
}

RunSummary run_end_to_end(const PipelineConfig& config, const LogFn& log) {
    config.validate();
    require_file(config.train_corpus, "training corpus");
    require_file(config.test_corpus, "test corpus");
    require_file(config.lexicon, "lexicon");
    const bool with_baseline = !config.embeddings_train.empty();
    if (with_baseline) {
        require_file(config.embeddings_train, "training embeddings");
        require_file(config.embeddings_test, "test embeddings");
    }

    RunSummary summary;
    summary.config_hash = config.hash();
    StageRunner stage(summary, log);
    const fs::path out = config.out_dir;
    const std::string hash = summary.config_hash;
    stage.emit("config hash " + hash);

    auto raw = stage("ingest", [&] {
        return std::pair{ingest_corpus(config.train_corpus, config.format),
                         ingest_corpus(config.test_corpus, config.format)};
    });
    auto normalized = stage("normalize", [&] {
        return std::pair{normalize_text(raw.first), normalize_text(raw.second)};
    });
    auto binary = stage("consolidate", [&] {
        auto train_b = to_binary(normalized.first, UnknownPolicy::Drop, summary.removed_unknown_train);
        auto test_b = to_binary(normalized.second,
                                config.test_unknown_as_non_smoker ? UnknownPolicy::AsNonSmoker : UnknownPolicy::Drop,
                                summary.removed_unknown_test);
        if (train_b.empty() || test_b.empty()) {
            throw DataError("no labelled notes left after removing unknown labels");
        }
        return std::pair{std::move(train_b), std::move(test_b)};
    });
    const auto& train_c = binary.first;
    const auto& test_c = binary.second;
    summary.train_notes = train_c.size();
    summary.test_notes = test_c.size();
    stage.emit("train notes " + std::to_string(train_c.size()) + " (" +
               std::to_string(summary.removed_unknown_train) + " unknown removed), test notes " +
               std::to_string(test_c.size()) + " (" + std::to_string(summary.removed_unknown_test) +
               " unknown removed)");

    auto lex_vocab = stage("vocabulary", [&] {
        auto lex = load_lexicon(config.lexicon);
        auto vocab = build_vocabulary(train_c, lex, config.top_k);
        write_file_atomic(out / "vocab.csv", write_vocabulary_csv(vocab));
        return std::pair{std::move(lex), std::move(vocab)};
    });
    summary.vocabulary_size = lex_vocab.second.size();

    auto features = stage("featurize", [&] {
        auto f_train = featurize(train_c, lex_vocab.second, lex_vocab.first);
        auto f_test = featurize(test_c, lex_vocab.second, lex_vocab.first);
        write_file_atomic(out / "train_features.csv", write_table_csv(f_train.to_table()));
        write_file_atomic(out / "test_features.csv", write_table_csv(f_test.to_table()));
        return std::pair{f_train.to_matrix(), f_test.to_matrix()};
    });

    auto projected = stage("pca", [&] {
        const auto model = fit_pca(features.first, config.pca_components);
        auto p_train = transform_pca(model, features.first);
        auto p_test = transform_pca(model, features.second);
        write_file_atomic(out / "pca.json", pca_to_json(model, hash));
        write_file_atomic(out / "train_pca.csv",
                          write_table_csv(projected_table(p_train, ids_of(train_c), labels_of(train_c))));
        write_file_atomic(out / "test_pca.csv",
                          write_table_csv(projected_table(p_test, ids_of(test_c), labels_of(test_c))));
        return std::pair{std::move(p_train), std::move(p_test)};
    });

    const auto y_train_labels = labels_of(train_c);
    const auto y_test_labels = labels_of(test_c);
    const auto y_train = class_indices(y_train_labels, LabelSpace::Binary2);
    const auto y_test = class_indices(y_test_labels, LabelSpace::Binary2);

    std::vector<std::pair<std::string, ModelArtifact>> models;
    auto save_model = [&](const ModelArtifact& a) {
        write_file_atomic(out / "models" / (algo_name(a.algo) + ".json"), artifact_to_json(a));
    };

    if (config.run_knn) {
        stage("train knn", [&] {
            ModelArtifact a;
            a.algo = Algo::Knn;
            a.config_hash = hash;
            a.model = KnnModel(config.knn_k, projected.first, y_train, 2);
            save_model(a);
            models.emplace_back("PCA + KNN (K=" + std::to_string(config.knn_k) + ")", std::move(a));
        });
    }
    if (config.run_svm) {
        stage("train svm", [&] {
            std::vector<int> pm(y_train.size());
            std::transform(y_train.begin(), y_train.end(), pm.begin(), [](int c) { return c == 1 ? 1 : -1; });
            SvmConfig sc;
            sc.c_penalty = config.svm_c;
            sc.kernel = config.svm_kernel;
            sc.seed = Rng::derive(config.seed, 30);
            ModelArtifact a;
            a.algo = Algo::Svm;
            a.config_hash = hash;
            a.model = svm_fit(projected.first, pm, sc).compact();
            save_model(a);
            models.emplace_back("PCA + SVM", std::move(a));
        });
    }
    if (config.run_mlp) {
        stage("train mlp", [&] {
            NetSpec spec;
            spec.input_dim = projected.first.cols();
            spec.hidden_layers = config.mlp_layers;
            spec.cell = CellType::Dense;
            spec.output_classes = 2;
            spec.dropout_rate = config.mlp_dropout;
            spec.activation = Activation::Relu;
            NeuralNet net(spec);
            TrainerConfig tc = config.trainer;
            tc.seed = Rng::derive(config.seed, 10);
            tc.balance_classes = config.mlp_balance_classes;
            net.init_glorot(Rng::derive(tc.seed, 11));
            auto [tr, va] = split_validation(examples_from_rows(projected.first, y_train), config.validation_fraction,
                                             Rng::derive(tc.seed, 12));
            auto result = train(std::move(net), tr, va, tc);
            stage.emit("mlp: " + std::to_string(result.history.stopped_epoch) + " epochs, " +
                       std::to_string(result.history.restarts) + " restarts, best epoch " +
                       std::to_string(result.history.best_epoch));
            ModelArtifact a;
            a.algo = Algo::Mlp;
            a.config_hash = hash;
            a.model = std::move(result.net);
            a.history = std::move(result.history);
            save_model(a);
            models.emplace_back("PCA + MLP", std::move(a));
        });
    }

    stage("evaluate", [&] {
        for (const auto& [name, a] : models) {
            summary.reports.push_back(evaluate_run(a, projected.second, y_test, name));
        }
    });

    if (with_baseline) {
        stage("baseline", [&] {
            const LabelSpace space = config.baseline_label_space;
            const LabeledCorpus* train_src = &normalized.first;
            const LabeledCorpus* test_src = &normalized.second;
            if (space == LabelSpace::Binary2) {
                train_src = &binary.first;
                test_src = &binary.second;
            } else if (normalized.first.label_space != LabelSpace::Raw4 ||
                       normalized.second.label_space != LabelSpace::Raw4) {
                throw DataError("the raw4 baseline needs corpora with raw labels");
            }
            const auto emb_train = read_embeddings(config.embeddings_train);
            const auto emb_test = read_embeddings(config.embeddings_test);
            if (emb_train.dim != emb_test.dim) {
                throw DataError("training and test embeddings differ in dim (" + std::to_string(emb_train.dim) +
                                " vs " + std::to_string(emb_test.dim) + ")");
            }
            // Binary runs drop notes whose unknown label was removed.
            const bool drop = space == LabelSpace::Binary2;
            auto [set_train, lab_train] =
                label_embeddings(emb_train, *train_src, space, config.embeddings_train, drop);
            auto [set_test, lab_test] = label_embeddings(emb_test, *test_src, space, config.embeddings_test, drop);

            BaselineConfig bc;
            bc.hidden = config.baseline_hidden;
            bc.dropout = config.baseline_dropout;
            bc.use_chunks = config.baseline_use_chunks;
            bc.validation_fraction = config.validation_fraction;
            bc.trainer = config.trainer;
            bc.trainer.seed = Rng::derive(config.seed, 20);
            bc.trainer.balance_classes = true;
            auto result = embed_baseline_train(set_train, lab_train, label_space_size(space), bc);
            stage.emit("baseline: " + std::to_string(result.history.stopped_epoch) + " epochs, " +
                       std::to_string(result.history.restarts) + " restarts");
            ModelArtifact a;
            a.algo = Algo::Lstm;
            a.label_space = space;
            a.config_hash = hash;
            a.model = std::move(result.net);
            a.history = std::move(result.history);
            save_model(a);
            if (!bc.use_chunks && set_test.mode == EmbeddingMode::PerChunk) {
                set_test = average_chunks(set_test);
            }
            summary.reports.push_back(evaluate_run(a, set_test, lab_test, "Embeddings + LSTM"));
        });
    }

    stage("report", [&] {
        for (const auto& r : summary.reports) {
            std::string slug;
            for (char ch : r.model) {
                const auto u = static_cast<unsigned char>(ch);
                if (std::isalnum(u)) {
                    slug += static_cast<char>(std::tolower(u));
                } else if (!slug.empty() && slug.back() != '-') {
                    slug += '-';
                }
            }
            while (!slug.empty() && slug.back() == '-') {
                slug.pop_back();
            }
            write_file_atomic(out / "reports" / (slug + ".json"), report_to_json(r));
        }
        summary.table = render_table(summary.reports);
        write_file_atomic(out / "summary.json", summary_to_json(summary));
        write_file_atomic(out / "summary.txt", summary.table);
        write_file_atomic(out / "config.txt", config.to_text());
    });

    nlohmann::ordered_json tj;
    tj["config_hash"] = hash;
    auto stages = nlohmann::ordered_json::array();
    for (const auto& t : summary.timings) {
        stages.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    }
    tj["stages"] = stages;
    auto preds = nlohmann::ordered_json::array();
    for (const auto& r : summary.reports) {
        preds.push_back({{"model", r.model}, {"prediction_seconds", r.wall_clock_seconds}});
    }
    tj["prediction"] = preds;
    write_file_atomic(out / "timings.json", tj.dump(2) + "\n");
    return summary;
}

}  // namespace phenonote
