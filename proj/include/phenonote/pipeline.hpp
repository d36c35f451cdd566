#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "phenonote/corpus.hpp"
#include "phenonote/embeddings.hpp"
#include "phenonote/knn.hpp"
#include "phenonote/matrix.hpp"
#include "phenonote/metrics.hpp"
#include "phenonote/neuralnet.hpp"
#include "phenonote/svm.hpp"

namespace phenonote {

enum class Algo { Knn, Svm, Mlp, Lstm };

std::string algo_name(Algo algo);
Algo parse_algo(const std::string& name);

/// A trained predictor plus what is needed to interpret its outputs.
struct ModelArtifact {
    Algo algo = Algo::Knn;
    LabelSpace label_space = LabelSpace::Binary2;
    std::variant<SvmModel, KnnModel, NeuralNet> model;  // SvmModel first: default constructible
    std::string config_hash;
    std::optional<TrainingHistory> history;

    std::size_t input_dim() const;
    std::size_t n_classes() const { return label_space_size(label_space); }
};

std::string artifact_to_json(const ModelArtifact& artifact);
ModelArtifact artifact_from_json(const std::string& text);
ModelArtifact load_artifact(const std::filesystem::path& path);

/// One class index per feature row (LSTM models read each row as a length-1
/// sequence). Throws DataError when the width does not match the model.
std::vector<int> predict_rows(const ModelArtifact& artifact, const Matrix& features);

/// One class index per embedding record. Per-chunk records feed LSTM models
/// as sequences; other models need averaged input.
std::vector<int> predict_embeddings(const ModelArtifact& artifact, const EmbeddingSet& set);

/// Predict and score. Wall-clock time covers prediction only.
EvalReport evaluate_run(const ModelArtifact& artifact, const Matrix& features, std::span<const int> gold,
                        const std::string& name);
EvalReport evaluate_run(const ModelArtifact& artifact, const EmbeddingSet& set, std::span<const int> gold,
                        const std::string& name);

/// Class indices of labels within a space; throws DataError for labels that
/// do not belong to it.
std::vector<int> class_indices(std::span<const Label> labels, LabelSpace space);

/// Feature rows as length-1 network examples.
std::vector<Example> examples_from_rows(const Matrix& features, std::span<const int> labels);

/// Embedding records as network examples: a length-1 sequence per averaged
/// record, or one step per chunk when `use_chunks` is set.
std::vector<Example> examples_from_embeddings(const EmbeddingSet& set, std::span<const int> labels, bool use_chunks);

/// Seeded split of `data` into (train, validation); the validation part holds
/// round(fraction * n) examples and is empty when fraction is 0.
std::pair<std::vector<Example>, std::vector<Example>> split_validation(std::vector<Example> data, double fraction,
                                                                       std::uint64_t seed);

struct BaselineConfig {
    std::vector<std::size_t> hidden{64};
    double dropout = 0.25;
    bool use_chunks = false;
    double validation_fraction = 0.1;
    TrainerConfig trainer;
};

/// Balanced weights N / (n_present * count_c) over the classes that occur;
/// absent classes get 1 (no example ever uses it). Throws DataError when
/// fewer than two classes occur.
std::vector<double> observed_class_weights(std::span<const int> labels, std::size_t n_classes);

/// Train the LSTM baseline over note embeddings. Balanced class weights (when
/// the trainer asks for them) come from observed_class_weights(). Averaged records are
/// length-1 sequences. Throws DataError on an empty set or a label count that
/// differs from the record count.
TrainResult embed_baseline_train(const EmbeddingSet& embeddings, std::span<const int> labels, std::size_t n_classes,
                                 const BaselineConfig& config);

/// All settings of an end-to-end run. Serialized as `key = value` lines.
struct PipelineConfig {
    std::filesystem::path train_corpus;
    std::filesystem::path test_corpus;
    std::filesystem::path lexicon;
    std::filesystem::path out_dir = "run";
    std::filesystem::path embeddings_train;  ///< optional
    std::filesystem::path embeddings_test;   ///< optional
    CorpusFormat format = CorpusFormat::Jsonl;

    std::size_t top_k = 250;
    std::size_t pca_components = 7;
    std::size_t knn_k = 27;
    double svm_c = 1.0;
    KernelType svm_kernel = KernelType::Rbf;
    std::vector<std::size_t> mlp_layers{32, 16, 8, 4, 2, 1};
    double mlp_dropout = 0.0;
    bool mlp_balance_classes = false;
    double validation_fraction = 0.1;
    bool test_unknown_as_non_smoker = false;
    bool run_knn = true;
    bool run_svm = true;
    bool run_mlp = true;

    std::vector<std::size_t> baseline_hidden{64};
    double baseline_dropout = 0.25;
    bool baseline_use_chunks = false;
    LabelSpace baseline_label_space = LabelSpace::Raw4;

    TrainerConfig trainer;
    std::uint64_t seed = 0;

    /// Throws UsageError for values outside their modules' ranges.
    void validate() const;

    /// Canonical `key = value` text, keys sorted. Paths are written as given.
    std::string to_text() const;

    /// FNV-1a hash of to_text() with output locations excluded, so the same
    /// experiment written elsewhere hashes the same.
    std::string hash() const;

    /// Apply one `key = value` setting. Throws UsageError for unknown keys or
    /// unparsable values.
    void set(const std::string& key, const std::string& value);

    static PipelineConfig parse(std::string_view text, std::string_view source);
    static PipelineConfig load(const std::filesystem::path& path);
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct RunSummary {
    std::vector<EvalReport> reports;
    std::vector<StageTiming> timings;
    std::string config_hash;
    std::size_t vocabulary_size = 0;
    std::size_t train_notes = 0;
    std::size_t test_notes = 0;
    std::size_t removed_unknown_train = 0;
    std::size_t removed_unknown_test = 0;
    std::string table;  ///< render_table(reports)
};

/// Logging hook; receives one line per stage event.
using LogFn = std::function<void(const std::string&)>;

/// ingest -> normalize -> consolidate -> vocabulary -> featurize -> pca ->
/// {knn, svm, mlp} -> evaluate, plus the embedding baseline when embedding
/// files are configured. Inputs are checked before any work starts. Every
/// output is written atomically under config.out_dir:
///   vocab.csv, {train,test}_features.csv, pca.json, {train,test}_pca.csv,
///   models/<algo>.json, reports/<algo>.json, summary.json, summary.txt,
///   timings.json, config.txt
/// Everything except timings.json is byte-identical for identical configs.
/// Errors are rethrown with the failing stage's name prefixed.
RunSummary run_end_to_end(const PipelineConfig& config, const LogFn& log = {});

/// JSON object with the model rows and corpus sizes (no timings).
std::string summary_to_json(const RunSummary& summary);

}  // namespace phenonote
