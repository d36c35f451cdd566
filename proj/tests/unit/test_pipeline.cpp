#include <gtest/gtest.h>

#include "experiment.hpp"
#include "phenonote/error.hpp"
#include "phenonote/io.hpp"
#include "phenonote/pipeline.hpp"
#include "test_util.hpp"

using namespace phenonote;
namespace fs = std::filesystem;

namespace {

std::vector<Example> blob_examples(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Example> out;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        out.push_back({{label * 3.0 + rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)}, 1, label});
    }
    return out;
}

Matrix rows_of(const std::vector<Example>& ex) {
    Matrix m(ex.size(), ex[0].input.size());
    for (std::size_t i = 0; i < ex.size(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            m(i, j) = ex[i].input[j];
        }
    }
    return m;
}

std::vector<int> labels_of(const std::vector<Example>& ex) {
    std::vector<int> out;
    for (const auto& e : ex) {
        out.push_back(e.label);
    }
    return out;
}

}  // namespace

TEST(ConfigTest, DefaultsAndTextRoundTrip) {
    PipelineConfig c;
    EXPECT_EQ(c.top_k, 250u);
    EXPECT_EQ(c.pca_components, 7u);
    EXPECT_EQ(c.knn_k, 27u);
    EXPECT_EQ(c.mlp_layers, (std::vector<std::size_t>{32, 16, 8, 4, 2, 1}));
    EXPECT_EQ(c.trainer.learning_rate, 0.001);
    EXPECT_EQ(c.trainer.lr_floor, 0.00005);
    EXPECT_EQ(c.trainer.max_epochs, 500);
    EXPECT_EQ(c.trainer.restart_f1_threshold, 0.6);

    c.set("knn_k", "5");
    c.set("mlp_layers", "8,4");
    c.set("svm_kernel", "linear");
    c.set("learning_rate", "0.01");
    c.set("test_unknown", "non-smoker");
    const auto back = PipelineConfig::parse(c.to_text(), "mem");
    EXPECT_EQ(back.to_text(), c.to_text());
    EXPECT_EQ(back.knn_k, 5u);
    EXPECT_EQ(back.trainer.learning_rate, 0.01);
    EXPECT_TRUE(back.test_unknown_as_non_smoker);
}

TEST(ConfigTest, HashIgnoresOutputLocation) {
    PipelineConfig a;
    PipelineConfig b;
    b.out_dir = "elsewhere";
    EXPECT_EQ(a.hash(), b.hash());
    b.knn_k = 3;
    EXPECT_NE(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
}

TEST(ConfigTest, ParseErrorsNameTheLine) {
    try {
        PipelineConfig::parse("# comment\nknn_k = 3\nbogus = 1\n", "run.cfg");
        FAIL();
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find("run.cfg:3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(PipelineConfig::parse("knn_k\n", "x"), UsageError);
    EXPECT_THROW(PipelineConfig::parse("knn_k = many\n", "x"), UsageError);
    EXPECT_THROW(PipelineConfig::parse("run_svm = maybe\n", "x"), UsageError);
}

TEST(ConfigTest, ValidateChecksRanges) {
    PipelineConfig c;
    c.knn_k = 0;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.validation_fraction = 1.0;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.embeddings_train = "a.pheb";
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.trainer.lr_floor = 1.0;
    EXPECT_THROW(c.validate(), UsageError);
}

TEST(ConfigTest, LoadResolvesRelativePaths) {
    const auto dir = testutil::scratch("config_load");
    testutil::write_text(dir / "exp.cfg", "train_corpus = data/train.jsonl\nlexicon = /abs/lex.txt\n");
    const auto c = PipelineConfig::load(dir / "exp.cfg");
    EXPECT_EQ(c.train_corpus, dir / "data" / "train.jsonl");
    EXPECT_EQ(c.lexicon, fs::path("/abs/lex.txt"));
}

TEST(ArtifactTest, RoundTripPreservesPredictions) {
    const auto train = blob_examples(40, 1);
    const auto test = blob_examples(20, 2);
    const Matrix xt = rows_of(train);
    const Matrix xq = rows_of(test);

    std::vector<ModelArtifact> arts;
    arts.push_back({Algo::Knn, LabelSpace::Binary2, KnnModel(3, xt, labels_of(train), 2), "h1", {}});
    std::vector<int> pm;
    for (int l : labels_of(train)) {
        pm.push_back(l == 1 ? 1 : -1);
    }
    arts.push_back({Algo::Svm, LabelSpace::Binary2, svm_fit(xt, pm).compact(), "h2", {}});
    NetSpec spec;
    spec.input_dim = 2;
    spec.hidden_layers = {4};
    NeuralNet net(spec);
    net.init_glorot(3);
    arts.push_back({Algo::Mlp, LabelSpace::Binary2, net, {}, {}});

    for (const auto& a : arts) {
        const auto back = artifact_from_json(artifact_to_json(a));
        EXPECT_EQ(back.algo, a.algo);
        EXPECT_EQ(back.config_hash, a.config_hash);
        EXPECT_EQ(back.input_dim(), 2u);
        EXPECT_EQ(predict_rows(back, xq), predict_rows(a, xq));
        EXPECT_EQ(artifact_to_json(back), artifact_to_json(a));
        EXPECT_THROW(predict_rows(a, Matrix(1, 3)), DataError);
    }
    EXPECT_EQ(predict_rows(arts[0], xq), labels_of(test));
    EXPECT_EQ(predict_rows(arts[1], xq), labels_of(test));
}

TEST(ArtifactTest, RejectsBadFiles) {
    EXPECT_THROW(artifact_from_json("not json"), DataError);
    EXPECT_THROW(artifact_from_json(R"({"algo":"knn"})"), DataError);
    const auto dir = testutil::scratch("artifact_bad");
    EXPECT_THROW(load_artifact(dir / "missing.json"), DataError);
    EXPECT_THROW(parse_algo("forest"), UsageError);
}

TEST(EvaluateTest, ReportAndErrors) {
    const auto train = blob_examples(30, 4);
    const ModelArtifact a{Algo::Knn, LabelSpace::Binary2, KnnModel(1, rows_of(train), labels_of(train), 2), {}, {}};
    const auto r = evaluate_run(a, rows_of(train), labels_of(train), "knn");
    EXPECT_EQ(r.micro_f1, 1.0);
    EXPECT_EQ(r.label_space_cardinality, 2u);
    EXPECT_GE(r.wall_clock_seconds, 0.0);
    EXPECT_THROW(evaluate_run(a, Matrix(0, 2), std::vector<int>{}, "knn"), DataError);
    EXPECT_THROW(evaluate_run(a, rows_of(train), std::vector<int>{0}, "knn"), DataError);
}

TEST(BaselineTest, ObservedClassWeights) {
    const std::vector<int> labels{0, 0, 0, 2};
    const auto w = observed_class_weights(labels, 4);
    EXPECT_DOUBLE_EQ(w[0], 4.0 / (2 * 3));
    EXPECT_DOUBLE_EQ(w[1], 1.0);
    EXPECT_DOUBLE_EQ(w[2], 4.0 / (2 * 1));
    EXPECT_THROW(observed_class_weights(std::vector<int>{1, 1}, 4), DataError);
}

TEST(BaselineTest, SplitValidation) {
    const auto data = blob_examples(50, 5);
    const auto [tr, va] = split_validation(data, 0.1, 6);
    EXPECT_EQ(tr.size(), 45u);
    EXPECT_EQ(va.size(), 5u);
    const auto [all, none] = split_validation(data, 0.0, 6);
    EXPECT_EQ(all.size(), 50u);
    EXPECT_TRUE(none.empty());
    EXPECT_THROW(split_validation(data, 1.0, 6), UsageError);
}

TEST(BaselineTest, SeparableEmbeddingsHeldOutPerfect) {
    const auto train = synthesize_embeddings(20, 8, 2, 10);
    const auto test = synthesize_embeddings(20, 8, 2, 11);
    const auto ytr = class_indices(*train.labels, LabelSpace::Binary2);
    const auto yte = class_indices(*test.labels, LabelSpace::Binary2);
    BaselineConfig cfg;
    cfg.trainer.seed = 12;
    const auto r = embed_baseline_train(train, ytr, 2, cfg);
    const ModelArtifact a{Algo::Lstm, LabelSpace::Binary2, r.net, {}, r.history};
    EXPECT_EQ(evaluate_run(a, test, yte, "lstm").micro_f1, 1.0);
}

TEST(BaselineTest, PerChunkSequences) {
    const auto train = synthesize_embeddings(24, 6, 3, 13, 3);
    const auto test = synthesize_embeddings(12, 6, 3, 14, 3);
    const auto ytr = class_indices(*train.labels, LabelSpace::Raw4);
    BaselineConfig cfg;
    cfg.use_chunks = true;
    cfg.hidden = {8};
    cfg.trainer.seed = 15;
    const auto r = embed_baseline_train(train, ytr, 4, cfg);
    const ModelArtifact a{Algo::Lstm, LabelSpace::Raw4, r.net, {}, r.history};
    EXPECT_EQ(evaluate_run(a, test, class_indices(*test.labels, LabelSpace::Raw4), "lstm").micro_f1, 1.0);
    const ModelArtifact knn{Algo::Knn, LabelSpace::Raw4, KnnModel(1, Matrix(1, 6), {0}, 4), {}, {}};
    EXPECT_EQ(predict_embeddings(knn, test).size(), 12u);
}

TEST(BaselineTest, Errors) {
    EmbeddingSet empty;
    empty.dim = 4;
    EXPECT_THROW(embed_baseline_train(empty, std::vector<int>{}, 2, {}), DataError);
    const auto s = synthesize_embeddings(4, 4, 2, 1);
    EXPECT_THROW(embed_baseline_train(s, std::vector<int>{0, 1}, 2, {}), DataError);
    NetSpec spec;
    spec.input_dim = 5;
    spec.hidden_layers = {2};
    spec.cell = CellType::Lstm;
    const ModelArtifact a{Algo::Lstm, LabelSpace::Binary2, NeuralNet(spec), {}, {}};
    EXPECT_THROW(predict_embeddings(a, s), DataError);
}

TEST(EndToEndTest, MissingLexiconFailsBeforeWork) {
    const auto dir = testutil::scratch("e2e_missing");
    auto cfg = testutil::synthetic_experiment(dir, 0.8, 1, false);
    cfg.lexicon = dir / "no-such-lexicon.txt";
    try {
        run_end_to_end(cfg);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("no-such-lexicon.txt"), std::string::npos);
    }
    EXPECT_FALSE(fs::exists(dir / "run"));
}

TEST(EndToEndTest, StageNameOnFailure) {
    const auto dir = testutil::scratch("e2e_stage");
    auto cfg = testutil::synthetic_experiment(dir, 0.8, 1, false);
    testutil::write_text(dir / "test.jsonl", "{broken\n");
    try {
        run_end_to_end(cfg);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("ingest: ", 0), 0u) << e.what();
    }
}

TEST(EndToEndTest, FullSignalFourModels) {
    const auto dir = testutil::scratch("e2e_full");
    auto cfg = testutil::synthetic_experiment(dir, 1.0, 2, true);
    cfg.trainer.max_epochs = 60;
    std::vector<std::string> log;
    const auto s = run_end_to_end(cfg, [&](const std::string& l) { log.push_back(l); });
    ASSERT_EQ(s.reports.size(), 4u);
    EXPECT_EQ(s.reports[0].model, "PCA + KNN (K=27)");
    EXPECT_EQ(s.reports[0].micro_f1, 1.0);
    for (const auto& r : s.reports) {
        EXPECT_GE(r.micro_f1, 0.0);
        EXPECT_LE(r.micro_f1, 1.0);
    }
    EXPECT_EQ(s.reports[3].label_space_cardinality, 4u);
    EXPECT_EQ(s.vocabulary_size, 250u);
    EXPECT_EQ(s.config_hash, cfg.hash());
    EXPECT_FALSE(log.empty());

    for (const char* f : {"vocab.csv", "train_features.csv", "test_features.csv", "pca.json", "train_pca.csv",
                          "test_pca.csv", "models/knn.json", "models/svm.json", "models/mlp.json",
                          "models/lstm.json", "reports/pca-knn-k-27.json", "reports/embeddings-lstm.json",
                          "summary.json", "summary.txt", "timings.json", "config.txt"}) {
        EXPECT_TRUE(fs::exists(cfg.out_dir / f)) << f;
    }
    EXPECT_NE(read_file(cfg.out_dir / "pca.json").find(cfg.hash()), std::string::npos);
    EXPECT_EQ(load_artifact(cfg.out_dir / "models" / "knn.json").config_hash, cfg.hash());

    // Stand-alone prediction from the saved artifacts reproduces the report.
    const auto knn = load_artifact(cfg.out_dir / "models" / "knn.json");
    const auto test_pca = read_table_csv(cfg.out_dir / "test_pca.csv");
    const auto gold = parse_labels(*test_pca.labels, "test_pca.csv");
    EXPECT_EQ(evaluate_run(knn, test_pca.values, class_indices(gold.labels, LabelSpace::Binary2), "x").micro_f1,
              1.0);
}
