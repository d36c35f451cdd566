#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "phenonote/corpus.hpp"
#include "phenonote/embeddings.hpp"
#include "phenonote/error.hpp"
#include "phenonote/io.hpp"
#include "phenonote/lexicon.hpp"
#include "phenonote/metrics.hpp"
#include "phenonote/pca.hpp"
#include "phenonote/pipeline.hpp"
#include "phenonote/synth.hpp"

namespace fs = std::filesystem;
using namespace phenonote;

namespace {

CorpusFormat parse_format(const std::string& s) {
    if (s == "jsonl") {
        return CorpusFormat::Jsonl;
    }
    if (s == "n2c2" || s == "n2c2_xml") {
        return CorpusFormat::N2c2Xml;
    }
    throw UsageError("unknown corpus format '" + s + "' (expected jsonl or n2c2)");
}

UnknownPolicy parse_unknown(const std::string& s) {
    if (s == "drop") {
        return UnknownPolicy::Drop;
    }
    if (s == "non-smoker") {
        return UnknownPolicy::AsNonSmoker;
    }
    throw UsageError("unknown --unknown value '" + s + "' (expected drop or non-smoker)");
}

std::vector<std::size_t> parse_layers(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(item, &used);
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw UsageError("bad layer size '" + item + "' in '" + s + "'");
        }
    }
    if (out.empty()) {
        throw UsageError("empty layer list");
    }
    return out;
}

/// Warn when an artifact was produced under a different configuration.
void check_hash(const std::string& artifact_hash, const std::string& config_path, const std::string& what) {
    if (config_path.empty() || artifact_hash.empty()) {
        return;
    }
    const auto expected = PipelineConfig::load(config_path).hash();
    if (expected != artifact_hash) {
        spdlog::warn("{} was produced with config hash {}, but {} hashes to {}", what, artifact_hash, config_path,
                     expected);
    }
}

std::string pca_hash(const fs::path& path) {
    const auto j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_object() && j.contains("config_hash") && j["config_hash"].is_string()) {
        return j["config_hash"].get<std::string>();
    }
    return {};
}

/// Labels of a table's label column, converted to `space`. Binary targets
/// accept raw labels: current and past smokers become smokers and unknown
/// rows follow `policy`. Returns the kept row indices alongside.
std::pair<std::vector<std::size_t>, std::vector<int>> table_gold(const std::vector<Label>& labels, LabelSpace space,
                                                                 UnknownPolicy policy, std::size_t& dropped) {
    std::vector<std::size_t> rows;
    std::vector<int> gold;
    dropped = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        Label l = labels[i];
        if (space == LabelSpace::Binary2) {
            if (l == Label::CurrentSmoker || l == Label::PastSmoker) {
                l = Label::Smoker;
            } else if (l == Label::Unknown) {
                if (policy == UnknownPolicy::Drop) {
                    ++dropped;
                    continue;
                }
                l = Label::NonSmoker;
            }
        } else if (l == Label::Smoker) {
            throw DataError("binary label 'smoker' cannot be scored against a 4-class model");
        }
        rows.push_back(i);
        gold.push_back(static_cast<int>(class_index(l, space)));
    }
    return {rows, gold};
}

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy(m.row(rows[i]).begin(), m.row(rows[i]).end(), out.row(i).begin());
    }
    return out;
}

/// Gold labels for a table: from a labels file keyed by id when given,
/// otherwise from the table's own label column.
std::vector<Label> gold_labels(const Table& t, const std::string& gold_path) {
    if (!gold_path.empty()) {
        const auto side = read_label_sidecar(gold_path);
        std::unordered_map<std::string, Label> by_id;
        for (const auto& n : side.notes) {
            by_id.emplace(n.id, n.label);
        }
        std::vector<Label> out;
        for (const auto& id : t.row_ids) {
            auto it = by_id.find(id);
            if (it == by_id.end()) {
                throw DataError(gold_path + ": no label for id '" + id + "'");
            }
            out.push_back(it->second);
        }
        return out;
    }
    if (!t.labels) {
        throw UsageError("the input has no label column; pass --gold");
    }
    return parse_labels(*t.labels, "label column").labels;
}

std::string predictions_csv(const std::vector<std::string>& ids, const std::vector<int>& preds, LabelSpace space) {
    std::string out = "id,prediction,class_index\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out += csv_escape(ids[i]) + "," +
               std::string(label_name(label_at(static_cast<std::size_t>(preds[i]), space))) + "," +
               std::to_string(preds[i]) + "\n";
    }
    return out;
}

EmbeddingSet load_embeddings_for_model(const std::string& path, bool use_chunks) {
    auto set = read_embeddings(path);
    if (set.size() == 0) {
        throw DataError(path + ": embedding file has no records");
    }
    if (!use_chunks && set.mode == EmbeddingMode::PerChunk) {
        set = average_chunks(set);
    }
    return set;
}

/// Class indices for embedding records looked up in a sidecar; unknown rows
/// of binary targets follow `policy`. Filters `set` to the kept records.
std::vector<int> embedding_gold(EmbeddingSet& set, const std::string& sidecar, LabelSpace space,
                                UnknownPolicy policy) {
    const auto side = read_label_sidecar(sidecar);
    std::vector<Label> raw = align_labels(set, side);
    std::size_t dropped = 0;
    auto [rows, gold] = table_gold(raw, space, policy, dropped);
    if (dropped > 0) {
        EmbeddingSet kept;
        kept.dim = set.dim;
        kept.mode = set.mode;
        for (auto r : rows) {
            kept.records.push_back(set.records[r]);
        }
        set = std::move(kept);
        spdlog::info("dropped {} records labelled unknown", dropped);
    }
    return gold;
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("phenonote");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");

    CLI::App app{"Clinical-note phenotyping pipeline: term features, PCA, KNN/SVM/MLP and an embedding baseline"};
    app.require_subcommand(1);
    app.add_flag_callback(
        "-q,--quiet", [] { spdlog::set_level(spdlog::level::warn); }, "Only log warnings and errors");

    // ingest ---------------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "Read a corpus, normalize it and write canonical JSONL");
    std::string ingest_in, ingest_format = "jsonl", ingest_out, ingest_unknown = "drop";
    bool ingest_consolidate = false, ingest_keep_case = false;
    ingest->add_option("--in", ingest_in, "Input corpus")->required();
    ingest->add_option("--format", ingest_format, "jsonl or n2c2")->capture_default_str();
    ingest->add_option("--out", ingest_out, "Output JSONL")->required();
    ingest->add_flag("--consolidate", ingest_consolidate, "Map to smoker / non-smoker labels");
    ingest->add_option("--unknown", ingest_unknown, "With --consolidate: drop or non-smoker")->capture_default_str();
    ingest->add_flag("--keep-case", ingest_keep_case, "Skip text normalization");
    ingest->callback([&] {
        auto corpus = ingest_corpus(ingest_in, parse_format(ingest_format));
        spdlog::info("read {} notes ({})", corpus.size(), label_space_name(corpus.label_space));
        if (!ingest_keep_case) {
            corpus = normalize_text(corpus);
        }
        if (ingest_consolidate) {
            auto r = consolidate_labels(corpus, parse_unknown(ingest_unknown));
            if (r.removed_unknown > 0) {
                spdlog::warn("removed {} notes labelled unknown", r.removed_unknown);
            }
            corpus = std::move(r.corpus);
        }
        write_file_atomic(ingest_out, to_jsonl(corpus));
        spdlog::info("wrote {} notes to {}", corpus.size(), ingest_out);
    });

    // featurize ------------------------------------------------------------
    auto* feat = app.add_subcommand("featurize", "Binary term-presence matrix for a corpus");
    std::string feat_corpus, feat_lexicon, feat_vocab, feat_vocab_out, feat_out;
    std::size_t feat_top_k = kDefaultTopK;
    feat->add_option("--corpus", feat_corpus, "Corpus JSONL")->required();
    feat->add_option("--lexicon", feat_lexicon, "Term list, one per line")->required();
    feat->add_option("--vocab", feat_vocab, "Existing vocabulary CSV (for test corpora)");
    feat->add_option("--vocab-out", feat_vocab_out, "Write the vocabulary built from this corpus");
    feat->add_option("--top-k", feat_top_k, "Vocabulary size")->capture_default_str();
    feat->add_option("--out", feat_out, "Feature matrix CSV")->required();
    feat->callback([&] {
        if (feat_top_k == 0) {
            throw UsageError("--top-k must be at least 1");
        }
        const auto lex = load_lexicon(feat_lexicon);
        const auto corpus = normalize_text(ingest_corpus(feat_corpus, CorpusFormat::Jsonl));
        TermVocabulary vocab;
        if (!feat_vocab.empty()) {
            vocab = parse_vocabulary_csv(read_file(feat_vocab), feat_vocab);
        } else {
            vocab = build_vocabulary(corpus, lex, feat_top_k);
            spdlog::info("vocabulary: {} terms", vocab.size());
        }
        if (!feat_vocab_out.empty()) {
            write_file_atomic(feat_vocab_out, write_vocabulary_csv(vocab));
        }
        const auto fm = featurize(corpus, vocab, lex);
        write_file_atomic(feat_out, write_table_csv(fm.to_table()));
        spdlog::info("wrote {} x {} features to {}", fm.rows(), fm.cols(), feat_out);
    });

    // pca -------------------------------------------------------------------
    auto* pca = app.add_subcommand("pca", "Fit or apply a PCA projection");
    pca->require_subcommand(1);
    auto* pca_fit = pca->add_subcommand("fit", "Fit principal axes on a training matrix");
    std::string pf_in, pf_model, pf_out, pf_solver = "auto";
    std::size_t pf_components = kDefaultPcaComponents;
    pca_fit->add_option("--in", pf_in, "Training feature CSV")->required();
    pca_fit->add_option("--components", pf_components, "Number of components")->capture_default_str();
    pca_fit->add_option("--model", pf_model, "Output PCA model JSON")->required();
    pca_fit->add_option("--out", pf_out, "Also write the projected training matrix");
    pca_fit->add_option("--solver", pf_solver, "auto, covariance or gram")->capture_default_str();
    pca_fit->callback([&] {
        PcaSolver solver = PcaSolver::Auto;
        if (pf_solver == "covariance") {
            solver = PcaSolver::Covariance;
        } else if (pf_solver == "gram") {
            solver = PcaSolver::Gram;
        } else if (pf_solver != "auto") {
            throw UsageError("unknown solver '" + pf_solver + "'");
        }
        const auto t = read_table_csv(pf_in);
        const auto model = fit_pca(t.values, pf_components, solver);
        write_file_atomic(pf_model, pca_to_json(model));
        if (!pf_out.empty()) {
            Table p;
            p.row_ids = t.row_ids;
            for (std::size_t c = 0; c < model.n_components(); ++c) {
                p.columns.push_back("pc" + std::to_string(c + 1));
            }
            p.values = transform_pca(model, t.values);
            p.labels = t.labels;
            write_file_atomic(pf_out, write_table_csv(p));
        }
        spdlog::info("fitted {} components on {} x {}", model.n_components(), t.values.rows(), t.values.cols());
    });
    auto* pca_tr = pca->add_subcommand("transform", "Project a matrix with a fitted model");
    std::string pt_model, pt_in, pt_out, pt_config;
    pca_tr->add_option("--model", pt_model, "PCA model JSON")->required();
    pca_tr->add_option("--in", pt_in, "Feature CSV")->required();
    pca_tr->add_option("--out", pt_out, "Projected CSV")->required();
    pca_tr->add_option("--config", pt_config, "Warn if the model came from a different config");
    pca_tr->callback([&] {
        check_hash(pca_hash(pt_model), pt_config, pt_model);
        const auto model = pca_from_json(read_file(pt_model));
        const auto t = read_table_csv(pt_in);
        Table p;
        p.row_ids = t.row_ids;
        for (std::size_t c = 0; c < model.n_components(); ++c) {
            p.columns.push_back("pc" + std::to_string(c + 1));
        }
        p.values = transform_pca(model, t.values);
        p.labels = t.labels;
        write_file_atomic(pt_out, write_table_csv(p));
        spdlog::info("projected {} rows to {} components", p.values.rows(), p.values.cols());
    });

    // train -----------------------------------------------------------------
    auto* trn = app.add_subcommand("train", "Train a classifier");
    std::string tr_algo, tr_in, tr_out, tr_emb, tr_labels, tr_kernel = "rbf", tr_layers = "32,16,8,4,2,1";
    std::string tr_label_space, tr_hidden = "64", tr_unknown = "drop";
    std::size_t tr_k = kDefaultKnnK, tr_batch = 32;
    double tr_c = 1.0, tr_dropout = -1.0, tr_lr = 0.001, tr_valid = 0.1;
    std::optional<double> tr_gamma;
    int tr_epochs = 500;
    std::uint64_t tr_seed = 0;
    bool tr_balance = false, tr_no_balance = false, tr_chunks = false;
    trn->add_option("--algo", tr_algo, "knn, svm, mlp or lstm")->required();
    trn->add_option("--in", tr_in, "Training CSV (projected features with a label column)");
    trn->add_option("--embeddings", tr_emb, "PHEB1 embeddings (lstm)");
    trn->add_option("--labels", tr_labels, "Label sidecar JSONL for --embeddings");
    trn->add_option("--out", tr_out, "Model JSON")->required();
    trn->add_option("--k", tr_k, "KNN neighbours")->capture_default_str();
    trn->add_option("--c", tr_c, "SVM box constraint")->capture_default_str();
    trn->add_option("--kernel", tr_kernel, "SVM kernel: rbf or linear")->capture_default_str();
    trn->add_option("--gamma", tr_gamma, "RBF gamma (default: scale)");
    trn->add_option("--layers", tr_layers, "MLP hidden sizes")->capture_default_str();
    trn->add_option("--hidden", tr_hidden, "LSTM hidden sizes")->capture_default_str();
    trn->add_option("--dropout", tr_dropout, "Dropout rate (mlp 0, lstm 0.25)");
    trn->add_option("--lr", tr_lr, "Initial learning rate")->capture_default_str();
    trn->add_option("--epochs", tr_epochs, "Maximum epochs")->capture_default_str();
    trn->add_option("--batch-size", tr_batch, "Minibatch size")->capture_default_str();
    trn->add_option("--validation-fraction", tr_valid, "Held-out share for monitoring")->capture_default_str();
    trn->add_flag("--balance", tr_balance, "Balanced class weights (default for lstm)");
    trn->add_flag("--no-balance", tr_no_balance, "Uniform class weights (default for mlp)");
    trn->add_flag("--chunks", tr_chunks, "LSTM: feed per-chunk sequences instead of averages");
    trn->add_option("--label-space", tr_label_space, "raw4 or binary2 (default: as in the labels)");
    trn->add_option("--unknown", tr_unknown, "Binary targets: drop or non-smoker for unknown labels")
        ->capture_default_str();
    trn->add_option("--seed", tr_seed, "Random seed")->capture_default_str();
    trn->callback([&] {
        const Algo algo = parse_algo(tr_algo);
        TrainerConfig tc;
        tc.learning_rate = tr_lr;
        tc.max_epochs = tr_epochs;
        tc.batch_size = tr_batch;
        tc.seed = tr_seed;
        tc.balance_classes = algo == Algo::Lstm ? !tr_no_balance : tr_balance;
        const UnknownPolicy policy = parse_unknown(tr_unknown);

        ModelArtifact a;
        a.algo = algo;
        if (!tr_emb.empty()) {
            if (algo != Algo::Lstm) {
                throw UsageError("--embeddings is for --algo lstm");
            }
            if (tr_labels.empty()) {
                throw UsageError("--embeddings needs --labels");
            }
            auto set = load_embeddings_for_model(tr_emb, tr_chunks);
            const auto side = read_label_sidecar(tr_labels);
            const LabelSpace space = tr_label_space.empty() ? side.label_space : parse_label_space(tr_label_space);
            const auto gold = embedding_gold(set, tr_labels, space, policy);
            BaselineConfig bc;
            bc.hidden = parse_layers(tr_hidden);
            bc.dropout = tr_dropout >= 0.0 ? tr_dropout : 0.25;
            bc.use_chunks = tr_chunks;
            bc.validation_fraction = tr_valid;
            bc.trainer = tc;
            auto result = embed_baseline_train(set, gold, label_space_size(space), bc);
            spdlog::info("trained {} epochs (best {}), {} restarts", result.history.stopped_epoch,
                         result.history.best_epoch, result.history.restarts);
            a.label_space = space;
            a.model = std::move(result.net);
            a.history = std::move(result.history);
            write_file_atomic(tr_out, artifact_to_json(a));
            return;
        }
        if (tr_in.empty()) {
            throw UsageError("train needs --in (or --embeddings with --labels for lstm)");
        }
        const auto t = read_table_csv(tr_in);
        if (!t.labels) {
            throw DataError(tr_in + ": no label column");
        }
        const auto parsed = parse_labels(*t.labels, tr_in);
        LabelSpace space = tr_label_space.empty() ? parsed.space : parse_label_space(tr_label_space);
        if (algo == Algo::Svm) {
            space = LabelSpace::Binary2;
        }
        std::size_t dropped = 0;
        auto [rows, y] = table_gold(parsed.labels, space, policy, dropped);
        if (dropped > 0) {
            spdlog::warn("dropped {} rows labelled unknown", dropped);
        }
        const Matrix x = select_rows(t.values, rows);
        a.label_space = space;
        switch (algo) {
            case Algo::Knn:
                a.model = KnnModel(tr_k, x, y, label_space_size(space));
                break;
            case Algo::Svm: {
                SvmConfig sc;
                sc.c_penalty = tr_c;
                sc.kernel = parse_kernel(tr_kernel);
                sc.gamma = tr_gamma;
                sc.seed = tr_seed;
                std::vector<int> pm(y.size());
                std::transform(y.begin(), y.end(), pm.begin(), [](int c) { return c == 1 ? 1 : -1; });
                auto model = svm_fit(x, pm, sc);
                spdlog::info("SMO finished after {} sweeps, max KKT violation {:.2e}", model.sweeps,
                             max_kkt_violation(model, x, pm));
                a.model = model.compact();
                break;
            }
            case Algo::Mlp:
            case Algo::Lstm: {
                NetSpec spec;
                spec.input_dim = x.cols();
                spec.output_classes = label_space_size(space);
                if (algo == Algo::Mlp) {
                    spec.hidden_layers = parse_layers(tr_layers);
                    spec.cell = CellType::Dense;
                    spec.dropout_rate = tr_dropout >= 0.0 ? tr_dropout : 0.0;
                    spec.activation = Activation::Relu;
                } else {
                    spec.hidden_layers = parse_layers(tr_hidden);
                    spec.cell = CellType::Lstm;
                    spec.dropout_rate = tr_dropout >= 0.0 ? tr_dropout : 0.25;
                    spec.activation = Activation::Tanh;
                }
                spec.validate();
                NeuralNet net(spec);
                net.init_glorot(Rng::derive(tr_seed, 11));
                auto [train_part, valid_part] =
                    split_validation(examples_from_rows(x, y), tr_valid, Rng::derive(tr_seed, 12));
                auto result = train(std::move(net), train_part, valid_part, tc);
                spdlog::info("trained {} epochs (best {}), {} restarts", result.history.stopped_epoch,
                             result.history.best_epoch, result.history.restarts);
                a.model = std::move(result.net);
                a.history = std::move(result.history);
                break;
            }
        }
        write_file_atomic(tr_out, artifact_to_json(a));
        spdlog::info("wrote {} model to {}", algo_name(algo), tr_out);
    });

    // predict ---------------------------------------------------------------
    auto* pred = app.add_subcommand("predict", "Predict labels with a trained model");
    std::string pr_model, pr_in, pr_emb, pr_out, pr_config;
    pred->add_option("--model", pr_model, "Model JSON")->required();
    pred->add_option("--in", pr_in, "Feature CSV");
    pred->add_option("--embeddings", pr_emb, "PHEB1 embeddings");
    pred->add_option("--out", pr_out, "Predictions CSV")->required();
    pred->add_option("--config", pr_config, "Warn if the model came from a different config");
    pred->callback([&] {
        const auto a = load_artifact(pr_model);
        check_hash(a.config_hash, pr_config, pr_model);
        std::vector<std::string> ids;
        std::vector<int> preds;
        if (!pr_emb.empty()) {
            auto set = read_embeddings(pr_emb);
            for (const auto& r : set.records) {
                ids.push_back(r.id);
            }
            preds = predict_embeddings(a, set);
        } else if (!pr_in.empty()) {
            const auto t = read_table_csv(pr_in);
            ids = t.row_ids;
            preds = predict_rows(a, t.values);
        } else {
            throw UsageError("predict needs --in or --embeddings");
        }
        write_file_atomic(pr_out, predictions_csv(ids, preds, a.label_space));
        spdlog::info("wrote {} predictions to {}", preds.size(), pr_out);
    });

    // evaluate --------------------------------------------------------------
    auto* ev = app.add_subcommand("evaluate", "Score a model on labelled data");
    std::string ev_model, ev_test, ev_emb, ev_gold, ev_report, ev_name, ev_unknown = "drop", ev_config;
    bool ev_table = false, ev_timing = false;
    ev->add_option("--model", ev_model, "Model JSON")->required();
    ev->add_option("--test", ev_test, "Feature CSV");
    ev->add_option("--embeddings", ev_emb, "PHEB1 embeddings");
    ev->add_option("--gold", ev_gold, "Labels JSONL keyed by id (default: the CSV label column)");
    ev->add_option("--report", ev_report, "Report JSON");
    ev->add_option("--name", ev_name, "Model name in the report");
    ev->add_option("--unknown", ev_unknown, "Binary models: drop or non-smoker for unknown gold labels")
        ->capture_default_str();
    ev->add_option("--config", ev_config, "Warn if the model came from a different config");
    ev->add_flag("--table", ev_table, "Print a results table");
    ev->add_flag("--timing", ev_timing, "Include prediction wall-clock time in the report");
    ev->callback([&] {
        const auto a = load_artifact(ev_model);
        check_hash(a.config_hash, ev_config, ev_model);
        const std::string name = ev_name.empty() ? algo_name(a.algo) : ev_name;
        const UnknownPolicy policy = parse_unknown(ev_unknown);
        EvalReport report;
        if (!ev_emb.empty()) {
            if (ev_gold.empty()) {
                throw UsageError("--embeddings needs --gold");
            }
            auto set = read_embeddings(ev_emb);
            const auto gold = embedding_gold(set, ev_gold, a.label_space, policy);
            report = evaluate_run(a, set, gold, name);
        } else if (!ev_test.empty()) {
            const auto t = read_table_csv(ev_test);
            std::size_t dropped = 0;
            auto [rows, gold] = table_gold(gold_labels(t, ev_gold), a.label_space, policy, dropped);
            if (dropped > 0) {
                spdlog::warn("dropped {} rows labelled unknown", dropped);
            }
            report = evaluate_run(a, select_rows(t.values, rows), gold, name);
        } else {
            throw UsageError("evaluate needs --test or --embeddings");
        }
        const auto json = report_to_json(report, ev_timing);
        if (!ev_report.empty()) {
            write_file_atomic(ev_report, json);
        }
        if (ev_table) {
            std::cout << render_table({report});
        } else if (ev_report.empty()) {
            std::cout << json;
        }
        spdlog::info("{}: micro-F1 {:.4f} on {} instances", name, report.micro_f1, report.n_instances);
    });

    // embed -----------------------------------------------------------------
    auto* emb = app.add_subcommand("embed", "Inspect or synthesize PHEB1 embedding files");
    emb->require_subcommand(1);
    auto* emb_inspect = emb->add_subcommand("inspect", "Print the header and per-note chunk counts");
    std::string ei_file;
    emb_inspect->add_option("file", ei_file, "PHEB1 file")->required();
    emb_inspect->callback([&] { std::cout << describe_embeddings(read_embeddings(ei_file)); });
    auto* emb_synth = emb->add_subcommand("synth", "Write a linearly separable synthetic set");
    std::size_t es_n = 100, es_classes = 2, es_chunks = 1;
    std::uint32_t es_dim = 16;
    std::uint64_t es_seed = 0;
    std::string es_out, es_labels, es_corpus, es_label_space;
    emb_synth->add_option("--n", es_n, "Records")->capture_default_str();
    emb_synth->add_option("--dim", es_dim, "Vector width")->capture_default_str();
    emb_synth->add_option("--classes", es_classes, "Classes (2 to 4)")->capture_default_str();
    emb_synth->add_option("--chunks", es_chunks, "Chunks per note (>1 writes per_chunk mode)")->capture_default_str();
    emb_synth->add_option("--seed", es_seed, "Random seed")->capture_default_str();
    emb_synth->add_option("--corpus", es_corpus, "Follow the ids and labels of this corpus instead");
    emb_synth->add_option("--label-space", es_label_space, "With --corpus: raw4 or binary2");
    emb_synth->add_option("--out", es_out, "Output PHEB1 file")->required();
    emb_synth->add_option("--labels", es_labels, "Also write a label sidecar JSONL");
    emb_synth->callback([&] {
        EmbeddingSet set;
        if (!es_corpus.empty()) {
            const auto corpus = ingest_corpus(es_corpus, CorpusFormat::Jsonl);
            const LabelSpace space = es_label_space.empty() ? corpus.label_space : parse_label_space(es_label_space);
            LabeledCorpus use = corpus;
            if (space == LabelSpace::Binary2 && corpus.label_space == LabelSpace::Raw4) {
                use = consolidate_labels(corpus, UnknownPolicy::AsNonSmoker).corpus;
            }
            set = synthesize_embeddings_for(use, space, es_dim, es_seed);
        } else {
            set = synthesize_embeddings(es_n, es_dim, es_classes, es_seed, es_chunks);
        }
        write_embeddings(set, es_out);
        if (!es_labels.empty()) {
            std::string side;
            for (std::size_t i = 0; i < set.size(); ++i) {
                nlohmann::ordered_json j;
                j["id"] = set.records[i].id;
                j["label"] = std::string(label_name((*set.labels)[i]));
                side += j.dump() + "\n";
            }
            write_file_atomic(es_labels, side);
        }
        spdlog::info("wrote {} records (dim {}) to {}", set.size(), set.dim, es_out);
    });

    // synth -----------------------------------------------------------------
    auto* syn = app.add_subcommand("synth", "Generate planted-signal train/test corpora");
    SyntheticConfig sc;
    std::string sy_lexicon, sy_out_dir;
    std::uint32_t sy_emb_dim = 0;
    syn->add_option("--lexicon", sy_lexicon, "Term list to plant from")->required();
    syn->add_option("--out-dir", sy_out_dir, "Directory for train.jsonl and test.jsonl")->required();
    syn->add_option("--n-train", sc.n_train, "Training notes")->capture_default_str();
    syn->add_option("--n-test", sc.n_test, "Test notes")->capture_default_str();
    syn->add_option("--n-terms", sc.n_terms, "Distinct planted terms")->capture_default_str();
    syn->add_option("--signal", sc.signal_strength, "Signal strength in [0, 1]")->capture_default_str();
    syn->add_option("--signal-fraction", sc.signal_fraction, "Share of signal terms")->capture_default_str();
    syn->add_option("--base-rate", sc.base_rate, "Base presence rate per term")->capture_default_str();
    syn->add_option("--smoker-rate", sc.smoker_rate, "Share of smokers")->capture_default_str();
    syn->add_option("--unknown-rate", sc.unknown_rate, "Share of unknown labels")->capture_default_str();
    syn->add_option("--seed", sc.seed, "Random seed")->capture_default_str();
    syn->add_option("--embeddings-dim", sy_emb_dim, "Also write separable embeddings of this width");
    syn->callback([&] {
        const auto lex = load_lexicon(sy_lexicon);
        const auto out = generate_synthetic_corpus(sc, lex);
        const fs::path dir = sy_out_dir;
        write_file_atomic(dir / "train.jsonl", to_jsonl(out.train));
        write_file_atomic(dir / "test.jsonl", to_jsonl(out.test));
        if (sy_emb_dim > 0) {
            write_embeddings(synthesize_embeddings_for(out.train, LabelSpace::Raw4, sy_emb_dim, Rng::derive(sc.seed, 7)),
                             dir / "train.pheb");
            write_embeddings(synthesize_embeddings_for(out.test, LabelSpace::Raw4, sy_emb_dim, Rng::derive(sc.seed, 8)),
                             dir / "test.pheb");
        }
        spdlog::info("wrote {} train and {} test notes to {} ({} signal terms)", out.train.size(), out.test.size(),
                     sy_out_dir, out.signal_terms.size());
    });

    // end-to-end ------------------------------------------------------------
    auto* e2e = app.add_subcommand("end-to-end", "Run the full comparison and write reports");
    std::string ee_config, ee_train, ee_test, ee_lexicon, ee_out, ee_emb_train, ee_emb_test;
    std::optional<std::uint64_t> ee_seed;
    std::vector<std::string> ee_sets;
    e2e->add_option("--config", ee_config, "key = value config file");
    e2e->add_option("--train", ee_train, "Training corpus (train_corpus)");
    e2e->add_option("--test", ee_test, "Test corpus (test_corpus)");
    e2e->add_option("--lexicon", ee_lexicon, "Term list (lexicon)");
    e2e->add_option("--out-dir", ee_out, "Output directory (out_dir)");
    e2e->add_option("--embeddings-train", ee_emb_train, "Training embeddings (embeddings_train)");
    e2e->add_option("--embeddings-test", ee_emb_test, "Test embeddings (embeddings_test)");
    e2e->add_option("--seed", ee_seed, "Random seed (seed)");
    e2e->add_option("--set", ee_sets, "Override any config key: --set key=value");
    e2e->callback([&] {
        PipelineConfig cfg = ee_config.empty() ? PipelineConfig{} : PipelineConfig::load(ee_config);
        const std::vector<std::pair<std::string, std::string*>> flags = {
            {"train_corpus", &ee_train},        {"test_corpus", &ee_test},
            {"lexicon", &ee_lexicon},           {"out_dir", &ee_out},
            {"embeddings_train", &ee_emb_train}, {"embeddings_test", &ee_emb_test},
        };
        for (const auto& [key, value] : flags) {
            if (!value->empty()) {
                cfg.set(key, *value);
            }
        }
        if (ee_seed) {
            cfg.seed = *ee_seed;
        }
        for (const auto& kv : ee_sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw UsageError("--set expects key=value, got '" + kv + "'");
            }
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        const auto summary = run_end_to_end(cfg, [](const std::string& line) { spdlog::info("{}", line); });
        std::cout << summary.table;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests exit 0; every other parse failure is a
        // usage error.
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
