// Python bindings for the phenonote core library.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "phenonote/corpus.hpp"
#include "phenonote/embeddings.hpp"
#include "phenonote/error.hpp"
#include "phenonote/knn.hpp"
#include "phenonote/lexicon.hpp"
#include "phenonote/metrics.hpp"
#include "phenonote/pca.hpp"
#include "phenonote/pipeline.hpp"
#include "phenonote/svm.hpp"

namespace py = pybind11;
using namespace phenonote;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) {
        throw UsageError("expected a 2-d array, got " + std::to_string(a.ndim()) + " dimensions");
    }
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

std::vector<int> to_ints(const IntArray& a) {
    if (a.ndim() != 1) {
        throw UsageError("expected a 1-d label array");
    }
    return {a.data(), a.data() + a.size()};
}

py::array_t<int> to_int_array(const std::vector<int>& v) {
    return py::array_t<int>(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())}, v.data());
}

EmbeddingMode parse_mode(const std::string& mode) {
    if (mode == "averaged") return EmbeddingMode::Averaged;
    if (mode == "per_chunk") return EmbeddingMode::PerChunk;
    throw UsageError("unknown embedding mode '" + mode + "' (expected averaged or per_chunk)");
}

std::string mode_name(EmbeddingMode mode) {
    return mode == EmbeddingMode::Averaged ? "averaged" : "per_chunk";
}

// Records as (id, chunks x dim float32 array) pairs.
EmbeddingSet make_set(const std::vector<std::string>& ids, const std::vector<py::array_t<float, py::array::c_style | py::array::forcecast>>& values,
                      const std::string& mode) {
    if (ids.size() != values.size()) {
        throw UsageError("got " + std::to_string(ids.size()) + " ids but " + std::to_string(values.size()) +
                         " value arrays");
    }
    EmbeddingSet set;
    set.mode = parse_mode(mode);
    set.dim = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& v = values[i];
        if (v.ndim() != 1 && v.ndim() != 2) {
            throw UsageError("embedding values must be 1-d or 2-d");
        }
        const auto dim = static_cast<std::uint32_t>(v.shape(v.ndim() - 1));
        if (i == 0) {
            set.dim = dim;
        }
        EmbeddingRecord r;
        r.id = ids[i];
        r.chunks = v.ndim() == 2 ? static_cast<std::size_t>(v.shape(0)) : 1;
        r.values.assign(v.data(), v.data() + v.size());
        set.records.push_back(std::move(r));
    }
    validate(set);
    return set;
}

py::list record_arrays(const EmbeddingSet& set) {
    py::list out;
    for (const auto& r : set.records) {
        py::array_t<float> a({r.chunks, static_cast<std::size_t>(set.dim)});
        std::copy(r.values.begin(), r.values.end(), a.mutable_data());
        out.append(a);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Smoking-status phenotyping from clinical notes";

    static py::exception<Error> base(m, "PhenonoteError", PyExc_RuntimeError);
    static py::exception<DataError> data_error(m, "DataError", base.ptr());
    static py::exception<UsageError> usage_error(m, "UsageError", base.ptr());
    static py::exception<NumericError> numeric_error(m, "NumericError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const DataError& e) {
            data_error(e.what());
        } catch (const UsageError& e) {
            usage_error(e.what());
        } catch (const NumericError& e) {
            numeric_error(e.what());
        } catch (const Error& e) {
            base(e.what());
        }
    });

    // Text and lexicon.
    m.def("normalize_text", py::overload_cast<std::string_view>(&normalize_text), py::arg("text"));

    py::class_<Lexicon>(m, "Lexicon")
        .def_readonly("terms", &Lexicon::terms)
        .def_readonly("source", &Lexicon::source)
        .def("__len__", [](const Lexicon& l) { return l.terms.size(); });
    m.def("load_lexicon", &load_lexicon, py::arg("path"));
    m.def("make_lexicon", &make_lexicon, py::arg("terms"), py::arg("source") = "<python>");
    m.def(
        "scan_terms",
        [](const std::string& text, const Lexicon& lexicon) {
            const auto found = scan_terms(Note{"", normalize_text(text), Label::Unknown}, lexicon);
            return std::vector<std::string>(found.begin(), found.end());
        },
        py::arg("text"), py::arg("lexicon"), "Distinct lexicon terms in the normalized text, sorted.");

    // Corpora.
    py::class_<Note>(m, "Note")
        .def_readonly("id", &Note::id)
        .def_readonly("text", &Note::text)
        .def_property_readonly("label", [](const Note& n) { return std::string(label_name(n.label)); });
    py::class_<LabeledCorpus>(m, "Corpus")
        .def_readonly("notes", &LabeledCorpus::notes)
        .def_property_readonly("label_space",
                               [](const LabeledCorpus& c) { return std::string(label_space_name(c.label_space)); })
        .def("__len__", [](const LabeledCorpus& c) { return c.notes.size(); });
    m.def(
        "read_corpus",
        [](const std::filesystem::path& path, const std::string& format) {
            if (format != "jsonl" && format != "xml") {
                throw UsageError("unknown corpus format '" + format + "' (expected jsonl or xml)");
            }
            return ingest_corpus(path, format == "xml" ? CorpusFormat::N2c2Xml : CorpusFormat::Jsonl);
        },
        py::arg("path"), py::arg("format") = "jsonl");
    m.def(
        "prepare_corpus",
        [](const LabeledCorpus& corpus, bool unknown_as_non_smoker) {
            const auto r = consolidate_labels(normalize_text(corpus), unknown_as_non_smoker
                                                                          ? UnknownPolicy::AsNonSmoker
                                                                          : UnknownPolicy::Drop);
            return py::make_tuple(r.corpus, r.removed_unknown);
        },
        py::arg("corpus"), py::arg("unknown_as_non_smoker") = false,
        "Normalize text and consolidate labels to smoker / non-smoker. Returns (corpus, removed_unknown).");
    m.def(
        "class_indices",
        [](const LabeledCorpus& c) {
            std::vector<Label> labels;
            for (const auto& n : c.notes) labels.push_back(n.label);
            return to_int_array(class_indices(labels, c.label_space));
        },
        py::arg("corpus"));

    // Vocabulary and features.
    py::class_<TermVocabulary>(m, "Vocabulary")
        .def_readonly("terms", &TermVocabulary::terms)
        .def_readonly("doc_freq", &TermVocabulary::doc_freq)
        .def("to_csv", &write_vocabulary_csv);
    m.def("build_vocabulary", &build_vocabulary, py::arg("corpus"), py::arg("lexicon"), py::arg("top_k") = 250);
    m.def(
        "featurize",
        [](const LabeledCorpus& corpus, const TermVocabulary& vocab, const Lexicon& lexicon) {
            return to_array(featurize(corpus, vocab, lexicon).to_matrix());
        },
        py::arg("corpus"), py::arg("vocab"), py::arg("lexicon"), "Binary presence matrix (notes x terms).");

    // PCA.
    py::class_<PcaModel>(m, "PcaModel")
        .def_readonly("mean", &PcaModel::mean)
        .def_property_readonly("components", [](const PcaModel& p) { return to_array(p.components); })
        .def_readonly("explained_variance", &PcaModel::explained_variance)
        .def("transform", [](const PcaModel& p, const Array& x) { return to_array(transform_pca(p, to_matrix(x))); })
        .def("to_json", [](const PcaModel& p) { return pca_to_json(p); });
    m.def(
        "fit_pca", [](const Array& x, std::size_t n) { return fit_pca(to_matrix(x), n); }, py::arg("x"),
        py::arg("n_components") = 7);

    // Classifiers.
    py::class_<KnnModel>(m, "KnnModel")
        .def(py::init([](std::size_t k, const Array& points, const IntArray& labels, std::size_t n_classes) {
                 return KnnModel(k, to_matrix(points), to_ints(labels), n_classes);
             }),
             py::arg("k"), py::arg("points"), py::arg("labels"), py::arg("n_classes") = 0)
        .def_property_readonly("k", &KnnModel::k)
        .def("predict",
             [](const KnnModel& knn, const Array& x) { return to_int_array(knn.predict(to_matrix(x))); });

    py::class_<SvmModel>(m, "SvmModel")
        .def_readonly("bias", &SvmModel::bias)
        .def_readonly("alphas", &SvmModel::alphas)
        .def("decision_function",
             [](const SvmModel& svm, const Array& x) {
                 const auto q = to_matrix(x);
                 std::vector<double> out;
                 for (std::size_t i = 0; i < q.rows(); ++i) out.push_back(svm.decision(q.row(i)));
                 return out;
             })
        .def("predict", [](const SvmModel& svm, const Array& x) { return to_int_array(svm_predict(svm, to_matrix(x))); })
        .def("dual_objective", [](const SvmModel& svm) { return dual_objective(svm); });
    m.def(
        "fit_svm",
        [](const Array& x, const IntArray& labels, double c, const std::string& kernel, std::optional<double> gamma,
           std::uint64_t seed) {
            SvmConfig cfg;
            cfg.c_penalty = c;
            cfg.kernel = parse_kernel(kernel);
            cfg.gamma = gamma;
            cfg.seed = seed;
            return svm_fit(to_matrix(x), to_ints(labels), cfg);
        },
        py::arg("x"), py::arg("labels"), py::arg("c") = 1.0, py::arg("kernel") = "rbf",
        py::arg("gamma") = py::none(), py::arg("seed") = 0, "Labels are +1 / -1.");

    py::class_<ModelArtifact>(m, "Model")
        .def_property_readonly("algo", [](const ModelArtifact& a) { return algo_name(a.algo); })
        .def_readonly("config_hash", &ModelArtifact::config_hash)
        .def("predict",
             [](const ModelArtifact& a, const Array& x) { return to_int_array(predict_rows(a, to_matrix(x))); });
    m.def("load_model", &load_artifact, py::arg("path"));

    // Metrics.
    m.def(
        "micro_f1", [](const IntArray& p, const IntArray& g) { return micro_f1(to_ints(p), to_ints(g)); },
        py::arg("predictions"), py::arg("gold"));

    // PHEB1 embeddings.
    py::class_<EmbeddingSet>(m, "EmbeddingSet")
        .def(py::init(&make_set), py::arg("ids"), py::arg("values"), py::arg("mode") = "averaged")
        .def_property_readonly("mode", [](const EmbeddingSet& s) { return mode_name(s.mode); })
        .def_readonly("dim", &EmbeddingSet::dim)
        .def_property_readonly("ids",
                               [](const EmbeddingSet& s) {
                                   std::vector<std::string> ids;
                                   for (const auto& r : s.records) ids.push_back(r.id);
                                   return ids;
                               })
        .def_property_readonly("values", &record_arrays, "One (chunks x dim) float32 array per record.")
        .def("__len__", [](const EmbeddingSet& s) { return s.records.size(); })
        .def("__eq__", [](const EmbeddingSet& a, const EmbeddingSet& b) { return a == b; })
        .def("encode", [](const EmbeddingSet& s) { return py::bytes(encode_embeddings(s)); })
        .def_static(
            "decode",
            [](const py::bytes& b, const std::string& source) { return decode_embeddings(std::string(b), source); },
            py::arg("data"), py::arg("source") = "<bytes>")
        .def("averaged", &average_chunks)
        .def("describe", &describe_embeddings);
    m.def("read_embeddings", &read_embeddings, py::arg("path"));
    m.def("write_embeddings", &write_embeddings, py::arg("set"), py::arg("path"));
    m.def("synthesize_embeddings", &synthesize_embeddings, py::arg("n"), py::arg("dim"), py::arg("classes"),
          py::arg("seed"), py::arg("chunks_per_note") = 1);

    // End-to-end pipeline.
    m.def(
        "run_pipeline",
        [](std::optional<std::filesystem::path> config_path, const std::map<std::string, std::string>& overrides,
           std::function<void(const std::string&)> log) {
            auto cfg = config_path ? PipelineConfig::load(*config_path) : PipelineConfig{};
            for (const auto& [key, value] : overrides) {
                cfg.set(key, value);
            }
            cfg.validate();
            RunSummary summary;
            {
                py::gil_scoped_release release;
                LogFn fn;
                if (log) {
                    fn = [&log](const std::string& line) {
                        py::gil_scoped_acquire acquire;
                        log(line);
                    };
                }
                summary = run_end_to_end(cfg, fn);
            }
            return summary_to_json(summary);
        },
        py::arg("config") = py::none(), py::arg("overrides") = std::map<std::string, std::string>{},
        py::arg("log") = py::none(), "Runs the full pipeline and returns the summary as JSON text.");
}
