#include "phenonote/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "json.hpp"
#include "phenonote/error.hpp"

namespace phenonote {

double micro_f1(std::span<const int> predictions, std::span<const int> gold) {
    if (predictions.size() != gold.size()) {
        throw DataError("micro_f1: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(gold.size()) + " gold labels");
    }
    if (gold.empty()) {
        throw DataError("micro_f1: empty prediction set");
    }
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (predictions[i] == gold[i]) {
            ++tp;
        } else {
            // A wrong single-label prediction is a false positive for the
            // predicted class and a false negative for the gold class.
            ++fp;
            ++fn;
        }
    }
    const double f1 = static_cast<double>(tp) / (static_cast<double>(tp) + 0.5 * static_cast<double>(fp + fn));
    const double accuracy = static_cast<double>(tp) / static_cast<double>(gold.size());
    if (f1 != accuracy) {
        throw Error("micro_f1: internal check against accuracy failed");
    }
    return f1;
}

std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const int> predictions, std::span<const int> gold,
                                                       std::size_t n_classes) {
    if (predictions.size() != gold.size()) {
        throw DataError("confusion_matrix: length mismatch");
    }
    std::vector<std::vector<std::size_t>> m(n_classes, std::vector<std::size_t>(n_classes, 0));
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const auto g = static_cast<std::size_t>(gold[i]);
        const auto p = static_cast<std::size_t>(predictions[i]);
        if (gold[i] < 0 || predictions[i] < 0 || g >= n_classes || p >= n_classes) {
            throw DataError("confusion_matrix: label out of range at instance " + std::to_string(i));
        }
        ++m[g][p];
    }
    return m;
}

EvalReport make_report(std::string model, std::span<const int> predictions, std::span<const int> gold,
                       const std::vector<std::string>& class_names, double seconds) {
    EvalReport r;
    r.model = std::move(model);
    r.micro_f1 = micro_f1(predictions, gold);
    const std::size_t k = class_names.size();
    r.confusion = confusion_matrix(predictions, gold, k);
    r.n_instances = gold.size();
    r.label_space_cardinality = k;
    r.wall_clock_seconds = seconds;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t tp = r.confusion[c][c];
        std::size_t pred_total = 0;
        std::size_t gold_total = 0;
        for (std::size_t o = 0; o < k; ++o) {
            pred_total += r.confusion[o][c];
            gold_total += r.confusion[c][o];
        }
        ClassMetrics m;
        m.name = class_names[c];
        m.support = gold_total;
        m.precision = pred_total ? static_cast<double>(tp) / static_cast<double>(pred_total) : 0.0;
        m.recall = gold_total ? static_cast<double>(tp) / static_cast<double>(gold_total) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        r.per_class.push_back(m);
    }
    return r;
}

std::string report_to_json(const EvalReport& report, bool include_timing) {
    nlohmann::ordered_json j;
    j["model"] = report.model;
    j["micro_f1"] = report.micro_f1;
    j["n_instances"] = report.n_instances;
    j["label_space_cardinality"] = report.label_space_cardinality;
    auto classes = nlohmann::ordered_json::array();
    for (const auto& c : report.per_class) {
        classes.push_back({{"class", c.name},
                           {"precision", c.precision},
                           {"recall", c.recall},
                           {"f1", c.f1},
                           {"support", c.support}});
    }
    j["per_class"] = classes;
    j["confusion"] = report.confusion;
    if (include_timing) {
        j["wall_clock_seconds"] = report.wall_clock_seconds;
    }
    return j.dump(2) + "\n";
}

std::string render_table(const std::vector<EvalReport>& reports) {
    const std::string head_model = "Model";
    const std::string head_score = "Micro-F1";
    std::size_t width = head_model.size();
    for (const auto& r : reports) {
        width = std::max(width, r.model.size());
    }
    auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
    std::string out = pad(head_model) + "  " + head_score + "\n";
    out += std::string(width, '-') + "  " + std::string(head_score.size(), '-') + "\n";
    for (const auto& r : reports) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", r.micro_f1);
        out += pad(r.model) + "  " + buf + "\n";
    }
    return out;
}

}  // namespace phenonote
