#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace phenonote {

/// Micro-averaged F1: TP / (TP + (FP + FN) / 2), pooled over classes. For
/// single-label data this is accuracy; the implementation checks that.
/// Throws DataError on empty input or a length mismatch.
double micro_f1(std::span<const int> predictions, std::span<const int> gold);

struct ClassMetrics {
    std::string name;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;  ///< gold count
};

struct EvalReport {
    std::string model;
    double micro_f1 = 0.0;
    std::vector<ClassMetrics> per_class;
    std::vector<std::vector<std::size_t>> confusion;  ///< [gold][predicted]
    std::size_t n_instances = 0;
    std::size_t label_space_cardinality = 0;
    double wall_clock_seconds = 0.0;  ///< prediction time; not serialized by default
};

/// Confusion counts indexed [gold][predicted]; labels must lie in
/// [0, n_classes).
std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const int> predictions, std::span<const int> gold,
                                                       std::size_t n_classes);

EvalReport make_report(std::string model, std::span<const int> predictions, std::span<const int> gold,
                       const std::vector<std::string>& class_names, double seconds = 0.0);

/// Deterministic JSON. Timing is only written when `include_timing` is set,
/// so that reports of identical runs are byte-identical.
std::string report_to_json(const EvalReport& report, bool include_timing = false);

/// Aligned two-column table (model, micro-F1), one row per report.
std::string render_table(const std::vector<EvalReport>& reports);

}  // namespace phenonote
