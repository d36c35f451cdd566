#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "phenonote/matrix.hpp"

namespace phenonote {

inline constexpr std::size_t kDefaultKnnK = 27;

/// Exact brute-force k-nearest-neighbour classifier (Euclidean distance).
///
/// Distance ties go to the lower training index. Vote ties go to the class
/// with more training points, then to the lower class index.
class KnnModel {
public:
    /// Throws DataError unless 1 <= k <= points.rows() and every label is
    /// below n_classes. n_classes = 0 means max(label) + 1.
    KnnModel(std::size_t k, Matrix points, std::vector<int> labels, std::size_t n_classes = 0);

    int predict(std::span<const double> query) const;
    std::vector<int> predict(const Matrix& queries) const;

    /// Indices of the k nearest training points, nearest first.
    std::vector<std::size_t> neighbors(std::span<const double> query) const;

    std::size_t k() const { return k_; }
    std::size_t n_classes() const { return class_totals_.size(); }
    std::size_t dim() const { return points_.cols(); }
    const Matrix& points() const { return points_; }
    const std::vector<int>& labels() const { return labels_; }

private:
    std::size_t k_;
    Matrix points_;
    std::vector<int> labels_;
    std::vector<std::size_t> class_totals_;
};

std::string knn_to_json(const KnnModel& model);
KnnModel knn_from_json(const std::string& text);

}  // namespace phenonote
