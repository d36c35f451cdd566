#include "phenonote/knn.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"
#include "phenonote/error.hpp"

namespace phenonote {

KnnModel::KnnModel(std::size_t k, Matrix points, std::vector<int> labels, std::size_t n_classes)
    : k_(k), points_(std::move(points)), labels_(std::move(labels)) {
    if (points_.rows() != labels_.size()) {
        throw DataError("KNN: " + std::to_string(points_.rows()) + " points but " + std::to_string(labels_.size()) +
                        " labels");
    }
    if (k_ < 1 || k_ > points_.rows()) {
        throw DataError("KNN: k = " + std::to_string(k_) + " must be in [1, " + std::to_string(points_.rows()) + "]");
    }
    if (!points_.all_finite()) {
        throw DataError("KNN: training points contain non-finite values");
    }
    int max_label = -1;
    for (int l : labels_) {
        if (l < 0) {
            throw DataError("KNN: negative class label");
        }
        max_label = std::max(max_label, l);
    }
    if (n_classes == 0) {
        n_classes = static_cast<std::size_t>(max_label + 1);
    }
    if (static_cast<std::size_t>(max_label) >= n_classes) {
        throw DataError("KNN: label " + std::to_string(max_label) + " out of range for " +
                        std::to_string(n_classes) + " classes");
    }
    class_totals_.assign(n_classes, 0);
    for (int l : labels_) {
        ++class_totals_[static_cast<std::size_t>(l)];
    }
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> query) const {
    if (query.size() != points_.cols()) {
        throw DataError("KNN: query has " + std::to_string(query.size()) + " dimensions, model has " +
                        std::to_string(points_.cols()));
    }
    std::vector<std::pair<double, std::size_t>> dist(points_.rows());
    for (std::size_t i = 0; i < points_.rows(); ++i) {
        dist[i] = {squared_distance(points_.row(i), query), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
    std::vector<std::size_t> out(k_);
    for (std::size_t i = 0; i < k_; ++i) {
        out[i] = dist[i].second;
    }
    return out;
}

int KnnModel::predict(std::span<const double> query) const {
    std::vector<std::size_t> votes(class_totals_.size(), 0);
    for (auto idx : neighbors(query)) {
        ++votes[static_cast<std::size_t>(labels_[idx])];
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c) {
        if (votes[c] > votes[best] || (votes[c] == votes[best] && class_totals_[c] > class_totals_[best])) {
            best = c;
        }
    }
    return static_cast<int>(best);
}

std::vector<int> KnnModel::predict(const Matrix& queries) const {
    std::vector<int> out(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        out[i] = predict(queries.row(i));
    }
    return out;
}

std::string knn_to_json(const KnnModel& model) {
    nlohmann::ordered_json j;
    j["k"] = model.k();
    j["n_classes"] = model.n_classes();
    j["dim"] = model.dim();
    auto pts = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < model.points().rows(); ++i) {
        auto r = model.points().row(i);
        pts.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j["points"] = pts;
    j["labels"] = model.labels();
    return j.dump();
}

KnnModel knn_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        auto rows = j.at("points").get<std::vector<std::vector<double>>>();
        return KnnModel(j.at("k").get<std::size_t>(), Matrix::from_rows(rows), j.at("labels").get<std::vector<int>>(),
                        j.at("n_classes").get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("KNN model: ") + e.what());
    }
}

}  // namespace phenonote
