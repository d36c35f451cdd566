#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "phenonote/matrix.hpp"

namespace phenonote {

inline constexpr std::size_t kDefaultPcaComponents = 7;

/// Principal axes of a training matrix.
///
/// `components` is C x V with orthonormal rows; each row's largest-magnitude
/// entry is positive (first such entry on ties). `explained_variance` holds the
/// matching sample-covariance eigenvalues (divisor rows - 1), non-increasing,
/// with tiny negative round-off clamped to zero.
struct PcaModel {
    std::vector<double> mean;
    Matrix components;
    std::vector<double> explained_variance;

    std::size_t n_components() const { return components.rows(); }
    std::size_t n_features() const { return mean.size(); }
};

enum class PcaSolver {
    Auto,        ///< covariance when cols <= rows, Gram otherwise
    Covariance,  ///< eigendecompose the V x V covariance
    Gram,        ///< eigendecompose the N x N Gram matrix of centered rows
};

PcaModel fit_pca(const Matrix& train, std::size_t n_components = kDefaultPcaComponents,
                 PcaSolver solver = PcaSolver::Auto);

/// (m - mean) * components^T
Matrix transform_pca(const PcaModel& model, const Matrix& m);

std::string pca_to_json(const PcaModel& model, const std::string& config_hash = {});
PcaModel pca_from_json(const std::string& text);

}  // namespace phenonote
