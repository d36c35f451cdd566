#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phenonote/matrix.hpp"

namespace phenonote {

enum class KernelType { Rbf, Linear };

struct Kernel {
    KernelType type = KernelType::Rbf;
    double gamma = 1.0;  ///< RBF only

    double operator()(std::span<const double> a, std::span<const double> b) const;
};

/// Training options. The defaults are the usual library defaults: RBF kernel,
/// C = 1, gamma = 1 / (n_features * mean feature variance).
struct SvmConfig {
    double c_penalty = 1.0;
    KernelType kernel = KernelType::Rbf;
    std::optional<double> gamma;  ///< nullopt = "scale"
    double tol = 1e-3;
    int max_passes = 100;  ///< consecutive sweeps without any update before stopping
    std::size_t max_sweeps = 100000;
    std::uint64_t seed = 0;
};

/// Binary soft-margin kernel SVM. Labels are +1 / -1. Class index 1 is the
/// positive class, class index 0 the negative one.
struct SvmModel {
    std::vector<double> alphas;
    double bias = 0.0;
    double c_penalty = 1.0;
    Kernel kernel;
    Matrix support;        ///< retained training rows, aligned with alphas
    std::vector<int> labels;  ///< +1 / -1, aligned with alphas
    std::size_t sweeps = 0;   ///< SMO sweeps performed

    std::size_t dim() const { return support.cols(); }

    /// sum_i alpha_i y_i K(x_i, q) + bias
    double decision(std::span<const double> query) const;

    /// Drop rows whose alpha is exactly zero.
    SvmModel compact() const;
};

/// gamma = 1 / (n_features * mean of population column variances); 1.0 when
/// the data has no variance.
double scale_gamma(const Matrix& train);

/// Sequential minimal optimization on the dual.
///
/// Each sweep visits every example; a KKT violator (tolerance `tol`) is paired
/// with a second index drawn first from the non-bound set, then from all
/// examples, each scanned from a seeded random offset, until one analytic
/// pair step succeeds. Training stops after `max_passes` consecutive sweeps
/// without an update. The bias is then re-derived from the free support
/// vectors (or the midpoint of the feasible interval when there are none).
SvmModel svm_fit(const Matrix& train, std::span<const int> labels, const SvmConfig& config = {});

/// Class index: 1 when the decision value is >= 0, else 0.
int svm_predict(const SvmModel& model, std::span<const double> query);
std::vector<int> svm_predict(const SvmModel& model, const Matrix& queries);

/// Largest KKT violation over the training set, measured on y_i f(x_i):
/// alpha = 0 needs >= 1, alpha = C needs <= 1, otherwise == 1.
double max_kkt_violation(const SvmModel& model, const Matrix& train, std::span<const int> labels);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(const SvmModel& model);

std::string svm_to_json(const SvmModel& model);
SvmModel svm_from_json(const std::string& text);

KernelType parse_kernel(const std::string& name);
std::string kernel_name(KernelType type);

}  // namespace phenonote
