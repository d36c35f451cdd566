#include "phenonote/pca.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "phenonote/error.hpp"

namespace phenonote {

namespace {

Matrix centered(const Matrix& m, const std::vector<double>& mean) {
    Matrix c = m;
    for (std::size_t r = 0; r < c.rows(); ++r) {
        auto row = c.row(r);
        for (std::size_t j = 0; j < c.cols(); ++j) {
            row[j] -= mean[j];
        }
    }
    return c;
}

void apply_sign_convention(std::span<double> axis) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < axis.size(); ++j) {
        if (std::abs(axis[j]) > std::abs(axis[arg])) {
            arg = j;
        }
    }
    if (axis[arg] < 0.0) {
        for (double& v : axis) {
            v = -v;
        }
    }
}

}  // namespace

PcaModel fit_pca(const Matrix& train, std::size_t n_components, PcaSolver solver) {
    const std::size_t n = train.rows();
    const std::size_t v = train.cols();
    if (n < 2) {
        throw DataError("PCA needs at least 2 rows, got " + std::to_string(n));
    }
    if (n_components == 0 || n_components > std::min(n - 1, v)) {
        throw DataError("n_components = " + std::to_string(n_components) + " must be in [1, " +
                        std::to_string(std::min(n - 1, v)) + "] for a " + std::to_string(n) + "x" +
                        std::to_string(v) + " matrix");
    }
    if (!train.all_finite()) {
        throw DataError("PCA input contains non-finite values");
    }

    PcaModel model;
    model.mean = column_means(train);
    const Matrix xc = centered(train, model.mean);

    double total_ss = 0.0;
    for (double x : xc.data()) {
        total_ss += x * x;
    }
    if (total_ss == 0.0) {
        throw DataError("PCA input has zero variance");
    }

    const double denom = static_cast<double>(n - 1);
    if (solver == PcaSolver::Auto) {
        solver = v <= n ? PcaSolver::Covariance : PcaSolver::Gram;
    }

    model.components = Matrix(n_components, v);
    model.explained_variance.resize(n_components);

    if (solver == PcaSolver::Covariance) {
        const Matrix xt = xc.transpose();
        Matrix cov = multiply_transposed(xt, xt);
        for (double& x : cov.data()) {
            x /= denom;
        }
        const auto eig = jacobi_eigen(cov);
        for (std::size_t k = 0; k < n_components; ++k) {
            for (std::size_t j = 0; j < v; ++j) {
                model.components(k, j) = eig.vectors(j, k);
            }
            model.explained_variance[k] = eig.values[k];
        }
    } else {
        // Xc Xc^T u = s u  =>  Xc^T u / sqrt(s) is a unit eigenvector of Xc^T Xc.
        const Matrix gram = multiply_transposed(xc, xc);
        const auto eig = jacobi_eigen(gram);
        for (std::size_t k = 0; k < n_components; ++k) {
            const double s = eig.values[k];
            if (s <= 0.0) {
                throw NumericError("PCA: component " + std::to_string(k + 1) +
                                   " has no variance; lower n_components");
            }
            const double inv = 1.0 / std::sqrt(s);
            for (std::size_t j = 0; j < v; ++j) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += xc(i, j) * eig.vectors(i, k);
                }
                model.components(k, j) = acc * inv;
            }
            model.explained_variance[k] = s / denom;
        }
    }

    for (std::size_t k = 0; k < n_components; ++k) {
        apply_sign_convention(model.components.row(k));
        if (model.explained_variance[k] < 0.0) {
            model.explained_variance[k] = 0.0;
        }
    }
    return model;
}

Matrix transform_pca(const PcaModel& model, const Matrix& m) {
    if (m.cols() != model.n_features()) {
        throw DataError("PCA transform: input has " + std::to_string(m.cols()) + " columns, model expects " +
                        std::to_string(model.n_features()));
    }
    return multiply_transposed(centered(m, model.mean), model.components);
}

std::string pca_to_json(const PcaModel& model, const std::string& config_hash) {
    nlohmann::ordered_json j;
    j["type"] = "pca";
    if (!config_hash.empty()) {
        j["config_hash"] = config_hash;
    }
    j["mean"] = model.mean;
    auto comps = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < model.n_components(); ++k) {
        auto row = model.components.row(k);
        comps.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["components"] = comps;
    j["explained_variance"] = model.explained_variance;
    return j.dump(1) + "\n";
}

PcaModel pca_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        PcaModel m;
        m.mean = j.at("mean").get<std::vector<double>>();
        const auto rows = j.at("components").get<std::vector<std::vector<double>>>();
        m.components = Matrix::from_rows(rows);
        m.explained_variance = j.at("explained_variance").get<std::vector<double>>();
        if (m.components.cols() != m.mean.size() || m.explained_variance.size() != m.components.rows()) {
            throw DataError("PCA model: inconsistent dimensions");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("PCA model: ") + e.what());
    }
}

}  // namespace phenonote
