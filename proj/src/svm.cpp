#include "phenonote/svm.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "phenonote/error.hpp"
#include "phenonote/rng.hpp"

namespace phenonote {

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
    if (type == KernelType::Linear) {
        return dot(a, b);
    }
    return std::exp(-gamma * squared_distance(a, b));
}

double SvmModel::decision(std::span<const double> query) const {
    if (query.size() != support.cols()) {
        throw DataError("SVM: query has " + std::to_string(query.size()) + " dimensions, model has " +
                        std::to_string(support.cols()));
    }
    double f = bias;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (alphas[i] != 0.0) {
            f += alphas[i] * labels[i] * kernel(support.row(i), query);
        }
    }
    return f;
}

SvmModel SvmModel::compact() const {
    SvmModel out;
    out.bias = bias;
    out.c_penalty = c_penalty;
    out.kernel = kernel;
    out.sweeps = sweeps;
    std::vector<double> rows;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (alphas[i] > 0.0) {
            out.alphas.push_back(alphas[i]);
            out.labels.push_back(labels[i]);
            auto r = support.row(i);
            rows.insert(rows.end(), r.begin(), r.end());
        }
    }
    out.support = Matrix(out.alphas.size(), support.cols(), std::move(rows));
    return out;
}

double scale_gamma(const Matrix& train) {
    const auto var = column_variances(train);
    if (var.empty()) {
        return 1.0;
    }
    const double mean_var = std::accumulate(var.begin(), var.end(), 0.0) / static_cast<double>(var.size());
    if (!(mean_var > 0.0)) {
        return 1.0;
    }
    return 1.0 / (static_cast<double>(train.cols()) * mean_var);
}

namespace {

class SmoSolver {
public:
    SmoSolver(const Matrix& x, std::span<const int> y, const SvmConfig& cfg, Kernel kernel)
        : x_(x), y_(y.begin(), y.end()), c_(cfg.c_penalty), tol_(cfg.tol), rng_(cfg.seed), n_(x.rows()),
          k_(n_, n_), alpha_(n_, 0.0), err_(n_, 0.0) {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i; j < n_; ++j) {
                const double v = kernel(x_.row(i), x_.row(j));
                if (!std::isfinite(v)) {
                    throw NumericError("SVM: non-finite kernel value at (" + std::to_string(i) + ", " +
                                       std::to_string(j) + ")");
                }
                k_(i, j) = v;
                k_(j, i) = v;
            }
            err_[i] = -static_cast<double>(y_[i]);
        }
    }

    std::size_t run(int max_passes, std::size_t max_sweeps) {
        int passes = 0;
        std::size_t sweeps = 0;
        while (passes < max_passes && sweeps < max_sweeps) {
            std::size_t changed = 0;
            for (std::size_t i = 0; i < n_; ++i) {
                if (violates(i) && examine(i)) {
                    ++changed;
                }
            }
            ++sweeps;
            passes = changed == 0 ? passes + 1 : 0;
        }
        finalize_bias();
        return sweeps;
    }

    const std::vector<double>& alphas() const { return alpha_; }
    double bias() const { return b_; }

private:
    bool at_lower(std::size_t i) const { return alpha_[i] <= 0.0; }
    bool at_upper(std::size_t i) const { return alpha_[i] >= c_; }

    bool violates(std::size_t i) const {
        const double r = err_[i] * y_[i];
        return (r < -tol_ && !at_upper(i)) || (r > tol_ && !at_lower(i));
    }

    bool examine(std::size_t i) {
        std::vector<std::size_t> free;
        for (std::size_t j = 0; j < n_; ++j) {
            if (!at_lower(j) && !at_upper(j)) {
                free.push_back(j);
            }
        }
        if (!free.empty()) {
            const std::size_t start = rng_.index(free.size());
            for (std::size_t k = 0; k < free.size(); ++k) {
                if (take_step(i, free[(start + k) % free.size()])) {
                    return true;
                }
            }
        }
        const std::size_t start = rng_.index(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            if (take_step(i, (start + k) % n_)) {
                return true;
            }
        }
        return false;
    }

    bool take_step(std::size_t i, std::size_t j) {
        if (i == j) {
            return false;
        }
        const double yi = y_[i];
        const double yj = y_[j];
        const double ai = alpha_[i];
        const double aj = alpha_[j];
        const double ei = err_[i];
        const double ej = err_[j];
        const double s = yi * yj;

        double lo = 0.0;
        double hi = 0.0;
        if (yi != yj) {
            lo = std::max(0.0, aj - ai);
            hi = std::min(c_, c_ + aj - ai);
        } else {
            lo = std::max(0.0, ai + aj - c_);
            hi = std::min(c_, ai + aj);
        }
        if (hi - lo <= 1e-12 * c_) {
            return false;
        }
        const double kii = k_(i, i);
        const double kjj = k_(j, j);
        const double kij = k_(i, j);
        const double eta = kii + kjj - 2.0 * kij;

        double aj_new = 0.0;
        if (eta > 1e-12) {
            aj_new = std::clamp(aj + yj * (ei - ej) / eta, lo, hi);
        } else {
            // Degenerate direction: the objective is linear along the
            // constraint line, so compare its value at both ends.
            const double f1 = yi * (ei - b_) - ai * kii - s * aj * kij;
            const double f2 = yj * (ej - b_) - s * ai * kij - aj * kjj;
            auto objective = [&](double a2) {
                const double a1 = ai + s * (aj - a2);
                return a1 * f1 + a2 * f2 + 0.5 * a1 * a1 * kii + 0.5 * a2 * a2 * kjj + s * a1 * a2 * kij;
            };
            const double lobj = objective(lo);
            const double hobj = objective(hi);
            if (lobj < hobj - 1e-12) {
                aj_new = lo;
            } else if (lobj > hobj + 1e-12) {
                aj_new = hi;
            } else {
                return false;
            }
        }
        if (std::abs(aj_new - aj) < 1e-10 * (aj_new + aj + 1e-10)) {
            return false;
        }
        double ai_new = ai + s * (aj - aj_new);
        if (ai_new < 1e-12 * c_) {
            ai_new = 0.0;
        } else if (ai_new > c_ * (1.0 - 1e-12)) {
            ai_new = c_;
        }

        const double dai = ai_new - ai;
        const double daj = aj_new - aj;
        const double b1 = b_ - ei - yi * dai * kii - yj * daj * kij;
        const double b2 = b_ - ej - yi * dai * kij - yj * daj * kjj;
        double b_new = 0.0;
        if (ai_new > 0.0 && ai_new < c_) {
            b_new = b1;
        } else if (aj_new > 0.0 && aj_new < c_) {
            b_new = b2;
        } else {
            b_new = 0.5 * (b1 + b2);
        }
        const double db = b_new - b_;

        alpha_[i] = ai_new;
        alpha_[j] = aj_new;
        b_ = b_new;
        for (std::size_t k = 0; k < n_; ++k) {
            err_[k] += yi * dai * k_(i, k) + yj * daj * k_(j, k) + db;
        }
        assert(dual_feasible());
        return true;
    }

    [[maybe_unused]] bool dual_feasible() const {
        double sum = 0.0;
        for (std::size_t k = 0; k < n_; ++k) {
            if (alpha_[k] < 0.0 || alpha_[k] > c_) {
                return false;
            }
            sum += alpha_[k] * y_[k];
        }
        return std::abs(sum) <= 1e-8 * std::max(1.0, c_);
    }

    void finalize_bias() {
        std::vector<double> g(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                if (alpha_[j] != 0.0) {
                    acc += alpha_[j] * y_[j] * k_(i, j);
                }
            }
            g[i] = acc;
        }
        double free_sum = 0.0;
        std::size_t free_count = 0;
        double lb = -std::numeric_limits<double>::infinity();
        double ub = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n_; ++i) {
            const double yi = y_[i];
            if (!at_lower(i) && !at_upper(i)) {
                free_sum += yi - g[i];
                ++free_count;
            } else if (at_lower(i)) {
                // y_i (g_i + b) >= 1
                if (yi > 0) {
                    lb = std::max(lb, 1.0 - g[i]);
                } else {
                    ub = std::min(ub, -1.0 - g[i]);
                }
            } else {
                // y_i (g_i + b) <= 1
                if (yi > 0) {
                    ub = std::min(ub, 1.0 - g[i]);
                } else {
                    lb = std::max(lb, -1.0 - g[i]);
                }
            }
        }
        if (free_count > 0) {
            b_ = free_sum / static_cast<double>(free_count);
        } else if (std::isfinite(lb) && std::isfinite(ub)) {
            b_ = 0.5 * (lb + ub);
        } else if (std::isfinite(lb)) {
            b_ = lb;
        } else if (std::isfinite(ub)) {
            b_ = ub;
        }
        for (std::size_t i = 0; i < n_; ++i) {
            err_[i] = g[i] + b_ - y_[i];
        }
    }

    const Matrix& x_;
    std::vector<int> y_;
    double c_;
    double tol_;
    Rng rng_;
    std::size_t n_;
    Matrix k_;
    std::vector<double> alpha_;
    std::vector<double> err_;  // f(x_i) - y_i
    double b_ = 0.0;
};

}  // namespace

SvmModel svm_fit(const Matrix& train, std::span<const int> labels, const SvmConfig& config) {
    if (train.rows() != labels.size()) {
        throw DataError("SVM: " + std::to_string(train.rows()) + " rows but " + std::to_string(labels.size()) +
                        " labels");
    }
    if (!(config.c_penalty > 0.0) || !(config.tol > 0.0) || config.max_passes < 1) {
        throw UsageError("SVM: C, tol and max_passes must be positive");
    }
    if (!train.all_finite()) {
        throw DataError("SVM: training matrix contains non-finite values");
    }
    bool pos = false;
    bool neg = false;
    for (int y : labels) {
        if (y == 1) {
            pos = true;
        } else if (y == -1) {
            neg = true;
        } else {
            throw DataError("SVM: labels must be +1 or -1, got " + std::to_string(y));
        }
    }
    if (!pos || !neg) {
        throw DataError("SVM: training data must contain both classes");
    }

    Kernel kernel;
    kernel.type = config.kernel;
    if (config.kernel == KernelType::Rbf) {
        kernel.gamma = config.gamma.value_or(scale_gamma(train));
        if (!(kernel.gamma > 0.0) || !std::isfinite(kernel.gamma)) {
            throw UsageError("SVM: gamma must be positive and finite");
        }
    }

    SmoSolver solver(train, labels, config, kernel);
    SvmModel model;
    model.sweeps = solver.run(config.max_passes, config.max_sweeps);
    model.alphas = solver.alphas();
    model.bias = solver.bias();
    model.c_penalty = config.c_penalty;
    model.kernel = kernel;
    model.support = train;
    model.labels.assign(labels.begin(), labels.end());
    return model;
}

int svm_predict(const SvmModel& model, std::span<const double> query) {
    return model.decision(query) >= 0.0 ? 1 : 0;
}

std::vector<int> svm_predict(const SvmModel& model, const Matrix& queries) {
    std::vector<int> out(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        out[i] = svm_predict(model, queries.row(i));
    }
    return out;
}

double max_kkt_violation(const SvmModel& model, const Matrix& train, std::span<const int> labels) {
    double worst = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i) {
        const double m = labels[i] * model.decision(train.row(i));
        const double a = model.alphas.size() == train.rows() ? model.alphas[i] : 0.0;
        double v = 0.0;
        if (a <= 0.0) {
            v = std::max(0.0, 1.0 - m);
        } else if (a >= model.c_penalty) {
            v = std::max(0.0, m - 1.0);
        } else {
            v = std::abs(m - 1.0);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

double dual_objective(const SvmModel& model) {
    double linear = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < model.alphas.size(); ++i) {
        linear += model.alphas[i];
        for (std::size_t j = 0; j < model.alphas.size(); ++j) {
            quad += model.alphas[i] * model.alphas[j] * model.labels[i] * model.labels[j] *
                    model.kernel(model.support.row(i), model.support.row(j));
        }
    }
    return linear - 0.5 * quad;
}

KernelType parse_kernel(const std::string& name) {
    if (name == "rbf") {
        return KernelType::Rbf;
    }
    if (name == "linear") {
        return KernelType::Linear;
    }
    throw UsageError("unknown kernel '" + name + "' (expected rbf or linear)");
}

std::string kernel_name(KernelType type) {
    return type == KernelType::Rbf ? "rbf" : "linear";
}

std::string svm_to_json(const SvmModel& model) {
    const SvmModel c = model.compact();
    nlohmann::ordered_json j;
    j["kernel"] = kernel_name(c.kernel.type);
    j["gamma"] = c.kernel.gamma;
    j["c_penalty"] = c.c_penalty;
    j["bias"] = c.bias;
    j["dim"] = model.dim();
    j["alphas"] = c.alphas;
    j["labels"] = c.labels;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < c.support.rows(); ++i) {
        auto r = c.support.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j["support"] = rows;
    return j.dump();
}

SvmModel svm_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        SvmModel m;
        m.kernel.type = parse_kernel(j.at("kernel").get<std::string>());
        m.kernel.gamma = j.at("gamma").get<double>();
        m.c_penalty = j.at("c_penalty").get<double>();
        m.bias = j.at("bias").get<double>();
        m.alphas = j.at("alphas").get<std::vector<double>>();
        m.labels = j.at("labels").get<std::vector<int>>();
        const auto dim = j.at("dim").get<std::size_t>();
        const auto rows = j.at("support").get<std::vector<std::vector<double>>>();
        m.support = rows.empty() ? Matrix(0, dim) : Matrix::from_rows(rows);
        if (m.support.cols() != dim || m.alphas.size() != m.support.rows() || m.labels.size() != m.alphas.size()) {
            throw DataError("SVM model: inconsistent dimensions");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("SVM model: ") + e.what());
    }
}

}  // namespace phenonote
