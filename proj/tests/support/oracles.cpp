#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace oracle {

namespace {

using Rows = std::vector<std::vector<double>>;

// Householder reduction of a symmetric matrix to tridiagonal form. On exit
// `a` holds the orthogonal transform, d the diagonal, e the off-diagonal
// (e[0] unused).
void tridiagonalize(Rows& a, std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(a.size());
    for (int i = n - 1; i > 0; --i) {
        const int l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (int k = 0; k <= l; ++k) {
                scale += std::abs(a[i][k]);
            }
            if (scale == 0.0) {
                e[i] = a[i][l];
            } else {
                for (int k = 0; k <= l; ++k) {
                    a[i][k] /= scale;
                    h += a[i][k] * a[i][k];
                }
                double f = a[i][l];
                double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a[i][l] = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    a[j][i] = a[i][j] / h;
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) {
                        g += a[j][k] * a[i][k];
                    }
                    for (int k = j + 1; k <= l; ++k) {
                        g += a[k][j] * a[i][k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i][j];
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a[i][j];
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k) {
                        a[j][k] -= f * e[k] + g * a[i][k];
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const int l = i - 1;
        if (d[i] != 0.0) {
            for (int j = 0; j <= l; ++j) {
                double g = 0.0;
                for (int k = 0; k <= l; ++k) {
                    g += a[i][k] * a[k][j];
                }
                for (int k = 0; k <= l; ++k) {
                    a[k][j] -= g * a[k][i];
                }
            }
        }
        d[i] = a[i][i];
        a[i][i] = 1.0;
        for (int j = 0; j <= l; ++j) {
            a[j][i] = a[i][j] = 0.0;
        }
    }
}

// Implicit-shift QL on the tridiagonal (d, e); z accumulates eigenvectors
// as columns.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, Rows& z) {
    const int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) {
                    break;
                }
            }
            if (m != l) {
                if (iter++ == 60) {
                    throw std::runtime_error("QL iteration did not converge");
                }
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z[k][i + 1];
                        z[k][i + 1] = s * z[k][i] + c * f;
                        z[k][i] = c * z[k][i] - s * f;
                    }
                }
                if (r == 0.0 && i >= l) {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

bool word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

Eigen householder_ql(const Matrix& symmetric) {
    const std::size_t n = symmetric.rows();
    Rows a(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a[i][j] = symmetric(i, j);
        }
    }
    std::vector<double> d(n);
    std::vector<double> e(n);
    tridiagonalize(a, d, e);
    ql_implicit(d, e, a);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] > d[y]; });
    Eigen out;
    for (std::size_t k : order) {
        out.values.push_back(d[k]);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = a[i][k];
        }
        out.vectors.push_back(std::move(v));
    }
    return out;
}

Matrix sample_covariance(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t v = x.cols();
    std::vector<double> mean(v, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < v; ++j) {
            mean[j] += x(i, j);
        }
    }
    for (double& m : mean) {
        m /= static_cast<double>(n);
    }
    Matrix cov(v, v);
    for (std::size_t a = 0; a < v; ++a) {
        for (std::size_t b = 0; b < v; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
            }
            cov(a, b) = s / static_cast<double>(n - 1);
        }
    }
    return cov;
}

Pca pca(const Matrix& x, std::size_t n) {
    Pca out;
    out.mean.assign(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            out.mean[j] += x(i, j) / static_cast<double>(x.rows());
        }
    }
    const auto eig = householder_ql(sample_covariance(x));
    for (std::size_t k = 0; k < n; ++k) {
        auto v = eig.vectors[k];
        std::size_t arg = 0;
        for (std::size_t j = 1; j < v.size(); ++j) {
            if (std::abs(v[j]) > std::abs(v[arg])) {
                arg = j;
            }
        }
        if (v[arg] < 0.0) {
            for (double& t : v) {
                t = -t;
            }
        }
        out.components.push_back(std::move(v));
        out.variances.push_back(std::max(eig.values[k], 0.0));
    }
    return out;
}

Matrix project(const Pca& p, const Matrix& x) {
    Matrix out(x.rows(), p.components.size());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < p.components.size(); ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j) {
                s += (x(i, j) - p.mean[j]) * p.components[k][j];
            }
            out(i, k) = s;
        }
    }
    return out;
}

std::vector<std::uint32_t> scan(const std::string& text, const std::vector<std::string>& terms) {
    // All occurrences first.
    std::map<std::size_t, std::vector<std::uint32_t>> at;  // start -> candidate terms
    for (std::uint32_t t = 0; t < terms.size(); ++t) {
        const auto& term = terms[t];
        if (term.empty()) {
            continue;
        }
        for (std::size_t p = text.find(term); p != std::string::npos; p = text.find(term, p + 1)) {
            const bool left = p == 0 || !word_byte(static_cast<unsigned char>(text[p - 1]));
            const std::size_t end = p + term.size();
            const bool right = end == text.size() || !word_byte(static_cast<unsigned char>(text[end]));
            if (left && right) {
                at[p].push_back(t);
            }
        }
    }
    // Leftmost-longest arbitration.
    std::set<std::uint32_t> found;
    std::size_t resume = 0;
    for (const auto& [start, cands] : at) {
        if (start < resume) {
            continue;
        }
        std::uint32_t best = cands.front();
        for (auto c : cands) {
            if (terms[c].size() > terms[best].size()) {
                best = c;
            }
        }
        found.insert(best);
        resume = start + terms[best].size();
    }
    return {found.begin(), found.end()};
}

std::unordered_map<std::string, std::size_t> doc_freq(const phenonote::LabeledCorpus& corpus,
                                                      const std::vector<std::string>& terms) {
    std::unordered_map<std::string, std::size_t> out;
    for (const auto& note : corpus.notes) {
        for (auto t : scan(note.text, terms)) {
            ++out[terms[t]];
        }
    }
    return out;
}

int knn(const Matrix& points, std::span<const int> labels, std::span<const double> query, std::size_t k,
        std::size_t n_classes) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) {
            const double t = points(i, j) - query[j];
            d += t * t;
        }
        all.emplace_back(d, i);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> votes(n_classes, 0);
    std::vector<std::size_t> totals(n_classes, 0);
    for (int l : labels) {
        ++totals[static_cast<std::size_t>(l)];
    }
    for (std::size_t i = 0; i < k; ++i) {
        ++votes[static_cast<std::size_t>(labels[all[i].second])];
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < n_classes; ++c) {
        if (votes[c] > votes[best] || (votes[c] == votes[best] && totals[c] > totals[best])) {
            best = c;
        }
    }
    return static_cast<int>(best);
}

double kernel(const phenonote::Kernel& k, std::span<const double> a, std::span<const double> b) {
    if (k.type == phenonote::KernelType::Linear) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            s += a[i] * b[i];
        }
        return s;
    }
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::exp(-k.gamma * d);
}

double dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alpha,
                      const phenonote::Kernel& k) {
    double lin = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        lin += alpha[i];
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel(k, x.row(i), x.row(j));
        }
    }
    return lin - 0.5 * quad;
}

GridResult grid_dual(const Matrix& x, std::span<const int> y, double c, const phenonote::Kernel& k,
                     int points_per_axis, int zoom_rounds) {
    const std::size_t n = x.rows();
    const std::size_t free_n = n - 1;
    std::vector<double> lo(free_n, 0.0);
    std::vector<double> hi(free_n, c);
    GridResult best;
    best.objective = -std::numeric_limits<double>::infinity();
    for (int round = 0; round <= zoom_rounds; ++round) {
        std::vector<int> idx(free_n, 0);
        for (;;) {
            std::vector<double> alpha(n, 0.0);
            double s = 0.0;
            for (std::size_t i = 0; i < free_n; ++i) {
                alpha[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (points_per_axis - 1);
                s += alpha[i] * y[i];
            }
            alpha[n - 1] = -s * y[n - 1];
            if (alpha[n - 1] >= 0.0 && alpha[n - 1] <= c) {
                const double obj = dual_objective(x, y, alpha, k);
                if (obj > best.objective) {
                    best.objective = obj;
                    best.alpha = alpha;
                }
            }
            std::size_t d = 0;
            while (d < free_n && ++idx[d] == points_per_axis) {
                idx[d] = 0;
                ++d;
            }
            if (d == free_n) {
                break;
            }
        }
        // Zoom: a window of four grid steps around the incumbent.
        for (std::size_t i = 0; i < free_n; ++i) {
            const double step = (hi[i] - lo[i]) / (points_per_axis - 1);
            lo[i] = std::max(0.0, best.alpha[i] - 2.0 * step);
            hi[i] = std::min(c, best.alpha[i] + 2.0 * step);
        }
    }
    return best;
}

double kkt_violation(const Matrix& x, std::span<const int> y, std::span<const double> alpha, double bias, double c,
                     const phenonote::Kernel& k) {
    double worst = 0.0;
    const double eps = 1e-8 * c;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double f = bias;
        for (std::size_t j = 0; j < x.rows(); ++j) {
            f += alpha[j] * y[j] * kernel(k, x.row(j), x.row(i));
        }
        const double m = y[i] * f;
        double v = 0.0;
        if (alpha[i] <= eps) {
            v = std::max(0.0, 1.0 - m);
        } else if (alpha[i] >= c - eps) {
            v = std::max(0.0, m - 1.0);
        } else {
            v = std::abs(m - 1.0);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

double loss(const phenonote::NeuralNet& net, const phenonote::Example& ex, double weight) {
    const auto p = net.forward(ex.input, ex.steps);
    return -weight * std::log(p[static_cast<std::size_t>(ex.label)]);
}

phenonote::Gradients numeric_gradient(phenonote::NeuralNet net, const phenonote::Example& ex, double weight,
                                      double eps) {
    phenonote::Gradients g;
    for (auto& tensor : net.parameters()) {
        std::vector<double> gt(tensor.values.size());
        for (std::size_t i = 0; i < tensor.values.size(); ++i) {
            const double keep = tensor.values[i];
            tensor.values[i] = keep + eps;
            const double up = loss(net, ex, weight);
            tensor.values[i] = keep - eps;
            const double down = loss(net, ex, weight);
            tensor.values[i] = keep;
            gt[i] = (up - down) / (2.0 * eps);
        }
        g.push_back(std::move(gt));
    }
    return g;
}

double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric, double floor) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
    return worst;
}

double pooled_f1(std::span<const int> pred, std::span<const int> gold, std::size_t n_classes) {
    std::vector<double> tp(n_classes, 0.0);
    std::vector<double> fp(n_classes, 0.0);
    std::vector<double> fn(n_classes, 0.0);
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const auto g = static_cast<std::size_t>(gold[i]);
        const auto p = static_cast<std::size_t>(pred[i]);
        if (g == p) {
            tp[g] += 1.0;
        } else {
            fp[p] += 1.0;
            fn[g] += 1.0;
        }
    }
    const double TP = std::accumulate(tp.begin(), tp.end(), 0.0);
    const double FP = std::accumulate(fp.begin(), fp.end(), 0.0);
    const double FN = std::accumulate(fn.begin(), fn.end(), 0.0);
    return 2.0 * TP / (2.0 * TP + FP + FN);
}

}  // namespace oracle
