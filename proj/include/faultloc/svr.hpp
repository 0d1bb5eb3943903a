#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "faultloc/neuralnet.hpp"  // detail::uniform01

namespace faultloc {

/// RBF epsilon-SVR in its sparse form: prediction = sum coef_i * K(sv_i, x) + bias.
struct SvrModel {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coefficients;  // alpha_i - alpha_i^*
    double bias = 0.0;
    double gamma = 1.0;
    double c = 10.0;
    double epsilon = 0.01;
};

inline double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::exp(-gamma * s);
}

inline double predict(const SvrModel& model, const std::vector<double>& x) {
    if (!model.support_vectors.empty() && model.support_vectors[0].size() != x.size())
        throw std::invalid_argument("svr predict: dimension mismatch");
    double s = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
        s += model.coefficients[i] * rbf_kernel(model.support_vectors[i], x, model.gamma);
    return s;
}

namespace detail {

/// SMO on the paired dual (2m box variables, one equality constraint),
/// maximal-violating-pair working set selection. Deterministic: ties break
/// on the lowest index.
struct SmoResult {
    std::vector<double> beta;  // alpha - alpha^* per data point
    double bias = 0.0;
    int iterations = 0;
};

inline SmoResult solve_svr_dual(const std::vector<std::vector<double>>& x,
                                const std::vector<double>& t, double c, double epsilon,
                                double gamma, double kkt_tol, int max_iter) {
    const std::size_t m = x.size();
    const std::size_t n = 2 * m;

    std::vector<double> kernel(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            const double k = rbf_kernel(x[i], x[j], gamma);
            kernel[i * m + j] = k;
            kernel[j * m + i] = k;
        }

    auto label = [&](std::size_t i) { return i < m ? 1.0 : -1.0; };
    auto q = [&](std::size_t i, std::size_t j) {
        return label(i) * label(j) * kernel[(i % m) * m + (j % m)];
    };

    std::vector<double> a(n, 0.0);
    std::vector<double> grad(n);
    for (std::size_t i = 0; i < n; ++i)
        grad[i] = i < m ? epsilon - t[i] : epsilon + t[i - m];

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        // working set: i maximizes -y*G over I_up, j minimizes it over I_low
        double best_up = -std::numeric_limits<double>::infinity();
        double best_low = std::numeric_limits<double>::infinity();
        std::size_t sel_i = n, sel_j = n;
        for (std::size_t k = 0; k < n; ++k) {
            const double y = label(k);
            const double v = -y * grad[k];
            const bool in_up = (y > 0.0 && a[k] < c) || (y < 0.0 && a[k] > 0.0);
            const bool in_low = (y > 0.0 && a[k] > 0.0) || (y < 0.0 && a[k] < c);
            if (in_up && v > best_up) {
                best_up = v;
                sel_i = k;
            }
            if (in_low && v < best_low) {
                best_low = v;
                sel_j = k;
            }
        }
        if (sel_i == n || sel_j == n || best_up - best_low < kkt_tol) break;

        const std::size_t i = sel_i, j = sel_j;
        const double yi = label(i), yj = label(j);
        const double old_ai = a[i], old_aj = a[j];

        if (yi != yj) {
            double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if (quad <= 0.0) quad = 1e-12;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0 && a[j] < 0.0) {
                a[j] = 0.0;
                a[i] = diff;
            } else if (diff <= 0.0 && a[i] < 0.0) {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if (diff > 0.0 && a[i] > c) {
                a[i] = c;
                a[j] = c - diff;
            } else if (diff <= 0.0 && a[j] > c) {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if (quad <= 0.0) quad = 1e-12;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > c) {
                if (a[i] > c) {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if (a[j] < 0.0) {
                a[j] = 0.0;
                a[i] = sum;
            }
            if (sum > c) {
                if (a[j] > c) {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if (a[i] < 0.0) {
                a[i] = 0.0;
                a[j] = sum;
            }
        }

        const double da_i = a[i] - old_ai;
        const double da_j = a[j] - old_aj;
        if (da_i == 0.0 && da_j == 0.0) break;  // numerically stuck at the boundary
        for (std::size_t k = 0; k < n; ++k) grad[k] += q(k, i) * da_i + q(k, j) * da_j;
    }
    if (iter >= max_iter)
        throw std::runtime_error("svr: smo did not converge within " + std::to_string(max_iter) +
                                 " iterations");

    // bias from the KKT conditions (free variables, else bound midpoint)
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int nr_free = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double y = label(k);
        const double yg = y * grad[k];
        if (a[k] >= c) {
            if (y < 0.0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (a[k] <= 0.0) {
            if (y > 0.0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            ++nr_free;
            sum_free += yg;
        }
    }
    const double rho = nr_free > 0 ? sum_free / nr_free : (ub + lb) / 2.0;

    SmoResult res;
    res.beta.resize(m);
    for (std::size_t i = 0; i < m; ++i) res.beta[i] = a[i] - a[i + m];
    res.bias = -rho;
    res.iterations = iter;
    return res;
}

}  // namespace detail

/// epsilon-SVR trained by sequential minimal optimization to a 1e-6 KKT gap.
/// The seed is carried for interface symmetry; the solver itself is
/// deterministic.
inline SvrModel train_svr(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                          double c, double epsilon, double gamma, std::uint64_t seed = 0) {
    (void)seed;
    if (x.empty() || x.size() != y.size()) throw std::invalid_argument("svr: batch shape mismatch");
    if (!(c > 0.0) || !(epsilon >= 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("svr: bad hyperparameters");

    const auto res = detail::solve_svr_dual(x, y, c, epsilon, gamma, 1e-6, 200000);

    SvrModel model;
    model.gamma = gamma;
    model.c = c;
    model.epsilon = epsilon;
    model.bias = res.bias;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (res.beta[i] != 0.0) {
            model.support_vectors.push_back(x[i]);
            model.coefficients.push_back(res.beta[i]);
        }
    }
    return model;
}

struct SvrGridResult {
    SvrModel model;       // retrained on the full training set
    double best_c = 0.0;
    double best_epsilon = 0.0;
    double best_gamma = 0.0;
    double cv_mse = 0.0;
};

/// 3x3x3 grid over C, epsilon and gamma scaled by 1/feature_dim, scored by
/// 5-fold cross-validation (seeded shuffle for fold assignment).
inline SvrGridResult grid_search_svr(const std::vector<std::vector<double>>& x,
                                     const std::vector<double>& y, std::uint64_t seed,
                                     int folds = 5) {
    if (x.size() < static_cast<std::size_t>(folds))
        throw std::invalid_argument("svr grid: fewer samples than folds");
    const double dim = static_cast<double>(x[0].size());
    const double c_grid[] = {1.0, 10.0, 100.0};
    const double eps_grid[] = {0.005, 0.01, 0.05};
    const double gamma_grid[] = {0.5 / dim, 1.0 / dim, 2.0 / dim};

    // pinned Fisher-Yates so fold assignment is platform independent
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i-- > 1;) {
        const std::size_t j = static_cast<std::size_t>(detail::uniform01(rng) * static_cast<double>(i + 1));
        std::swap(order[i], order[std::min(j, i)]);
    }
    std::vector<int> fold_of(x.size());
    for (std::size_t k = 0; k < order.size(); ++k) fold_of[order[k]] = static_cast<int>(k % folds);

    SvrGridResult best;
    best.cv_mse = std::numeric_limits<double>::infinity();
    for (double c : c_grid)
        for (double eps : eps_grid)
            for (double gamma : gamma_grid) {
                double sq_sum = 0.0;
                std::size_t count = 0;
                for (int f = 0; f < folds; ++f) {
                    std::vector<std::vector<double>> xt;
                    std::vector<double> yt;
                    for (std::size_t i = 0; i < x.size(); ++i)
                        if (fold_of[i] != f) {
                            xt.push_back(x[i]);
                            yt.push_back(y[i]);
                        }
                    const auto model = train_svr(xt, yt, c, eps, gamma, seed);
                    for (std::size_t i = 0; i < x.size(); ++i)
                        if (fold_of[i] == f) {
                            const double r = predict(model, x[i]) - y[i];
                            sq_sum += r * r;
                            ++count;
                        }
                }
                const double cv = sq_sum / static_cast<double>(count);
                if (cv < best.cv_mse) {
                    best.cv_mse = cv;
                    best.best_c = c;
                    best.best_epsilon = eps;
                    best.best_gamma = gamma;
                }
            }
    best.model = train_svr(x, y, best.best_c, best.best_epsilon, best.best_gamma, seed);
    return best;
}

}  // namespace faultloc
