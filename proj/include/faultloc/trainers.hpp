#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "faultloc/linalg.hpp"
#include "faultloc/neuralnet.hpp"

namespace faultloc {

enum class Algorithm { LM, CGB, SCG, OSS, GDX };

inline std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::LM: return "lm";
        case Algorithm::CGB: return "cgb";
        case Algorithm::SCG: return "scg";
        case Algorithm::OSS: return "oss";
        case Algorithm::GDX: return "gdx";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "lm") return Algorithm::LM;
    if (s == "cgb") return Algorithm::CGB;
    if (s == "scg") return Algorithm::SCG;
    if (s == "oss") return Algorithm::OSS;
    if (s == "gdx") return Algorithm::GDX;
    throw std::invalid_argument("unknown trainer '" + s + "'");
}

struct TrainConfig {
    Algorithm algorithm = Algorithm::LM;
    int max_epochs = 1000;
    double learning_rate = 0.9;  // GDX only; LM and the CG family ignore it
    double goal_mse = 1e-5;
    std::uint64_t seed = 1;
    double lm_mu0 = 1e-3;
    double lm_mu_inc = 10.0;
    double lm_mu_dec = 0.1;
    double lm_mu_max = 1e10;
    std::size_t lm_max_params = 10000;  // dense damped-least-squares bound
    double gradient_floor = 1e-12;      // inf-norm stop on the SSE/2 gradient
};

enum class StopReason { GoalReached, MaxEpochs, GradientFloor, MuOverflow, SearchStalled };

inline std::string stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::GoalReached: return "goal_reached";
        case StopReason::MaxEpochs: return "max_epochs";
        case StopReason::GradientFloor: return "gradient_floor";
        case StopReason::MuOverflow: return "mu_overflow";
        case StopReason::SearchStalled: return "search_stalled";
    }
    return "?";
}

struct TrainLog {
    std::vector<double> epoch_mse;
    StopReason stop = StopReason::MaxEpochs;
    double final_mse = 0.0;
};

namespace detail {

struct Batch {
    const std::vector<std::vector<double>>& inputs;
    const std::vector<double>& targets;
    std::size_t m() const { return inputs.size(); }
};

inline std::vector<double> residuals(const CascadeNet& net, const Batch& b) {
    auto r = predict_batch(net, b.inputs);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b.targets[i];
    return r;
}

inline double mse_of(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s / static_cast<double>(r.size());
}

inline double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Damped Gauss-Newton step solving (J^T J + mu I) d = -J^T r. Uses the
/// m-space identity d = -J^T (J J^T + mu I)^-1 r when the batch is smaller
/// than the parameter count, which is exact and keeps memory at O(m^2 + mp).
inline std::optional<std::vector<double>> lm_step(const std::vector<double>& jac,
                                                  const std::vector<double>& r, std::size_t m,
                                                  std::size_t p, double mu) {
    if (p <= m) {
        std::vector<double> a(p * p, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double* row = jac.data() + i * p;
            for (std::size_t j = 0; j < p; ++j)
                for (std::size_t k = j; k < p; ++k) a[j * p + k] += row[j] * row[k];
        }
        for (std::size_t j = 0; j < p; ++j) {
            for (std::size_t k = 0; k < j; ++k) a[j * p + k] = a[k * p + j];
            a[j * p + j] += mu;
        }
        std::vector<double> rhs(p, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double* row = jac.data() + i * p;
            for (std::size_t j = 0; j < p; ++j) rhs[j] -= r[i] * row[j];
        }
        return linalg::cholesky_solve(std::move(a), std::move(rhs), p);
    }
    std::vector<double> a(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* ri = jac.data() + i * p;
        for (std::size_t j = i; j < m; ++j) {
            const double* rj = jac.data() + j * p;
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) s += ri[k] * rj[k];
            a[i * m + j] = s;
            a[j * m + i] = s;
        }
    }
    for (std::size_t i = 0; i < m; ++i) a[i * m + i] += mu;
    auto q = linalg::cholesky_solve(std::move(a), r, m);
    if (!q) return std::nullopt;
    std::vector<double> d(p, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = jac.data() + i * p;
        const double qi = (*q)[i];
        for (std::size_t k = 0; k < p; ++k) d[k] -= qi * row[k];
    }
    return d;
}

inline TrainLog train_lm(CascadeNet& net, const Batch& batch, const TrainConfig& cfg) {
    if (net.parameter_count() > cfg.lm_max_params)
        throw std::runtime_error("lm: " + std::to_string(net.parameter_count()) +
                                 " parameters exceed the dense-solver bound of " +
                                 std::to_string(cfg.lm_max_params) +
                                 "; use cgb/scg or a smaller feature mode");
    TrainLog log;
    const std::size_t m = batch.m();
    const std::size_t p = net.parameter_count();

    auto r = residuals(net, batch);
    double cur_mse = mse_of(r);
    if (!std::isfinite(cur_mse)) throw std::runtime_error("lm: non-finite loss at start");
    double mu = cfg.lm_mu0;
    auto params = get_parameters(net);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const auto jac = jacobian(net, batch.inputs);
        std::vector<double> grad(p, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double* row = jac.data() + i * p;
            for (std::size_t k = 0; k < p; ++k) grad[k] += r[i] * row[k];
        }
        if (inf_norm(grad) < cfg.gradient_floor) {
            log.stop = StopReason::GradientFloor;
            break;
        }

        bool accepted = false;
        bool any_solved = false;
        while (mu <= cfg.lm_mu_max) {
            auto step = lm_step(jac, r, m, p, mu);
            if (!step) {
                mu *= cfg.lm_mu_inc;
                continue;
            }
            any_solved = true;
            auto trial = params;
            linalg::axpy(1.0, *step, trial);
            set_parameters(net, trial);
            const auto r_trial = residuals(net, batch);
            const double trial_mse = mse_of(r_trial);
            if (std::isfinite(trial_mse) && trial_mse < cur_mse) {
                params = std::move(trial);
                r = r_trial;
                cur_mse = trial_mse;
                mu = std::max(mu * cfg.lm_mu_dec, 1e-20);
                accepted = true;
                break;
            }
            mu *= cfg.lm_mu_inc;
        }
        if (!accepted) {
            set_parameters(net, params);
            if (!any_solved) throw std::runtime_error("lm: normal equations unsolvable at mu bound");
            log.stop = StopReason::MuOverflow;
            break;
        }
        log.epoch_mse.push_back(cur_mse);
        if (cur_mse <= cfg.goal_mse) {
            log.stop = StopReason::GoalReached;
            break;
        }
    }
    set_parameters(net, params);
    log.final_mse = cur_mse;
    return log;
}

struct LineSearchResult {
    bool ok = false;
    double alpha = 0.0;
    double value = 0.0;
};

/// Backtracking Armijo search with greedy doubling once a decrease is found.
inline LineSearchResult line_search(const std::function<double(double)>& value_at, double f0,
                                    double slope, double alpha_init) {
    constexpr double kArmijo = 1e-4;
    LineSearchResult res;
    double alpha = alpha_init;
    for (int iter = 0; iter < 40; ++iter) {
        const double f = value_at(alpha);
        if (std::isfinite(f) && f <= f0 + kArmijo * alpha * slope) {
            res = {true, alpha, f};
            break;
        }
        alpha *= 0.5;
    }
    if (!res.ok) return res;
    for (int iter = 0; iter < 20; ++iter) {
        const double alpha2 = res.alpha * 2.0;
        const double f2 = value_at(alpha2);
        if (std::isfinite(f2) && f2 < res.value) {
            res.alpha = alpha2;
            res.value = f2;
        } else {
            break;
        }
    }
    return res;
}

/// Shared driver for the line-search trainers (CGB and OSS): the callback
/// proposes a direction from the current gradient and its own memory.
inline TrainLog train_linesearch(
    CascadeNet& net, const Batch& batch, const TrainConfig& cfg,
    const std::function<std::vector<double>(const std::vector<double>& grad, bool& restarted)>&
        propose) {
    TrainLog log;
    auto params = get_parameters(net);
    double cur = mse(net, batch.inputs, batch.targets);
    if (!std::isfinite(cur)) throw std::runtime_error("train: non-finite loss at start");
    const double m = static_cast<double>(batch.m());
    double alpha_prev = 0.0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        auto grad = gradient(net, batch.inputs, batch.targets);  // SSE/2 gradient
        if (inf_norm(grad) < cfg.gradient_floor) {
            log.stop = StopReason::GradientFloor;
            break;
        }
        for (auto& g : grad) g *= 2.0 / m;  // MSE gradient

        bool restarted = false;
        auto dir = propose(grad, restarted);
        double slope = linalg::dot(grad, dir);
        if (!(slope < 0.0)) {  // fall back to steepest descent
            for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = -grad[i];
            slope = -linalg::dot(grad, grad);
            restarted = true;
        }

        auto value_at = [&](double alpha) {
            auto trial = params;
            linalg::axpy(alpha, dir, trial);
            set_parameters(net, trial);
            return mse(net, batch.inputs, batch.targets);
        };
        const double dir_norm = linalg::norm2(dir);
        const double alpha0 =
            alpha_prev > 0.0 ? std::clamp(2.0 * alpha_prev, 1e-12, 1e6)
                             : (dir_norm > 0.0 ? 1.0 / (1.0 + dir_norm) : 1.0);
        const auto ls = line_search(value_at, cur, slope, alpha0);
        if (!ls.ok) {
            set_parameters(net, params);
            if (restarted) {
                log.stop = StopReason::SearchStalled;
                break;
            }
            // force a steepest-descent restart next epoch
            alpha_prev = 0.0;
            continue;
        }
        linalg::axpy(ls.alpha, dir, params);
        set_parameters(net, params);
        cur = ls.value;
        alpha_prev = ls.alpha;
        log.epoch_mse.push_back(cur);
        if (cur <= cfg.goal_mse) {
            log.stop = StopReason::GoalReached;
            break;
        }
    }
    set_parameters(net, params);
    log.final_mse = cur;
    return log;
}

/// Polak-Ribiere conjugate gradient with the Powell restart test
/// |g_k . g_{k-1}| >= 0.2 |g_k|^2 (Beale-style restart to steepest descent).
inline TrainLog train_cgb(CascadeNet& net, const Batch& batch, const TrainConfig& cfg) {
    std::vector<double> g_prev;
    std::vector<double> d_prev;
    auto propose = [&](const std::vector<double>& grad, bool& restarted) {
        std::vector<double> dir(grad.size());
        bool restart = g_prev.empty();
        if (!restart) {
            const double overlap = std::abs(linalg::dot(grad, g_prev));
            if (overlap >= 0.2 * linalg::dot(grad, grad)) restart = true;
        }
        if (!restart) {
            double beta = 0.0;
            const double denom = linalg::dot(g_prev, g_prev);
            if (denom > 0.0) {
                double num = 0.0;
                for (std::size_t i = 0; i < grad.size(); ++i) num += grad[i] * (grad[i] - g_prev[i]);
                beta = std::max(0.0, num / denom);
            }
            if (beta == 0.0) restart = true;
            for (std::size_t i = 0; i < grad.size(); ++i) dir[i] = -grad[i] + beta * d_prev[i];
        }
        if (restart)
            for (std::size_t i = 0; i < grad.size(); ++i) dir[i] = -grad[i];
        restarted = restart;
        g_prev = grad;
        d_prev = dir;
        return dir;
    };
    return train_linesearch(net, batch, cfg, propose);
}

/// One-step secant: memoryless quasi-Newton direction from the last step and
/// gradient change, restarting to steepest descent when the curvature pair is
/// unusable.
inline TrainLog train_oss(CascadeNet& net, const Batch& batch, const TrainConfig& cfg) {
    std::vector<double> g_prev;
    std::vector<double> w_prev;
    auto params_of = [&]() { return get_parameters(net); };
    auto propose = [&](const std::vector<double>& grad, bool& restarted) {
        std::vector<double> dir(grad.size());
        const auto w = params_of();
        bool restart = g_prev.empty();
        if (!restart) {
            std::vector<double> s(w.size()), y(w.size());
            for (std::size_t i = 0; i < w.size(); ++i) {
                s[i] = w[i] - w_prev[i];
                y[i] = grad[i] - g_prev[i];
            }
            const double sy = linalg::dot(s, y);
            if (sy <= 1e-300) {
                restart = true;
            } else {
                const double sg = linalg::dot(s, grad);
                const double yg = linalg::dot(y, grad);
                const double yy = linalg::dot(y, y);
                const double a_coef = -(1.0 + yy / sy) * (sg / sy) + yg / sy;
                const double b_coef = sg / sy;
                for (std::size_t i = 0; i < w.size(); ++i)
                    dir[i] = -grad[i] + a_coef * s[i] + b_coef * y[i];
            }
        }
        if (restart)
            for (std::size_t i = 0; i < grad.size(); ++i) dir[i] = -grad[i];
        restarted = restart;
        g_prev = grad;
        w_prev = w;
        return dir;
    };
    return train_linesearch(net, batch, cfg, propose);
}

/// Moller's scaled conjugate gradient: trust-region-style damping instead of
/// a line search.
inline TrainLog train_scg(CascadeNet& net, const Batch& batch, const TrainConfig& cfg) {
    TrainLog log;
    constexpr double kSigma0 = 5e-5;
    const double m = static_cast<double>(batch.m());

    auto params = get_parameters(net);
    auto grad_at = [&](const std::vector<double>& w) {
        set_parameters(net, w);
        auto g = gradient(net, batch.inputs, batch.targets);
        for (auto& v : g) v *= 2.0 / m;
        return g;
    };
    auto value_at = [&](const std::vector<double>& w) {
        set_parameters(net, w);
        return mse(net, batch.inputs, batch.targets);
    };

    double f_cur = value_at(params);
    if (!std::isfinite(f_cur)) throw std::runtime_error("scg: non-finite loss at start");
    auto grad = grad_at(params);
    std::vector<double> r(grad.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = -grad[i];
    auto p = r;
    double lambda = 1e-6, lambda_bar = 0.0;
    bool success = true;
    double delta = 0.0;
    std::vector<double> s(p.size());

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double p_sq = linalg::dot(p, p);
        if (!(p_sq > 0.0)) {
            log.stop = StopReason::GradientFloor;
            break;
        }
        if (success) {
            const double sigma = kSigma0 / std::sqrt(p_sq);
            auto w_probe = params;
            linalg::axpy(sigma, p, w_probe);
            const auto g_probe = grad_at(w_probe);
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = (g_probe[i] - grad[i]) / sigma;
            delta = linalg::dot(p, s);
        }
        delta += (lambda - lambda_bar) * p_sq;
        if (delta <= 0.0) {
            lambda_bar = 2.0 * (lambda - delta / p_sq);
            delta = -delta + lambda * p_sq;
            lambda = lambda_bar;
        }
        const double mu = linalg::dot(p, r);
        const double alpha = mu / delta;

        auto w_trial = params;
        linalg::axpy(alpha, p, w_trial);
        const double f_trial = value_at(w_trial);
        const double comparison = 2.0 * delta * (f_cur - f_trial) / (mu * mu);

        if (std::isfinite(f_trial) && comparison >= 0.0) {
            params = std::move(w_trial);
            f_cur = f_trial;
            grad = grad_at(params);
            lambda_bar = 0.0;
            success = true;
            std::vector<double> r_new(grad.size());
            for (std::size_t i = 0; i < r_new.size(); ++i) r_new[i] = -grad[i];
            const double beta = (linalg::dot(r_new, r_new) - linalg::dot(r_new, r)) / mu;
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = r_new[i] + beta * p[i];
            r = std::move(r_new);
            if (comparison >= 0.75) lambda *= 0.25;
        } else {
            lambda_bar = lambda;
            success = false;
        }
        if (comparison < 0.25 || !std::isfinite(f_trial)) lambda += delta * (1.0 - comparison) / p_sq;
        if (!std::isfinite(lambda) || lambda > 1e60) {
            log.stop = StopReason::SearchStalled;
            break;
        }

        log.epoch_mse.push_back(f_cur);
        if (f_cur <= cfg.goal_mse) {
            log.stop = StopReason::GoalReached;
            break;
        }
        if (linalg::norm2(r) < cfg.gradient_floor) {
            log.stop = StopReason::GradientFloor;
            break;
        }
    }
    set_parameters(net, params);
    log.final_mse = f_cur;
    return log;
}

/// Gradient descent with momentum and an adaptive learning rate: grow on
/// improvement, shrink and drop momentum when the loss worsens past 4%.
inline TrainLog train_gdx(CascadeNet& net, const Batch& batch, const TrainConfig& cfg) {
    TrainLog log;
    const double m = static_cast<double>(batch.m());
    constexpr double kMomentum = 0.9;

    auto params = get_parameters(net);
    double f_cur = mse(net, batch.inputs, batch.targets);
    if (!std::isfinite(f_cur)) throw std::runtime_error("gdx: non-finite loss at start");
    double lr = cfg.learning_rate;
    std::vector<double> dw(params.size(), 0.0);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        auto grad = gradient(net, batch.inputs, batch.targets);
        for (auto& g : grad) g *= 2.0 / m;
        if (inf_norm(grad) < cfg.gradient_floor) {
            log.stop = StopReason::GradientFloor;
            break;
        }
        std::vector<double> dw_trial(params.size());
        for (std::size_t i = 0; i < params.size(); ++i)
            dw_trial[i] = kMomentum * dw[i] - (1.0 - kMomentum) * lr * grad[i];
        auto trial = params;
        linalg::axpy(1.0, dw_trial, trial);
        set_parameters(net, trial);
        const double f_trial = mse(net, batch.inputs, batch.targets);

        if (!std::isfinite(f_trial) || f_trial > f_cur * 1.04) {
            lr *= 0.7;
            std::fill(dw.begin(), dw.end(), 0.0);
            set_parameters(net, params);
            if (lr < 1e-15) {
                log.stop = StopReason::SearchStalled;
                break;
            }
        } else {
            if (f_trial < f_cur) lr *= 1.05;
            params = std::move(trial);
            dw = std::move(dw_trial);
            f_cur = f_trial;
        }
        log.epoch_mse.push_back(f_cur);
        if (f_cur <= cfg.goal_mse) {
            log.stop = StopReason::GoalReached;
            break;
        }
    }
    set_parameters(net, params);
    log.final_mse = f_cur;
    return log;
}

}  // namespace detail

/// Full-batch training. Targets are expected already normalized (dminmax).
/// Single-threaded with fixed reduction order, so a given seed reproduces the
/// trained net bit for bit.
inline TrainLog train(CascadeNet& net, const std::vector<std::vector<double>>& inputs,
                      const std::vector<double>& targets, const TrainConfig& cfg) {
    if (inputs.empty() || inputs.size() != targets.size())
        throw std::invalid_argument("train: batch shape mismatch");
    if (cfg.max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
    const detail::Batch batch{inputs, targets};
    switch (cfg.algorithm) {
        case Algorithm::LM: return detail::train_lm(net, batch, cfg);
        case Algorithm::CGB: return detail::train_cgb(net, batch, cfg);
        case Algorithm::SCG: return detail::train_scg(net, batch, cfg);
        case Algorithm::OSS: return detail::train_oss(net, batch, cfg);
        case Algorithm::GDX: return detail::train_gdx(net, batch, cfg);
    }
    throw std::invalid_argument("train: unknown algorithm");
}

}  // namespace faultloc
