#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace faultloc {

/// Affine map of targets into [0.1, 0.9].
struct NormalizationSpec {
    double x_min = 5.0;
    double x_max = 200.0;

    void validate() const {
        if (!(x_min < x_max)) throw std::invalid_argument("normalization: x_min must be < x_max");
    }
};

inline double dminmax(double x, const NormalizationSpec& spec) {
    spec.validate();
    return 0.8 * (x - spec.x_min) / (spec.x_max - spec.x_min) + 0.1;
}

inline double dminmax_inverse(double xn, const NormalizationSpec& spec) {
    spec.validate();
    return (xn - 0.1) / 0.8 * (spec.x_max - spec.x_min) + spec.x_min;
}

/// Layer sizes of the network. With cascade set, every layer (hidden and
/// output) receives direct weight blocks from the input and from every
/// earlier hidden layer, in addition to the preceding layer.
struct Topology {
    int input_dim = 0;
    std::vector<int> hidden = {20, 18, 10, 5};
    int output_dim = 1;
    bool cascade = true;

    void validate() const {
        if (input_dim < 1) throw std::invalid_argument("topology: input_dim must be >= 1");
        if (output_dim < 1) throw std::invalid_argument("topology: output_dim must be >= 1");
        for (int h : hidden)
            if (h < 1) throw std::invalid_argument("topology: hidden sizes must be >= 1");
    }

    int layer_count() const { return static_cast<int>(hidden.size()) + 1; }

    int layer_size(int layer) const {
        return layer < static_cast<int>(hidden.size()) ? hidden[layer] : output_dim;
    }

    /// Source widths feeding `layer`: index 0 is the input, 1..L are hidden
    /// layers. Non-cascade nets keep only the immediately preceding source.
    std::vector<int> source_sizes(int layer) const {
        std::vector<int> src;
        if (cascade) {
            src.push_back(input_dim);
            for (int l = 0; l < layer; ++l) src.push_back(hidden[l]);
        } else {
            src.push_back(layer == 0 ? input_dim : hidden[layer - 1]);
        }
        return src;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (int layer = 0; layer < layer_count(); ++layer) {
            const int rows = layer_size(layer);
            for (int w : source_sizes(layer)) n += static_cast<std::size_t>(rows) * w;
            n += rows;
        }
        return n;
    }
};

/// Weight block: rows = destination layer size, cols = source size, row-major.
struct CascadeNet {
    Topology topology;
    // blocks[layer][source] with source order: input, hidden 0, hidden 1, ...
    std::vector<std::vector<std::vector<double>>> blocks;
    std::vector<std::vector<double>> biases;

    std::size_t parameter_count() const { return topology.parameter_count(); }
};

namespace detail {

/// Uniform draw in [0,1) with a pinned mapping from the engine output, so
/// weights are identical across platforms and standard library versions.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double act(double z) { return std::tanh(z); }
inline double act_deriv_from_output(double a) { return 1.0 - a * a; }

struct ForwardCache {
    std::vector<std::vector<double>> activations;  // per layer, post-activation
};

inline const std::vector<double>& source_values(const std::vector<double>& input,
                                                const ForwardCache& cache, int source_index) {
    return source_index == 0 ? input : cache.activations[source_index - 1];
}

inline void forward_pass(const CascadeNet& net, const std::vector<double>& input,
                         ForwardCache& cache) {
    const auto& topo = net.topology;
    cache.activations.assign(topo.layer_count(), {});
    for (int layer = 0; layer < topo.layer_count(); ++layer) {
        const int rows = topo.layer_size(layer);
        const bool is_output = layer == topo.layer_count() - 1;
        std::vector<double>& out = cache.activations[layer];
        out.assign(rows, 0.0);
        const auto sources = topo.source_sizes(layer);
        for (std::size_t s = 0; s < sources.size(); ++s) {
            const int src_index = topo.cascade ? static_cast<int>(s) : layer;
            const auto& src = source_values(input, cache, src_index);
            const auto& w = net.blocks[layer][s];
            for (int r = 0; r < rows; ++r) {
                double acc = 0.0;
                const double* wrow = w.data() + static_cast<std::size_t>(r) * sources[s];
                for (int c = 0; c < sources[s]; ++c) acc += wrow[c] * src[c];
                out[r] += acc;
            }
        }
        for (int r = 0; r < rows; ++r) {
            const double z = out[r] + net.biases[layer][r];
            out[r] = is_output ? z : act(z);
        }
    }
}

}  // namespace detail

/// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per destination
/// layer (fan_in counts every incoming block); biases zero. Reproducible
/// from the seed.
inline CascadeNet init_weights(const Topology& topology, std::uint64_t seed) {
    topology.validate();
    std::mt19937_64 rng(seed);
    CascadeNet net;
    net.topology = topology;
    net.blocks.resize(topology.layer_count());
    net.biases.resize(topology.layer_count());
    for (int layer = 0; layer < topology.layer_count(); ++layer) {
        const int rows = topology.layer_size(layer);
        const auto sources = topology.source_sizes(layer);
        int fan_in = 0;
        for (int w : sources) fan_in += w;
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        net.blocks[layer].resize(sources.size());
        for (std::size_t s = 0; s < sources.size(); ++s) {
            auto& block = net.blocks[layer][s];
            block.resize(static_cast<std::size_t>(rows) * sources[s]);
            for (auto& w : block) w = (2.0 * detail::uniform01(rng) - 1.0) * bound;
        }
        net.biases[layer].assign(rows, 0.0);
    }
    return net;
}

inline double forward(const CascadeNet& net, const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != net.topology.input_dim)
        throw std::invalid_argument("forward: input dimension mismatch");
    if (net.topology.output_dim != 1)
        throw std::invalid_argument("forward: scalar output expected");
    detail::ForwardCache cache;
    detail::forward_pass(net, input, cache);
    return cache.activations.back()[0];
}

namespace detail {

/// Reverse pass seeded with d(output)/d(output) = 1; fills the flattened
/// derivative row in parameter order (per layer: blocks in source order,
/// row-major, then bias).
inline void backward_row(const CascadeNet& net, const std::vector<double>& input,
                         const ForwardCache& cache, std::vector<double>& row) {
    const auto& topo = net.topology;
    const int layers = topo.layer_count();
    std::vector<std::vector<double>> delta(layers);
    for (int layer = 0; layer < layers; ++layer) delta[layer].assign(topo.layer_size(layer), 0.0);
    delta[layers - 1][0] = 1.0;  // identity output activation

    for (int layer = layers - 1; layer >= 0; --layer) {
        if (layer < layers - 1) {
            // accumulate from every later layer this one feeds, then apply
            // the activation derivative
            auto& d = delta[layer];
            for (int later = layer + 1; later < layers; ++later) {
                const auto sources = topo.source_sizes(later);
                int block_index = -1;
                if (topo.cascade) {
                    block_index = layer + 1;  // source order: input, h0, h1, ...
                } else if (later == layer + 1) {
                    block_index = 0;
                }
                if (block_index < 0 || block_index >= static_cast<int>(sources.size())) continue;
                const auto& w = net.blocks[later][block_index];
                const int later_rows = topo.layer_size(later);
                const int cols = sources[block_index];
                for (int r = 0; r < later_rows; ++r) {
                    const double dr = delta[later][r];
                    if (dr == 0.0) continue;
                    const double* wrow = w.data() + static_cast<std::size_t>(r) * cols;
                    for (int c = 0; c < cols; ++c) d[c] += dr * wrow[c];
                }
            }
            const auto& a = cache.activations[layer];
            for (std::size_t i = 0; i < d.size(); ++i) d[i] *= act_deriv_from_output(a[i]);
        }
    }

    row.assign(topo.parameter_count(), 0.0);
    std::size_t offset = 0;
    for (int layer = 0; layer < layers; ++layer) {
        const int rows = topo.layer_size(layer);
        const auto sources = topo.source_sizes(layer);
        for (std::size_t s = 0; s < sources.size(); ++s) {
            const int src_index = topo.cascade ? static_cast<int>(s) : layer;
            const auto& src = source_values(input, cache, src_index);
            for (int r = 0; r < rows; ++r) {
                const double dr = delta[layer][r];
                double* out = row.data() + offset + static_cast<std::size_t>(r) * sources[s];
                if (dr != 0.0)
                    for (int c = 0; c < sources[s]; ++c) out[c] = dr * src[c];
            }
            offset += static_cast<std::size_t>(rows) * sources[s];
        }
        for (int r = 0; r < rows; ++r) row[offset + r] = delta[layer][r];
        offset += rows;
    }
}

}  // namespace detail

/// Flattened parameter vector in the declared order (per layer: blocks in
/// source order, row-major, then bias).
inline std::vector<double> get_parameters(const CascadeNet& net) {
    std::vector<double> p;
    p.reserve(net.parameter_count());
    for (int layer = 0; layer < net.topology.layer_count(); ++layer) {
        for (const auto& block : net.blocks[layer]) p.insert(p.end(), block.begin(), block.end());
        p.insert(p.end(), net.biases[layer].begin(), net.biases[layer].end());
    }
    return p;
}

inline void set_parameters(CascadeNet& net, const std::vector<double>& p) {
    if (p.size() != net.parameter_count()) throw std::invalid_argument("set_parameters: size mismatch");
    std::size_t offset = 0;
    for (int layer = 0; layer < net.topology.layer_count(); ++layer) {
        for (auto& block : net.blocks[layer]) {
            std::copy(p.begin() + offset, p.begin() + offset + block.size(), block.begin());
            offset += block.size();
        }
        auto& bias = net.biases[layer];
        std::copy(p.begin() + offset, p.begin() + offset + bias.size(), bias.begin());
        offset += bias.size();
    }
}

/// Residual Jacobian: row i = d(prediction_i)/d(parameters), m x p row-major.
inline std::vector<double> jacobian(const CascadeNet& net,
                                    const std::vector<std::vector<double>>& inputs) {
    if (inputs.empty()) throw std::invalid_argument("jacobian: empty batch");
    const std::size_t p = net.parameter_count();
    std::vector<double> jac(inputs.size() * p);
    detail::ForwardCache cache;
    std::vector<double> row;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        detail::forward_pass(net, inputs[i], cache);
        detail::backward_row(net, inputs[i], cache, row);
        std::copy(row.begin(), row.end(), jac.begin() + i * p);
    }
    return jac;
}

/// Gradient of 1/2 * sum of squared residuals (residual = prediction - target),
/// accumulated per sample without materializing the Jacobian.
inline std::vector<double> gradient(const CascadeNet& net,
                                    const std::vector<std::vector<double>>& inputs,
                                    const std::vector<double>& targets) {
    if (inputs.empty() || inputs.size() != targets.size())
        throw std::invalid_argument("gradient: batch shape mismatch");
    std::vector<double> grad(net.parameter_count(), 0.0);
    detail::ForwardCache cache;
    std::vector<double> row;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        detail::forward_pass(net, inputs[i], cache);
        const double residual = cache.activations.back()[0] - targets[i];
        detail::backward_row(net, inputs[i], cache, row);
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += residual * row[k];
    }
    return grad;
}

inline std::vector<double> predict_batch(const CascadeNet& net,
                                         const std::vector<std::vector<double>>& inputs) {
    std::vector<double> out(inputs.size());
    detail::ForwardCache cache;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        detail::forward_pass(net, inputs[i], cache);
        out[i] = cache.activations.back()[0];
    }
    return out;
}

inline double mse(const CascadeNet& net, const std::vector<std::vector<double>>& inputs,
                  const std::vector<double>& targets) {
    const auto pred = predict_batch(net, inputs);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double r = pred[i] - targets[i];
        s += r * r;
    }
    return s / static_cast<double>(pred.size());
}

/// Per-feature z-score fitted on the training rows only. Constant features
/// pass through centered with unit scale.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw std::invalid_argument("standardizer: empty fit set");
        const std::size_t dim = rows[0].size();
        Standardizer st;
        st.mean.assign(dim, 0.0);
        st.scale.assign(dim, 1.0);
        for (const auto& r : rows)
            for (std::size_t j = 0; j < dim; ++j) st.mean[j] += r[j];
        for (auto& m : st.mean) m /= static_cast<double>(rows.size());
        std::vector<double> var(dim, 0.0);
        for (const auto& r : rows)
            for (std::size_t j = 0; j < dim; ++j) {
                const double d = r[j] - st.mean[j];
                var[j] += d * d;
            }
        for (std::size_t j = 0; j < dim; ++j) {
            const double sd = std::sqrt(var[j] / static_cast<double>(rows.size()));
            st.scale[j] = sd > 1e-12 ? sd : 1.0;
        }
        return st;
    }

    std::vector<double> apply(const std::vector<double>& row) const {
        std::vector<double> out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
        return out;
    }
};

}  // namespace faultloc
