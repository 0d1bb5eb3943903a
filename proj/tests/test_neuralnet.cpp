#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "faultloc/neuralnet.hpp"

using namespace faultloc;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0,
                                  double hi = 1.0) {
    std::uniform_real_distribution<> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

/// Straight-line re-implementation of the cascade forward pass, kept
/// deliberately naive so it cannot share a bug with the library version.
double naive_cascade_forward(const CascadeNet& net, const std::vector<double>& input) {
    std::vector<std::vector<double>> outputs;  // hidden activations so far
    const auto& topo = net.topology;
    for (int layer = 0; layer < topo.layer_count(); ++layer) {
        const bool is_output = layer == topo.layer_count() - 1;
        const int rows = is_output ? topo.output_dim : topo.hidden[layer];
        std::vector<double> z(rows, 0.0);
        // source 0: the raw input
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < topo.input_dim; ++c)
                z[r] += net.blocks[layer][0][r * topo.input_dim + c] * input[c];
        // sources 1..layer: every earlier hidden layer
        for (int s = 1; s <= layer; ++s) {
            const int width = topo.hidden[s - 1];
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < width; ++c)
                    z[r] += net.blocks[layer][s][r * width + c] * outputs[s - 1][c];
        }
        for (int r = 0; r < rows; ++r) {
            z[r] += net.biases[layer][r];
            if (!is_output) z[r] = std::tanh(z[r]);
        }
        if (is_output) return z[0];
        outputs.push_back(std::move(z));
    }
    return 0.0;
}

}  // namespace

TEST_CASE("dminmax maps the endpoints to 0.1 and 0.9") {
    const NormalizationSpec spec{5.0, 200.0};
    CHECK(dminmax(5.0, spec) == 0.1);
    CHECK(dminmax(200.0, spec) == Catch::Approx(0.9).margin(1e-15));

    // direct evaluation of the affine map
    CHECK(dminmax(175.0, spec) == Catch::Approx(0.8 * 170.0 / 195.0 + 0.1).margin(1e-15));
    CHECK(dminmax(175.0, spec) == Catch::Approx(0.79744).margin(1e-5));
}

TEST_CASE("dminmax inverse round trips across the line") {
    const NormalizationSpec spec{5.0, 200.0};
    for (double d = 5.0; d <= 200.0; d += 1.0)
        CHECK(dminmax_inverse(dminmax(d, spec), spec) == Catch::Approx(d).margin(1e-12));
    CHECK_THROWS_AS(dminmax(1.0, NormalizationSpec{3.0, 3.0}), std::invalid_argument);
}

TEST_CASE("init: reproducible from the seed, bounded by fan-in") {
    Topology topo;
    topo.input_dim = 12;
    const auto a = init_weights(topo, 77);
    const auto b = init_weights(topo, 77);
    const auto c = init_weights(topo, 78);

    bool identical = true, differs = false;
    for (int layer = 0; layer < topo.layer_count(); ++layer) {
        for (std::size_t s = 0; s < a.blocks[layer].size(); ++s) {
            identical = identical && a.blocks[layer][s] == b.blocks[layer][s];
            differs = differs || a.blocks[layer][s] != c.blocks[layer][s];
        }
        for (double bias : a.biases[layer]) CHECK(bias == 0.0);

        int fan_in = 0;
        for (int w : topo.source_sizes(layer)) fan_in += w;
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (const auto& block : a.blocks[layer])
            for (double w : block) CHECK(std::abs(w) <= bound);
    }
    CHECK(identical);
    CHECK(differs);
}

TEST_CASE("forward: all-zero net outputs zero") {
    Topology topo;
    topo.input_dim = 7;
    auto net = init_weights(topo, 1);
    for (auto& layer : net.blocks)
        for (auto& block : layer)
            for (auto& w : block) w = 0.0;
    std::mt19937_64 rng(3);
    CHECK(forward(net, random_vector(7, rng)) == 0.0);
}

TEST_CASE("forward: zeroed cascade blocks reduce to the plain feedforward net") {
    Topology cascade_topo;
    cascade_topo.input_dim = 6;
    cascade_topo.hidden = {5, 4};
    auto net = init_weights(cascade_topo, 42);

    Topology plain_topo = cascade_topo;
    plain_topo.cascade = false;
    auto plain = init_weights(plain_topo, 0);

    // plain chain: input->h0, h0->h1, h1->out; zero every other cascade block
    plain.blocks[0][0] = net.blocks[0][0];
    plain.blocks[1][0] = net.blocks[1][1];
    plain.blocks[2][0] = net.blocks[2][2];
    plain.biases = net.biases;
    for (auto& w : net.blocks[1][0]) w = 0.0;
    for (auto& w : net.blocks[2][0]) w = 0.0;
    for (auto& w : net.blocks[2][1]) w = 0.0;

    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 10; ++rep) {
        const auto x = random_vector(6, rng);
        CHECK(forward(net, x) == Catch::Approx(forward(plain, x)).margin(1e-12));
    }
}

TEST_CASE("forward: matches an independent reimplementation") {
    Topology topo;
    topo.input_dim = 9;
    topo.hidden = {6, 5, 3};
    auto net = init_weights(topo, 2024);
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        const auto x = random_vector(9, rng, -2.0, 2.0);
        const double got = forward(net, x);
        const double want = naive_cascade_forward(net, x);
        CHECK(got == Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("gradient: zero residuals give a zero gradient") {
    Topology topo;
    topo.input_dim = 4;
    topo.hidden = {3};
    auto net = init_weights(topo, 5);
    std::mt19937_64 rng(6);
    std::vector<std::vector<double>> xs;
    std::vector<double> ts;
    for (int i = 0; i < 6; ++i) {
        xs.push_back(random_vector(4, rng));
        ts.push_back(forward(net, xs.back()));
    }
    for (double g : gradient(net, xs, ts)) CHECK(g == 0.0);
}

TEST_CASE("gradient: matches central finite differences on a cascade net") {
    Topology topo;
    topo.input_dim = 5;
    topo.hidden = {4, 3};
    auto net = init_weights(topo, 11);
    std::mt19937_64 rng(12);
    std::vector<std::vector<double>> xs;
    std::vector<double> ts;
    for (int i = 0; i < 8; ++i) {
        xs.push_back(random_vector(5, rng));
        ts.push_back(std::uniform_real_distribution<>(-0.5, 0.5)(rng));
    }

    const auto grad = gradient(net, xs, ts);
    auto params = get_parameters(net);
    const double h = 1e-6;
    auto half_sse = [&](const std::vector<double>& p) {
        set_parameters(net, p);
        double s = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = forward(net, xs[i]) - ts[i];
            s += r * r;
        }
        return 0.5 * s;
    };
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto plus = params, minus = params;
        plus[k] += h;
        minus[k] -= h;
        const double fd = (half_sse(plus) - half_sse(minus)) / (2.0 * h);
        num += (grad[k] - fd) * (grad[k] - fd);
        den += fd * fd;
    }
    CHECK(std::sqrt(num / den) < 1e-6);
}

TEST_CASE("gradient equals J^T r and is additive over the batch") {
    Topology topo;
    topo.input_dim = 6;
    topo.hidden = {5, 3};
    auto net = init_weights(topo, 21);
    std::mt19937_64 rng(22);
    std::vector<std::vector<double>> xs;
    std::vector<double> ts;
    for (int i = 0; i < 7; ++i) {
        xs.push_back(random_vector(6, rng));
        ts.push_back(std::uniform_real_distribution<>(-1.0, 1.0)(rng));
    }

    const auto grad = gradient(net, xs, ts);
    const auto jac = jacobian(net, xs);
    const std::size_t p = net.parameter_count();
    std::vector<double> jtr(p, 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = forward(net, xs[i]) - ts[i];
        for (std::size_t k = 0; k < p; ++k) jtr[k] += r * jac[i * p + k];
    }
    double scale = 0.0;
    for (double g : grad) scale = std::max(scale, std::abs(g));
    for (std::size_t k = 0; k < p; ++k) CHECK(std::abs(grad[k] - jtr[k]) <= 1e-10 * std::max(scale, 1.0));

    // per-sample additivity
    std::vector<double> acc(p, 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto gi = gradient(net, {xs[i]}, {ts[i]});
        for (std::size_t k = 0; k < p; ++k) acc[k] += gi[k];
    }
    for (std::size_t k = 0; k < p; ++k) CHECK(acc[k] == Catch::Approx(grad[k]).margin(1e-12 * std::max(scale, 1.0)));
}

TEST_CASE("parameter round trip preserves the net") {
    Topology topo;
    topo.input_dim = 8;
    auto net = init_weights(topo, 123);
    const double before = forward(net, std::vector<double>(8, 0.25));
    auto p = get_parameters(net);
    CHECK(p.size() == net.parameter_count());
    set_parameters(net, p);
    CHECK(forward(net, std::vector<double>(8, 0.25)) == before);
}

TEST_CASE("standardizer: z-scores features and passes constants through") {
    std::vector<std::vector<double>> rows = {{1.0, 5.0}, {3.0, 5.0}, {5.0, 5.0}};
    const auto st = Standardizer::fit(rows);
    CHECK(st.mean[0] == Catch::Approx(3.0));
    CHECK(st.scale[1] == 1.0);  // constant feature keeps unit scale
    const auto out = st.apply({3.0, 5.0});
    CHECK(out[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(out[1] == Catch::Approx(0.0).margin(1e-12));
}
