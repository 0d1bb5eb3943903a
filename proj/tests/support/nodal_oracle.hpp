#pragma once

// Independent check for the fault solver: assembles the full three-phase
// nodal admittance matrix of the same lumped network (sources as Norton
// equivalents, line sections as 3x3 sequence-derived blocks, zero-sequence
// charging lumps, the load, and the fault resistance as an explicit branch)
// and solves it in one shot. Shares only the model structs with the library;
// the assembly, transform and solver here are written from scratch.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "faultloc/gridsim.hpp"

namespace oracle {

using Complex = std::complex<double>;
using Mat3 = std::array<std::array<Complex, 3>, 3>;

inline Mat3 zero3() { return {{{Complex{}, Complex{}, Complex{}}, {Complex{}, Complex{}, Complex{}}, {Complex{}, Complex{}, Complex{}}}}; }

inline Mat3 fortescue() {
    const Complex a = std::polar(1.0, 2.0 * M_PI / 3.0);
    Mat3 m = zero3();
    m[0][0] = 1; m[0][1] = 1; m[0][2] = 1;
    m[1][0] = 1; m[1][1] = a * a; m[1][2] = a;
    m[2][0] = 1; m[2][1] = a; m[2][2] = a * a;
    return m;
}

inline Mat3 fortescue_inv() {
    const Complex a = std::polar(1.0, 2.0 * M_PI / 3.0);
    Mat3 m = zero3();
    const Complex third{1.0 / 3.0, 0.0};
    m[0][0] = third; m[0][1] = third; m[0][2] = third;
    m[1][0] = third; m[1][1] = third * a; m[1][2] = third * a * a;
    m[2][0] = third; m[2][1] = third * a * a; m[2][2] = third * a;
    return m;
}

inline Mat3 mul(const Mat3& x, const Mat3& y) {
    Mat3 r = zero3();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j) r[i][j] += x[i][k] * y[k][j];
    return r;
}

/// Phase-domain block of an element given its sequence admittances.
inline Mat3 seq_to_phase(Complex y0, Complex y1, Complex y2) {
    Mat3 d = zero3();
    d[0][0] = y0;
    d[1][1] = y1;
    d[2][2] = y2;
    return mul(mul(fortescue(), d), fortescue_inv());
}

/// Dense complex Gaussian elimination, written independently of the library.
inline std::vector<Complex> gauss_solve(std::vector<std::vector<Complex>> a, std::vector<Complex> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
        if (std::abs(a[piv][k]) < 1e-280) throw std::runtime_error("oracle: singular");
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        for (std::size_t r = k + 1; r < n; ++r) {
            const Complex f = a[r][k] / a[k][k];
            for (std::size_t c = k; c < n; ++c) a[r][c] -= f * a[k][c];
            b[r] -= f * b[k];
        }
    }
    std::vector<Complex> x(n);
    for (std::size_t i = n; i-- > 0;) {
        Complex s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

struct OracleResult {
    faultloc::TerminalState relay;
};

/// One-shot during-fault solve on nodes {relay, fault, remote} x {a,b,c}.
/// Requires rf > 0 (the fault enters as an admittance) and a fault strictly
/// inside the line.
inline OracleResult solve_slg_phase_domain(const faultloc::SystemModel& model,
                                           const faultloc::FaultSpec& fault) {
    if (!(fault.rf_ohm > 0.0)) throw std::invalid_argument("oracle: rf must be > 0");
    if (!(fault.distance_km > 0.0) || !(fault.distance_km < model.line.length_km - 1e-9))
        throw std::invalid_argument("oracle: fault must be strictly inside the line");

    constexpr int kNodes = 9;  // L(a,b,c), F(a,b,c), R(a,b,c)
    std::vector<std::vector<Complex>> y(kNodes, std::vector<Complex>(kNodes));
    std::vector<Complex> inj(kNodes);

    auto add_block = [&](int node_i, int node_j, const Mat3& block) {
        // node index -1 means ground
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) {
                if (node_i >= 0 && node_j >= 0) {
                    y[node_i * 3 + p][node_i * 3 + q] += block[p][q];
                    y[node_j * 3 + p][node_j * 3 + q] += block[p][q];
                    y[node_i * 3 + p][node_j * 3 + q] -= block[p][q];
                    y[node_j * 3 + p][node_i * 3 + q] -= block[p][q];
                } else {
                    const int node = node_i >= 0 ? node_i : node_j;
                    y[node * 3 + p][node * 3 + q] += block[p][q];
                }
            }
    };

    const double omega = model.omega();
    const double d = fault.distance_km;
    const double rem = model.line.length_km - d;

    auto line_block = [&](double km) {
        return seq_to_phase(1.0 / (km * model.line.z0_per_km), 1.0 / (km * model.line.z1_per_km),
                            1.0 / (km * model.line.z1_per_km));
    };
    const Mat3 y_lf = line_block(d);
    add_block(0, 1, y_lf);
    add_block(1, 2, line_block(rem));

    auto source_block = [&](const faultloc::SourceParams& src) {
        Complex y0{0.0, 0.0};
        switch (src.grounding.kind) {
            case faultloc::GroundingKind::Ungrounded: y0 = 0.0; break;
            case faultloc::GroundingKind::Solid: y0 = 1.0 / src.z0_src; break;
            case faultloc::GroundingKind::Impedance:
                y0 = 1.0 / (src.z0_src + 3.0 * src.grounding.rn_ohm);
                break;
        }
        return seq_to_phase(y0, 1.0 / src.z1_src, 1.0 / src.z1_src);
    };

    auto norton_inject = [&](int node, const faultloc::SourceParams& src) {
        const Mat3 blk = source_block(src);
        add_block(node, -1, blk);
        const Complex a = std::polar(1.0, 2.0 * M_PI / 3.0);
        const std::array<Complex, 3> e{src.emf, src.emf * a * a, src.emf * a};
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) inj[node * 3 + p] += blk[p][q] * e[q];
    };
    norton_inject(0, model.src_local);
    norton_inject(2, model.src_remote);

    // zero-sequence charging: pi-halves of each section at its end nodes
    auto cap_block = [&](double farads) { return seq_to_phase(Complex{0.0, omega * farads}, 0.0, 0.0); };
    add_block(0, -1, cap_block(d * model.line.c0_per_km / 2.0));
    add_block(1, -1, cap_block(d * model.line.c0_per_km / 2.0 + rem * model.line.c0_per_km / 2.0));
    add_block(2, -1, cap_block(rem * model.line.c0_per_km / 2.0));

    if (model.load_mw > 0.0) {
        const Complex y_load = 1.0 / Complex{model.load_resistance(), 0.0};
        add_block(2, -1, seq_to_phase(0.0, y_load, y_load));
    }

    y[3][3] += 1.0 / fault.rf_ohm;  // phase-A fault branch at the fault node

    const auto v = gauss_solve(y, inj);

    // relay current = series branch L->F (charging lumps hang off the nodes)
    std::array<Complex, 3> dv{v[0] - v[3], v[1] - v[4], v[2] - v[5]};
    std::array<Complex, 3> i_relay{};
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) i_relay[p] += y_lf[p][q] * dv[q];

    OracleResult res;
    res.relay.va = v[0];
    res.relay.vb = v[1];
    res.relay.vc = v[2];
    res.relay.ia = i_relay[0];
    res.relay.ib = i_relay[1];
    res.relay.ic = i_relay[2];
    res.relay.i0 = (i_relay[0] + i_relay[1] + i_relay[2]) / 3.0;
    return res;
}

}  // namespace oracle
