#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "faultloc/linalg.hpp"
#include "faultloc/phasor.hpp"

namespace faultloc {

/// Per-unit-length sequence parameters of the line. Positive and negative
/// sequence share z1; shunt capacitance enters the solver only through the
/// zero-sequence network (c1 is carried for completeness).
struct SequenceLineParams {
    std::complex<double> z1_per_km;  // ohm/km
    std::complex<double> z0_per_km;  // ohm/km
    double c1_per_km = 0.0;          // F/km
    double c0_per_km = 0.0;          // F/km
    double length_km = 0.0;

    void validate() const {
        if (!(length_km > 0.0)) throw std::invalid_argument("line: length_km must be > 0");
        if (z1_per_km.real() < 0.0 || z0_per_km.real() < 0.0)
            throw std::invalid_argument("line: series resistance must be >= 0");
        if (!(z1_per_km.imag() > 0.0) || !(z0_per_km.imag() > 0.0))
            throw std::invalid_argument("line: series reactance must be > 0");
        if (c1_per_km < 0.0 || c0_per_km < 0.0)
            throw std::invalid_argument("line: shunt capacitance must be >= 0");
    }
};

enum class GroundingKind { Ungrounded, Solid, Impedance };

/// Neutral treatment of a transformer: no earth path, a bolted neutral, or a
/// neutral resistor (adds 3*rn to that end's zero-sequence branch).
struct GroundingScheme {
    GroundingKind kind = GroundingKind::Solid;
    double rn_ohm = 0.0;

    static GroundingScheme ungrounded() { return {GroundingKind::Ungrounded, 0.0}; }
    static GroundingScheme solid() { return {GroundingKind::Solid, 0.0}; }
    static GroundingScheme impedance(double rn) {
        if (!(rn > 0.0)) throw std::invalid_argument("grounding: rn_ohm must be > 0");
        return {GroundingKind::Impedance, rn};
    }

    std::string name() const {
        switch (kind) {
            case GroundingKind::Ungrounded: return "ungrounded";
            case GroundingKind::Solid: return "solid";
            case GroundingKind::Impedance: return "impedance";
        }
        return "?";
    }
};

struct SourceParams {
    Phasor emf;                        // phase-A internal EMF, peak volts
    std::complex<double> z1_src;       // ohm
    std::complex<double> z0_src;       // ohm; zero-seq path of the transformer when grounded
    GroundingScheme grounding;
};

struct FaultSpec {
    double distance_km = 0.0;  // from the relay bus
    double rf_ohm = 0.0;
    double t_on_s = 0.3;
    double duration_s = 0.05;
};

/// Two-source model of the line. The remote EMF magnitude defines the
/// nominal phase voltage used for the constant-impedance load conversion.
struct SystemModel {
    SequenceLineParams line;
    SourceParams src_local;   // relay end
    SourceParams src_remote;
    double load_mw = 0.0;     // constant-impedance load at the remote bus, unity pf
    double f0_hz = 50.0;

    void validate() const {
        line.validate();
        if (!(std::abs(src_local.emf) > 0.0) || !(std::abs(src_remote.emf) > 0.0))
            throw std::invalid_argument("model: |emf| must be > 0");
        if (load_mw < 0.0) throw std::invalid_argument("model: load_mw must be >= 0");
        if (!(f0_hz > 0.0)) throw std::invalid_argument("model: f0_hz must be > 0");
    }

    void validate_fault(const FaultSpec& fault) const {
        if (!(fault.distance_km > 0.0) || fault.distance_km > line.length_km)
            throw std::invalid_argument("fault: distance exceeds line length");
        if (fault.rf_ohm < 0.0) throw std::invalid_argument("fault: rf_ohm must be >= 0");
    }

    double omega() const { return 2.0 * std::numbers::pi * f0_hz; }
    double nominal_phase_peak() const { return std::abs(src_remote.emf); }

    /// Load as a wye resistance per phase, peak-phasor convention:
    /// P = 3 * (Vpk/sqrt(2))^2 / R  =>  R = 1.5 * Vpk^2 / P.
    double load_resistance() const {
        const double vpk = nominal_phase_peak();
        return 1.5 * vpk * vpk / (load_mw * 1e6);
    }
};

/// Relay-terminal phasors. i0 satisfies i0 = (ia+ib+ic)/3.
struct TerminalState {
    Phasor va, vb, vc;
    Phasor ia, ib, ic;
    Phasor i0;
};

struct SequenceThevenin {
    std::complex<double> z1, z2, z0;  // Thevenin impedances at the fault point
    std::complex<double> d1, d0;      // relay-branch share of fault-point sequence current
};

namespace detail {

struct SeqNetworkSolve {
    std::complex<double> zeq;      // Thevenin impedance at the fault node
    std::complex<double> d_relay;  // relay-branch current per 1 A extracted at the fault
    std::complex<double> v_relay;  // relay-bus voltage change per 1 A extracted
};

/// Nodal solve of one sequence network for a unit current extracted at the
/// fault point. Nodes: 0 = relay bus, 1 = fault point, 2 = remote bus (the
/// fault and remote nodes merge when the fault sits at the line end).
inline SeqNetworkSolve solve_sequence_network(const SystemModel& model, double distance_km,
                                              bool zero_sequence) {
    const auto& line = model.line;
    const double remainder_km = line.length_km - distance_km;
    const bool merged = remainder_km < 1e-9;
    const std::size_t n = merged ? 2 : 3;
    const std::size_t node_remote = merged ? 1 : 2;

    linalg::CMatrix y(n, n);
    auto shunt = [&](std::size_t i, std::complex<double> adm) { y(i, i) += adm; };
    auto series = [&](std::size_t i, std::size_t j, std::complex<double> adm) {
        y(i, i) += adm;
        y(j, j) += adm;
        y(i, j) -= adm;
        y(j, i) -= adm;
    };

    auto source_admittance = [&](const SourceParams& src) -> std::complex<double> {
        if (!zero_sequence) return 1.0 / src.z1_src;
        switch (src.grounding.kind) {
            case GroundingKind::Ungrounded: return 0.0;
            case GroundingKind::Solid: return 1.0 / src.z0_src;
            case GroundingKind::Impedance: return 1.0 / (src.z0_src + 3.0 * src.grounding.rn_ohm);
        }
        return 0.0;
    };

    const std::complex<double> z_per_km = zero_sequence ? line.z0_per_km : line.z1_per_km;
    const std::complex<double> y_relay_branch = 1.0 / (distance_km * z_per_km);

    shunt(0, source_admittance(model.src_local));
    shunt(node_remote, source_admittance(model.src_remote));
    series(0, 1, y_relay_branch);
    if (!merged) series(1, 2, 1.0 / (remainder_km * z_per_km));

    if (zero_sequence) {
        // pi-halves of each section's zero-sequence charging capacitance
        const std::complex<double> jw{0.0, model.omega()};
        shunt(0, jw * (distance_km * line.c0_per_km / 2.0));
        shunt(1, jw * (distance_km * line.c0_per_km / 2.0));
        if (!merged) {
            shunt(1, jw * (remainder_km * line.c0_per_km / 2.0));
            shunt(2, jw * (remainder_km * line.c0_per_km / 2.0));
        }
    } else if (model.load_mw > 0.0) {
        shunt(node_remote, 1.0 / std::complex<double>(model.load_resistance(), 0.0));
    }

    linalg::CVector rhs(n);
    rhs[1] = -1.0;  // 1 A extracted at the fault point
    linalg::CVector v;
    try {
        v = linalg::solve(y, rhs);
    } catch (const std::runtime_error&) {
        throw std::runtime_error(zero_sequence
                                     ? "zero-sequence network singular (ungrounded model requires capacitance)"
                                     : "network singular");
    }
    SeqNetworkSolve out;
    out.zeq = -v[1];
    out.d_relay = (v[0] - v[1]) * y_relay_branch;
    out.v_relay = v[0];
    return out;
}

struct PrefaultSolution {
    Phasor v_relay;   // positive-sequence phase-A voltage at the relay bus
    Phasor i_relay;   // line current, relay bus toward remote
    Phasor v_remote;
};

/// Balanced pre-fault flow: two EMFs, the series line, and the constant
/// impedance load at the remote bus (two-node nodal solve, phase A only).
inline PrefaultSolution solve_prefault(const SystemModel& model) {
    const std::complex<double> y_src_l = 1.0 / model.src_local.z1_src;
    const std::complex<double> y_src_r = 1.0 / model.src_remote.z1_src;
    const std::complex<double> y_line = 1.0 / (model.line.length_km * model.line.z1_per_km);

    linalg::CMatrix y(2, 2);
    y(0, 0) = y_src_l + y_line;
    y(0, 1) = -y_line;
    y(1, 0) = -y_line;
    y(1, 1) = y_src_r + y_line;
    if (model.load_mw > 0.0) y(1, 1) += 1.0 / std::complex<double>(model.load_resistance(), 0.0);

    linalg::CVector rhs{model.src_local.emf * y_src_l, model.src_remote.emf * y_src_r};
    linalg::CVector v;
    try {
        v = linalg::solve(y, rhs);
    } catch (const std::runtime_error&) {
        throw std::runtime_error("prefault: singular network");
    }
    return {v[0], (v[0] - v[1]) * y_line, v[1]};
}

}  // namespace detail

inline TerminalState prefault_state(const SystemModel& model) {
    model.validate();
    const auto pre = detail::solve_prefault(model);
    const ThreePhase v = balanced_from_a(pre.v_relay);
    const ThreePhase i = balanced_from_a(pre.i_relay);
    return {v.a, v.b, v.c, i.a, i.b, i.c, (i.a + i.b + i.c) / 3.0};
}

inline SequenceThevenin sequence_thevenin(const SystemModel& model, double distance_km) {
    model.validate();
    if (!(distance_km > 0.0) || distance_km > model.line.length_km)
        throw std::invalid_argument("sequence_thevenin: distance outside line");
    const auto pos = detail::solve_sequence_network(model, distance_km, false);
    const auto zero = detail::solve_sequence_network(model, distance_km, true);
    return {pos.zeq, pos.zeq, zero.zeq, pos.d_relay, zero.d_relay};
}

/// Steady during-fault relay state for a phase-A single-line-to-ground fault:
/// series connection of the sequence networks through 3*rf, superposed on the
/// pre-fault flow.
inline TerminalState solve_slg(const SystemModel& model, const FaultSpec& fault) {
    model.validate();
    model.validate_fault(fault);

    const auto pre = detail::solve_prefault(model);
    const Phasor e_pre = pre.v_relay - pre.i_relay * (fault.distance_km * model.line.z1_per_km);

    const auto pos = detail::solve_sequence_network(model, fault.distance_km, false);
    const auto zero = detail::solve_sequence_network(model, fault.distance_km, true);

    const Phasor i_fault = e_pre / (2.0 * pos.zeq + zero.zeq + 3.0 * fault.rf_ohm);

    SequenceSet v_seq;
    v_seq.pos = pre.v_relay + i_fault * pos.v_relay;
    v_seq.neg = i_fault * pos.v_relay;
    v_seq.zero = i_fault * zero.v_relay;

    SequenceSet i_seq;
    i_seq.pos = pre.i_relay + i_fault * pos.d_relay;
    i_seq.neg = i_fault * pos.d_relay;
    i_seq.zero = i_fault * zero.d_relay;

    const ThreePhase v = to_phase(v_seq);
    const ThreePhase i = to_phase(i_seq);
    return {v.a, v.b, v.c, i.a, i.b, i.c, i_seq.zero};
}

/// Default 154 kV, 50 Hz, 200 km two-source system with both transformer
/// neutrals treated per `scheme`. Line constants are representative
/// single-circuit values; sources are 2000 MVA short-circuit level, X/R = 10.
/// The local EMF is chosen so the full load flows through the relay.
inline SystemModel default_system(const GroundingScheme& scheme, double load_mw = 25.0) {
    SystemModel m;
    m.f0_hz = 50.0;
    m.line = {{0.05, 0.45}, {0.25, 1.35}, 9e-9, 5.5e-9, 200.0};

    const double v_ll = 154e3;
    const double v_pk = v_ll * std::sqrt(2.0) / std::sqrt(3.0);
    const double scc_mva = 2000.0;
    const double x_over_r = 10.0;
    const double z_mag = v_ll * v_ll / (scc_mva * 1e6);
    const std::complex<double> z_src =
        z_mag * std::complex<double>(1.0, x_over_r) / std::sqrt(1.0 + x_over_r * x_over_r);

    m.src_remote = {Phasor{v_pk, 0.0}, z_src, z_src, scheme};
    m.load_mw = load_mw;

    Phasor i_load{0.0, 0.0};
    if (load_mw > 0.0) i_load = Phasor{v_pk, 0.0} / m.load_resistance();
    const Phasor e_local =
        Phasor{v_pk, 0.0} + i_load * (z_src + m.line.length_km * m.line.z1_per_km);
    m.src_local = {e_local, z_src, z_src, scheme};
    return m;
}

}  // namespace faultloc
