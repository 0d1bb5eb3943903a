#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "faultloc/gridsim.hpp"
#include "faultloc/phasor.hpp"

namespace faultloc {

/// Sampled relay input channels. fs must be an integer multiple of the
/// nominal frequency so a full-cycle window has an exact sample count.
struct SampleRecord {
    double fs_hz = 0.0;
    double t0_s = 0.0;  // time of the first sample
    std::vector<double> va, vb, vc, ia, ib, ic;

    std::size_t size() const { return va.size(); }
    double time_at(std::size_t i) const { return t0_s + static_cast<double>(i) / fs_hz; }
};

struct ImpedanceLocus {
    struct Point {
        double r = 0.0;  // ohm
        double x = 0.0;  // ohm
        double t = 0.0;  // s, end of the estimating window
    };
    std::vector<Point> points;
};

inline std::size_t samples_per_cycle(double f0_hz, double fs_hz) {
    const double ratio = fs_hz / f0_hz;
    const double rounded = std::round(ratio);
    if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9)
        throw std::invalid_argument("fs must be an integer multiple of f0");
    return static_cast<std::size_t>(rounded);
}

/// Instantaneous waveforms from the pre/during phasor pair. The record spans
/// [t_on - 2 cycles, t_on + duration]. When dc_offset is set, each current
/// channel carries a decaying exponential chosen for continuity at t_on, with
/// the time constant taken from the relay-seen phase-A fault loop.
inline SampleRecord synthesize_waveforms(const TerminalState& pre, const TerminalState& during,
                                         const FaultSpec& fault, double f0_hz, double fs_hz,
                                         bool dc_offset) {
    if (!(fs_hz >= 16.0 * f0_hz)) throw std::invalid_argument("synthesize: fs below 16*f0");
    if (!(fault.duration_s * f0_hz >= 1.0 - 1e-9))
        throw std::invalid_argument("synthesize: fault shorter than one cycle");
    samples_per_cycle(f0_hz, fs_hz);

    const double omega = 2.0 * std::numbers::pi * f0_hz;
    const double t_start = fault.t_on_s - 2.0 / f0_hz;
    const std::size_t n = static_cast<std::size_t>(
                              std::llround((2.0 / f0_hz + fault.duration_s) * fs_hz)) +
                          1;

    // Loop impedance estimate for the dc decay: line-plus-fault side from the
    // during-fault ratio, source side from the pre/during deltas. The upper
    // clamp of half a cycle keeps the residual dc in the final full-cycle
    // window small enough that locus endpoints stay put.
    double tau = 1.0 / f0_hz;
    if (std::abs(during.ia) > 1e-12) {
        std::complex<double> z_loop = during.va / during.ia;
        const Phasor delta_i = during.ia - pre.ia;
        if (std::abs(delta_i) > 1e-12) z_loop += (pre.va - during.va) / delta_i;
        if (z_loop.real() > 0.0 && z_loop.imag() > 0.0) {
            tau = std::clamp(z_loop.imag() / (omega * z_loop.real()), 1e-4, 0.5 / f0_hz);
        }
    }

    auto instant = [&](Phasor x, double t) { return std::real(x * std::polar(1.0, omega * t)); };

    SampleRecord rec;
    rec.fs_hz = fs_hz;
    rec.t0_s = t_start;
    for (auto* ch : {&rec.va, &rec.vb, &rec.vc, &rec.ia, &rec.ib, &rec.ic}) ch->resize(n);

    const Phasor pre_ch[6] = {pre.va, pre.vb, pre.vc, pre.ia, pre.ib, pre.ic};
    const Phasor dur_ch[6] = {during.va, during.vb, during.vc, during.ia, during.ib, during.ic};
    std::vector<double>* out[6] = {&rec.va, &rec.vb, &rec.vc, &rec.ia, &rec.ib, &rec.ic};

    for (int ch = 0; ch < 6; ++ch) {
        const bool is_current = ch >= 3;
        const double dc_amp = (dc_offset && is_current)
                                  ? instant(pre_ch[ch], fault.t_on_s) - instant(dur_ch[ch], fault.t_on_s)
                                  : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = t_start + static_cast<double>(i) / fs_hz;
            if (t < fault.t_on_s) {
                (*out[ch])[i] = instant(pre_ch[ch], t);
            } else {
                (*out[ch])[i] = instant(dur_ch[ch], t) + dc_amp * std::exp(-(t - fault.t_on_s) / tau);
            }
        }
    }
    return rec;
}

/// Fundamental phasor of one full cycle, peak convention, phase referenced to
/// the first sample of the window. Exact for pure sinusoids at f0; rejects a
/// constant offset exactly.
inline Phasor fullcycle_dft(std::span<const double> window, double f0_hz, double fs_hz) {
    const std::size_t n = samples_per_cycle(f0_hz, fs_hz);
    if (window.size() != n) throw std::invalid_argument("fullcycle_dft: window must be one cycle");
    const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        acc += window[k] * std::polar(1.0, -step * static_cast<double>(k));
    }
    return acc * (2.0 / static_cast<double>(n));
}

/// Ground-loop compensation factor k0 = (z0 - z1) / (3 z1).
inline std::complex<double> k0_factor(std::complex<double> z1_per_km,
                                      std::complex<double> z0_per_km) {
    if (z1_per_km == std::complex<double>{}) throw std::invalid_argument("k0_factor: z1 is zero");
    return (z0_per_km - z1_per_km) / (3.0 * z1_per_km);
}

/// Compensated ground-loop impedance Z = va / (ia + k0 * 3 * i0), or nullopt
/// when the compensated current is below the floor (relay minimum pickup).
inline std::optional<std::complex<double>> apparent_impedance(Phasor va, Phasor ia, Phasor i0,
                                                              std::complex<double> k0,
                                                              double current_floor = 1.0) {
    const Phasor i_comp = ia + k0 * 3.0 * i0;
    if (std::abs(i_comp) <= current_floor) return std::nullopt;
    return va / i_comp;
}

struct LocusOptions {
    double current_floor = 1.0;  // amps, peak
};

/// Slides a one-cycle window one sample at a time and emits the compensated
/// apparent impedance for every window above the current floor.
inline ImpedanceLocus compute_locus(const SampleRecord& rec, const SequenceLineParams& line,
                                    double f0_hz, const LocusOptions& opts = {}) {
    const std::size_t n = samples_per_cycle(f0_hz, rec.fs_hz);
    if (rec.size() < 3 * n) throw std::invalid_argument("compute_locus: record shorter than 3 cycles");

    const std::complex<double> k0 = k0_factor(line.z1_per_km, line.z0_per_km);

    std::vector<double> i_zero(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i)
        i_zero[i] = (rec.ia[i] + rec.ib[i] + rec.ic[i]) / 3.0;

    ImpedanceLocus locus;
    const std::size_t windows = rec.size() - n + 1;
    locus.points.reserve(windows);
    for (std::size_t s = 0; s < windows; ++s) {
        const Phasor va = fullcycle_dft({rec.va.data() + s, n}, f0_hz, rec.fs_hz);
        const Phasor ia = fullcycle_dft({rec.ia.data() + s, n}, f0_hz, rec.fs_hz);
        const Phasor i0 = fullcycle_dft({i_zero.data() + s, n}, f0_hz, rec.fs_hz);
        const auto z = apparent_impedance(va, ia, i0, k0, opts.current_floor);
        if (!z) continue;
        locus.points.push_back({z->real(), z->imag(), rec.time_at(s + n - 1)});
    }
    if (locus.points.empty()) throw std::runtime_error("compute_locus: no window above current floor");
    return locus;
}

}  // namespace faultloc
