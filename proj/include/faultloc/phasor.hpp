#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace faultloc {

/// Peak-amplitude phasor: x(t) = Re(X * exp(j*omega*t)).
/// Impedance ratios are convention-invariant; the peak convention fixes
/// waveform synthesis unambiguously.
using Phasor = std::complex<double>;

inline Phasor polar_deg(double magnitude, double degrees) {
    return std::polar(magnitude, degrees * std::numbers::pi / 180.0);
}

/// Rotation operator a = 1∠120°.
inline const Phasor kAlpha{-0.5, std::sqrt(3.0) / 2.0};
inline const Phasor kAlpha2{-0.5, -std::sqrt(3.0) / 2.0};

struct ThreePhase {
    Phasor a, b, c;
};

struct SequenceSet {
    Phasor zero, pos, neg;
};

inline SequenceSet to_sequence(const ThreePhase& p) {
    return {(p.a + p.b + p.c) / 3.0,
            (p.a + kAlpha * p.b + kAlpha2 * p.c) / 3.0,
            (p.a + kAlpha2 * p.b + kAlpha * p.c) / 3.0};
}

inline ThreePhase to_phase(const SequenceSet& s) {
    return {s.zero + s.pos + s.neg,
            s.zero + kAlpha2 * s.pos + kAlpha * s.neg,
            s.zero + kAlpha * s.pos + kAlpha2 * s.neg};
}

/// Balanced positive-sequence set built from the phase-A phasor.
inline ThreePhase balanced_from_a(Phasor a_phase) {
    return {a_phase, kAlpha2 * a_phase, kAlpha * a_phase};
}

}  // namespace faultloc
