#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "faultloc/gridsim.hpp"
#include "support/nodal_oracle.hpp"

using namespace faultloc;
using Complex = std::complex<double>;

namespace {

double rel_err(Complex got, Complex want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-30);
}

SystemModel radial_model(const GroundingScheme& scheme) {
    // remote machine effectively absent: huge source impedance, no earth path
    SystemModel m = default_system(scheme, 0.0);
    m.src_remote.z1_src = {1e12, 1e12};
    m.src_remote.z0_src = {1e12, 1e12};
    m.src_remote.grounding = GroundingScheme::ungrounded();
    return m;
}

}  // namespace

TEST_CASE("fortescue round trip is identity") {
    std::mt19937_64 rng(42);
    auto draw = [&] { return Complex(std::uniform_real_distribution<>(-1e3, 1e3)(rng),
                                     std::uniform_real_distribution<>(-1e3, 1e3)(rng)); };
    for (int k = 0; k < 50; ++k) {
        const ThreePhase p{draw(), draw(), draw()};
        const ThreePhase back = to_phase(to_sequence(p));
        const double scale = std::max({std::abs(p.a), std::abs(p.b), std::abs(p.c), 1.0});
        CHECK(std::abs(back.a - p.a) / scale < 1e-12);
        CHECK(std::abs(back.b - p.b) / scale < 1e-12);
        CHECK(std::abs(back.c - p.c) / scale < 1e-12);
    }
}

TEST_CASE("prefault: no-load bus sits at nominal voltage with zero current") {
    const auto model = default_system(GroundingScheme::solid(), 0.0);
    const auto state = prefault_state(model);
    CHECK(std::abs(state.ia) < 1e-6);
    CHECK(std::abs(state.ib) < 1e-6);
    CHECK(std::abs(state.ic) < 1e-6);
    CHECK(std::abs(state.va) == Catch::Approx(model.nominal_phase_peak()).epsilon(1e-12));
}

TEST_CASE("prefault: 25 MW load draws the P = sqrt(3) V I current through the relay") {
    const auto model = default_system(GroundingScheme::solid());
    const auto state = prefault_state(model);
    const double i_rms_expected = 25e6 / (std::sqrt(3.0) * 154e3);
    CHECK(std::abs(state.ia) / std::sqrt(2.0) == Catch::Approx(i_rms_expected).epsilon(1e-6));

    // balanced set carries no zero sequence
    CHECK(std::abs(state.i0) < 1e-9 * std::abs(state.ia));
    CHECK(std::abs(state.vb - kAlpha2 * state.va) < 1e-9 * std::abs(state.va));
    CHECK(std::abs(state.vc - kAlpha * state.va) < 1e-9 * std::abs(state.va));
}

TEST_CASE("sequence thevenin: radial line reduces to the single path") {
    const auto model = radial_model(GroundingScheme::solid());
    const auto thev = sequence_thevenin(model, 100.0);
    const Complex expected = model.src_local.z1_src + 100.0 * model.line.z1_per_km;
    CHECK(rel_err(thev.z1, expected) < 1e-9);
    CHECK(rel_err(thev.d1, 1.0) < 1e-9);
}

TEST_CASE("sequence thevenin: symmetric sources split the midpoint fault evenly") {
    const auto model = default_system(GroundingScheme::solid(), 0.0);
    const auto thev = sequence_thevenin(model, model.line.length_km / 2.0);
    CHECK(rel_err(thev.d1, 0.5) < 1e-9);

    // without charging, the zero-sequence division is symmetric too
    auto no_cap = model;
    no_cap.line.c0_per_km = 0.0;
    CHECK(rel_err(sequence_thevenin(no_cap, 100.0).d0, 0.5) < 1e-9);
}

TEST_CASE("sequence thevenin: matches a brute-force nodal reduction") {
    const auto model = default_system(GroundingScheme::impedance(5.0));
    const double d = 73.0;
    const auto thev = sequence_thevenin(model, d);

    // independent reduction: assemble the three-node admittance matrix and
    // extract column F of its inverse
    auto reduce = [&](bool zero_seq) {
        const Complex z_km = zero_seq ? model.line.z0_per_km : model.line.z1_per_km;
        const double rem = model.line.length_km - d;
        std::vector<std::vector<Complex>> y(3, std::vector<Complex>(3));
        auto series = [&](int i, int j, Complex adm) {
            y[i][i] += adm;
            y[j][j] += adm;
            y[i][j] -= adm;
            y[j][i] -= adm;
        };
        const Complex y_lf = 1.0 / (d * z_km);
        series(0, 1, y_lf);
        series(1, 2, 1.0 / (rem * z_km));
        if (zero_seq) {
            const Complex zsrc0 = model.src_local.z0_src + 3.0 * model.src_local.grounding.rn_ohm;
            y[0][0] += 1.0 / zsrc0;
            y[2][2] += 1.0 / zsrc0;
            const Complex jw{0.0, model.omega()};
            y[0][0] += jw * (d * model.line.c0_per_km / 2.0);
            y[1][1] += jw * ((d + rem) * model.line.c0_per_km / 2.0);
            y[2][2] += jw * (rem * model.line.c0_per_km / 2.0);
        } else {
            y[0][0] += 1.0 / model.src_local.z1_src;
            y[2][2] += 1.0 / model.src_remote.z1_src;
            y[2][2] += 1.0 / Complex{model.load_resistance(), 0.0};
        }
        std::vector<Complex> rhs{0.0, -1.0, 0.0};
        const auto v = oracle::gauss_solve(y, rhs);
        return std::pair{-v[1], (v[0] - v[1]) * y_lf};
    };

    const auto [z1, d1] = reduce(false);
    const auto [z0, d0] = reduce(true);
    CHECK(rel_err(thev.z1, z1) < 1e-10);
    CHECK(rel_err(thev.d1, d1) < 1e-10);
    CHECK(rel_err(thev.z0, z0) < 1e-10);
    CHECK(rel_err(thev.d0, d0) < 1e-10);
}

TEST_CASE("slg fault: solid bolted fault dwarfs the load current") {
    const auto model = default_system(GroundingScheme::solid());
    const auto pre = prefault_state(model);
    const auto during = solve_slg(model, {100.0, 0.0, 0.3, 0.05});
    CHECK(std::abs(during.ia) >= 5.0 * std::abs(pre.ia));
    CHECK(rel_err(during.i0, (during.ia + during.ib + during.ic) / 3.0) < 1e-9);
}

TEST_CASE("slg fault: ungrounded system shows the sqrt(3) healthy-phase rise and tiny residual") {
    const auto ung = default_system(GroundingScheme::ungrounded());
    const auto pre = prefault_state(ung);
    const auto during = solve_slg(ung, {100.0, 1.0, 0.3, 0.05});
    const double v_pre = std::abs(pre.va);
    const double target = std::sqrt(3.0) * v_pre;
    CHECK(std::abs(during.vb) == Catch::Approx(target).epsilon(0.10));
    CHECK(std::abs(during.vc) == Catch::Approx(target).epsilon(0.10));

    const auto solid = default_system(GroundingScheme::solid());
    const auto during_solid = solve_slg(solid, {100.0, 1.0, 0.3, 0.05});
    CHECK(std::abs(3.0 * during.i0) < 0.05 * std::abs(during_solid.ia));
}

TEST_CASE("slg fault: fault current ordering across grounding schemes") {
    for (double d : {5.0, 50.0, 100.0, 150.0, 200.0}) {
        const FaultSpec fault{d, 1.0, 0.3, 0.05};
        const double i_solid = std::abs(solve_slg(default_system(GroundingScheme::solid()), fault).ia);
        const double i_imp =
            std::abs(solve_slg(default_system(GroundingScheme::impedance(5.0)), fault).ia);
        const double i_ung =
            std::abs(solve_slg(default_system(GroundingScheme::ungrounded()), fault).ia);
        INFO("d = " << d << " km: solid " << i_solid << ", imp " << i_imp << ", ung " << i_ung);
        CHECK(i_solid > i_imp);
        CHECK(i_imp > i_ung);
    }
}

TEST_CASE("slg fault: ungrounded overvoltage factor stays near sqrt(3)") {
    const auto model = default_system(GroundingScheme::ungrounded());
    const double v_pre = std::abs(prefault_state(model).va);
    for (double d : {5.0, 50.0, 100.0, 150.0, 200.0}) {
        const auto during = solve_slg(model, {d, 1.0, 0.3, 0.05});
        const double factor = std::max(std::abs(during.vb), std::abs(during.vc)) / v_pre;
        INFO("d = " << d << " km, factor = " << factor);
        CHECK(factor >= 1.55);
        CHECK(factor <= 1.9);
    }
}

TEST_CASE("slg fault: solid grounding keeps healthy-phase voltages") {
    const auto model = default_system(GroundingScheme::solid());
    const auto pre = prefault_state(model);
    for (double d : {5.0, 50.0, 100.0, 150.0, 200.0}) {
        const auto during = solve_slg(model, {d, 1.0, 0.3, 0.05});
        CHECK(std::abs(during.vb) == Catch::Approx(std::abs(pre.vb)).epsilon(0.05));
        CHECK(std::abs(during.vc) == Catch::Approx(std::abs(pre.vc)).epsilon(0.05));
    }
}

TEST_CASE("slg fault: matches the one-shot phase-domain nodal solve") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<> dist_km(15.0, 185.0);
    std::uniform_real_distribution<> dist_rf(0.5, 10.0);
    const GroundingScheme schemes[3] = {GroundingScheme::ungrounded(), GroundingScheme::solid(),
                                        GroundingScheme::impedance(5.0)};
    for (int k = 0; k < 5; ++k) {
        const auto scheme = schemes[k % 3];
        const double load = k % 2 == 0 ? 25.0 : 0.0;
        const auto model = default_system(scheme, load);
        const FaultSpec fault{dist_km(rng), dist_rf(rng), 0.3, 0.05};

        const auto got = solve_slg(model, fault);
        const auto want = oracle::solve_slg_phase_domain(model, fault).relay;

        INFO("scheme " << scheme.name() << ", d " << fault.distance_km << " km, rf "
                       << fault.rf_ohm << ", load " << load);
        CHECK(rel_err(got.va, want.va) < 1e-6);
        CHECK(rel_err(got.vb, want.vb) < 1e-6);
        CHECK(rel_err(got.vc, want.vc) < 1e-6);
        CHECK(rel_err(got.ia, want.ia) < 1e-6);
        CHECK(rel_err(got.ib, want.ib) < 1e-6);
        CHECK(rel_err(got.ic, want.ic) < 1e-6);
    }
}

TEST_CASE("slg fault: ungrounded network without capacitance is singular") {
    auto model = default_system(GroundingScheme::ungrounded());
    model.line.c0_per_km = 0.0;
    CHECK_THROWS_WITH(solve_slg(model, {100.0, 1.0, 0.3, 0.05}),
                      Catch::Matchers::ContainsSubstring("zero-sequence"));
}

TEST_CASE("model validation rejects out-of-range faults") {
    const auto model = default_system(GroundingScheme::solid());
    CHECK_THROWS_AS(solve_slg(model, {250.0, 1.0, 0.3, 0.05}), std::invalid_argument);
    CHECK_THROWS_AS(solve_slg(model, {0.0, 1.0, 0.3, 0.05}), std::invalid_argument);
    CHECK_THROWS_AS(solve_slg(model, {100.0, -1.0, 0.3, 0.05}), std::invalid_argument);
}
