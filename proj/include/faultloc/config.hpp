#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "faultloc/features.hpp"
#include "faultloc/gridsim.hpp"
#include "faultloc/raster.hpp"

namespace faultloc {

/// Everything `generate` needs, with defaults describing the 154 kV, 50 Hz,
/// 200 km two-source study case. Loaded from a JSON document where any
/// subset of keys may be overridden.
struct PipelineConfig {
    struct System {
        double f0_hz = 50.0;
        double v_ll_kv = 154.0;
        double length_km = 200.0;
        std::complex<double> z1_per_km{0.05, 0.45};
        std::complex<double> z0_per_km{0.25, 1.35};
        double c1_nf_per_km = 9.0;
        double c0_nf_per_km = 5.5;
        double load_mw = 25.0;
        double scc_mva = 2000.0;
        double x_over_r = 10.0;
        double rn_ohm = 5.0;  // neutral resistor for the impedance scheme
    } system;

    struct Fault {
        double rf_ohm = 1.0;
        double t_on_s = 0.3;
        double duration_s = 0.05;
    } fault;

    struct Signal {
        double fs_hz = 3200.0;
        bool dc_offset = true;
    } signal;

    struct Raster {
        Viewport viewport{-50.0, 150.0, -50.0, 150.0};
        int intensity_step = 16;
        bool zone_overlay = false;
        double zone_reach_fraction = 0.8;
    } raster;

    struct Dataset {
        double distance_start_km = 5.0;
        double distance_step_km = 5.0;
        int distance_count = 40;
        double train_max_km = 170.0;  // larger distances form the test split
        std::vector<std::string> schemes = {"ungrounded", "solid", "impedance"};
    } dataset;

    ReductionMode reduction = ReductionMode::per_column();
    NormalizationSpec normalization{5.0, 200.0};

    GroundingScheme scheme_by_name(const std::string& name) const {
        if (name == "ungrounded") return GroundingScheme::ungrounded();
        if (name == "solid") return GroundingScheme::solid();
        if (name == "impedance") return GroundingScheme::impedance(system.rn_ohm);
        throw std::invalid_argument("config: unknown grounding scheme '" + name + "'");
    }

    /// System model for one grounding scheme; both line ends share it.
    SystemModel build_model(const std::string& scheme_name) const {
        const GroundingScheme scheme = scheme_by_name(scheme_name);
        SystemModel m;
        m.f0_hz = system.f0_hz;
        m.line = {system.z1_per_km, system.z0_per_km, system.c1_nf_per_km * 1e-9,
                  system.c0_nf_per_km * 1e-9, system.length_km};
        const double v_ll = system.v_ll_kv * 1e3;
        const double v_pk = v_ll * std::sqrt(2.0 / 3.0);
        const double z_mag = v_ll * v_ll / (system.scc_mva * 1e6);
        const std::complex<double> z_src = z_mag * std::complex<double>(1.0, system.x_over_r) /
                                           std::sqrt(1.0 + system.x_over_r * system.x_over_r);
        m.src_remote = {Phasor{v_pk, 0.0}, z_src, z_src, scheme};
        m.load_mw = system.load_mw;
        Phasor i_load{0.0, 0.0};
        if (system.load_mw > 0.0) i_load = Phasor{v_pk, 0.0} / m.load_resistance();
        m.src_local = {Phasor{v_pk, 0.0} + i_load * (z_src + m.line.length_km * m.line.z1_per_km),
                       z_src, z_src, scheme};
        return m;
    }

    std::vector<double> distances() const {
        std::vector<double> d(dataset.distance_count);
        for (int i = 0; i < dataset.distance_count; ++i)
            d[i] = dataset.distance_start_km + i * dataset.distance_step_km;
        return d;
    }

    double nominal_load_current_peak() const {
        const double v_pk = system.v_ll_kv * 1e3 * std::sqrt(2.0 / 3.0);
        if (system.load_mw <= 0.0) return 100.0;  // floor reference when unloaded
        return system.load_mw * 1e6 / (1.5 * v_pk);
    }
};

namespace detail {

inline nlohmann::json complex_to_json(const std::complex<double>& z) {
    return {{"re", z.real()}, {"im", z.imag()}};
}

inline std::complex<double> complex_from_json(const nlohmann::json& j, std::complex<double> fallback) {
    if (j.is_null()) return fallback;
    return {j.value("re", fallback.real()), j.value("im", fallback.imag())};
}

}  // namespace detail

inline nlohmann::json to_json(const PipelineConfig& c) {
    nlohmann::json j;
    j["system"] = {{"f0_hz", c.system.f0_hz},
                   {"v_ll_kv", c.system.v_ll_kv},
                   {"length_km", c.system.length_km},
                   {"z1_per_km", detail::complex_to_json(c.system.z1_per_km)},
                   {"z0_per_km", detail::complex_to_json(c.system.z0_per_km)},
                   {"c1_nf_per_km", c.system.c1_nf_per_km},
                   {"c0_nf_per_km", c.system.c0_nf_per_km},
                   {"load_mw", c.system.load_mw},
                   {"scc_mva", c.system.scc_mva},
                   {"x_over_r", c.system.x_over_r},
                   {"rn_ohm", c.system.rn_ohm}};
    j["fault"] = {{"rf_ohm", c.fault.rf_ohm},
                  {"t_on_s", c.fault.t_on_s},
                  {"duration_s", c.fault.duration_s}};
    j["signal"] = {{"fs_hz", c.signal.fs_hz}, {"dc_offset", c.signal.dc_offset}};
    j["raster"] = {{"r_min", c.raster.viewport.r_min},
                   {"r_max", c.raster.viewport.r_max},
                   {"x_min", c.raster.viewport.x_min},
                   {"x_max", c.raster.viewport.x_max},
                   {"intensity_step", c.raster.intensity_step},
                   {"zone_overlay", c.raster.zone_overlay},
                   {"zone_reach_fraction", c.raster.zone_reach_fraction}};
    j["dataset"] = {{"distance_start_km", c.dataset.distance_start_km},
                    {"distance_step_km", c.dataset.distance_step_km},
                    {"distance_count", c.dataset.distance_count},
                    {"train_max_km", c.dataset.train_max_km},
                    {"schemes", c.dataset.schemes}};
    j["reduction"] = c.reduction.name();
    j["normalization"] = {{"x_min", c.normalization.x_min}, {"x_max", c.normalization.x_max}};
    return j;
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig c;
    if (j.contains("system")) {
        const auto& s = j["system"];
        c.system.f0_hz = s.value("f0_hz", c.system.f0_hz);
        c.system.v_ll_kv = s.value("v_ll_kv", c.system.v_ll_kv);
        c.system.length_km = s.value("length_km", c.system.length_km);
        c.system.z1_per_km = detail::complex_from_json(s.value("z1_per_km", nlohmann::json()), c.system.z1_per_km);
        c.system.z0_per_km = detail::complex_from_json(s.value("z0_per_km", nlohmann::json()), c.system.z0_per_km);
        c.system.c1_nf_per_km = s.value("c1_nf_per_km", c.system.c1_nf_per_km);
        c.system.c0_nf_per_km = s.value("c0_nf_per_km", c.system.c0_nf_per_km);
        c.system.load_mw = s.value("load_mw", c.system.load_mw);
        c.system.scc_mva = s.value("scc_mva", c.system.scc_mva);
        c.system.x_over_r = s.value("x_over_r", c.system.x_over_r);
        c.system.rn_ohm = s.value("rn_ohm", c.system.rn_ohm);
    }
    if (j.contains("fault")) {
        const auto& f = j["fault"];
        c.fault.rf_ohm = f.value("rf_ohm", c.fault.rf_ohm);
        c.fault.t_on_s = f.value("t_on_s", c.fault.t_on_s);
        c.fault.duration_s = f.value("duration_s", c.fault.duration_s);
    }
    if (j.contains("signal")) {
        const auto& s = j["signal"];
        c.signal.fs_hz = s.value("fs_hz", c.signal.fs_hz);
        c.signal.dc_offset = s.value("dc_offset", c.signal.dc_offset);
    }
    if (j.contains("raster")) {
        const auto& r = j["raster"];
        c.raster.viewport.r_min = r.value("r_min", c.raster.viewport.r_min);
        c.raster.viewport.r_max = r.value("r_max", c.raster.viewport.r_max);
        c.raster.viewport.x_min = r.value("x_min", c.raster.viewport.x_min);
        c.raster.viewport.x_max = r.value("x_max", c.raster.viewport.x_max);
        c.raster.intensity_step = r.value("intensity_step", c.raster.intensity_step);
        c.raster.zone_overlay = r.value("zone_overlay", c.raster.zone_overlay);
        c.raster.zone_reach_fraction = r.value("zone_reach_fraction", c.raster.zone_reach_fraction);
    }
    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        c.dataset.distance_start_km = d.value("distance_start_km", c.dataset.distance_start_km);
        c.dataset.distance_step_km = d.value("distance_step_km", c.dataset.distance_step_km);
        c.dataset.distance_count = d.value("distance_count", c.dataset.distance_count);
        c.dataset.train_max_km = d.value("train_max_km", c.dataset.train_max_km);
        if (d.contains("schemes")) c.dataset.schemes = d["schemes"].get<std::vector<std::string>>();
    }
    if (j.contains("reduction")) c.reduction = ReductionMode::parse(j["reduction"].get<std::string>());
    if (j.contains("normalization")) {
        c.normalization.x_min = j["normalization"].value("x_min", c.normalization.x_min);
        c.normalization.x_max = j["normalization"].value("x_max", c.normalization.x_max);
    }
    return c;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    f >> j;
    return config_from_json(j);
}

/// FNV-1a over the canonical JSON dump; embedded in every derived artifact so
/// train/eval refuse mismatched datasets.
inline std::string config_hash(const PipelineConfig& c) {
    const std::string s = to_json(c).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace faultloc
