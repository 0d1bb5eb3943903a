#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "faultloc/config.hpp"
#include "faultloc/features.hpp"
#include "faultloc/gridsim.hpp"
#include "faultloc/neuralnet.hpp"
#include "faultloc/raster.hpp"
#include "faultloc/relaydsp.hpp"
#include "faultloc/svr.hpp"
#include "faultloc/trainers.hpp"

namespace faultloc {

// ---------------------------------------------------------------------------
// metrics

inline double percent_error(double actual_km, double predicted_km, double denom_km) {
    if (!(denom_km > 0.0)) throw std::invalid_argument("percent_error: denominator must be > 0");
    return std::abs(actual_km - predicted_km) / denom_km * 100.0;
}

/// Mean squared error computed on dminmax-normalized values of both series.
inline double mse_normalized(const std::vector<double>& actuals_km,
                             const std::vector<double>& predictions_km,
                             const NormalizationSpec& spec) {
    if (actuals_km.empty() || actuals_km.size() != predictions_km.size())
        throw std::invalid_argument("mse_normalized: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < actuals_km.size(); ++i) {
        const double d = dminmax(actuals_km[i], spec) - dminmax(predictions_km[i], spec);
        s += d * d;
    }
    return s / static_cast<double>(actuals_km.size());
}

// ---------------------------------------------------------------------------
// manifest

struct ScenarioEntry {
    std::string scheme;
    double distance_km = 0.0;
    double rf_ohm = 0.0;
    std::string image;  // relative to the dataset directory
    int feature_row = 0;
    bool is_train = true;
};

struct DatasetManifest {
    int version = 1;
    std::string config_hash;
    ReductionMode reduction;
    NormalizationSpec normalization;
    std::map<std::string, std::string> features_csv;  // scheme -> relative path
    std::vector<ScenarioEntry> scenarios;

    std::vector<const ScenarioEntry*> scheme_rows(const std::string& scheme) const {
        std::vector<const ScenarioEntry*> out;
        for (const auto& s : scenarios)
            if (s.scheme == scheme) out.push_back(&s);
        return out;
    }
};

namespace detail {

inline std::string format_num(double v, const char* fmt = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

inline std::string format_km(double km) { return format_num(km, "%g"); }

}  // namespace detail

inline nlohmann::json to_json(const DatasetManifest& m) {
    nlohmann::json j;
    j["version"] = m.version;
    j["config_hash"] = m.config_hash;
    j["reduction"] = m.reduction.name();
    j["normalization"] = {{"x_min", m.normalization.x_min}, {"x_max", m.normalization.x_max}};
    j["features_csv"] = m.features_csv;
    auto& arr = j["scenarios"] = nlohmann::json::array();
    for (const auto& s : m.scenarios) {
        arr.push_back({{"scheme", s.scheme},
                       {"distance_km", s.distance_km},
                       {"rf_ohm", s.rf_ohm},
                       {"image", s.image},
                       {"feature_row", s.feature_row},
                       {"split", s.is_train ? "train" : "test"}});
    }
    return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
    DatasetManifest m;
    m.version = j.value("version", 1);
    m.config_hash = j.at("config_hash").get<std::string>();
    m.reduction = ReductionMode::parse(j.at("reduction").get<std::string>());
    m.normalization.x_min = j.at("normalization").at("x_min").get<double>();
    m.normalization.x_max = j.at("normalization").at("x_max").get<double>();
    m.features_csv = j.at("features_csv").get<std::map<std::string, std::string>>();
    for (const auto& e : j.at("scenarios")) {
        ScenarioEntry s;
        s.scheme = e.at("scheme").get<std::string>();
        s.distance_km = e.at("distance_km").get<double>();
        s.rf_ohm = e.at("rf_ohm").get<double>();
        s.image = e.at("image").get<std::string>();
        s.feature_row = e.at("feature_row").get<int>();
        s.is_train = e.at("split").get<std::string>() == "train";
        m.scenarios.push_back(std::move(s));
    }
    return m;
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("manifest: cannot write " + path.string());
    f << to_json(m).dump(2) << "\n";
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("manifest: cannot open " + path.string());
    nlohmann::json j;
    f >> j;
    return manifest_from_json(j);
}

// ---------------------------------------------------------------------------
// feature CSV

inline void save_features_csv(const std::filesystem::path& path,
                              const std::vector<std::vector<double>>& rows,
                              const ReductionMode& mode) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("features: cannot write " + path.string());
    const std::size_t dim = rows.empty() ? 0 : rows[0].size();
    f << "mode=" << mode.name() << ",dim=" << dim << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) f << ',';
            f << detail::format_num(row[i]);
        }
        f << "\n";
    }
}

inline std::vector<std::vector<double>> load_features_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("features: cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line) || line.rfind("mode=", 0) != 0)
        throw std::runtime_error("features: missing layout header in " + path.string());
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            row.push_back(std::stod(cell));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// generate

/// Runs gridsim -> relaydsp -> raster -> features for every scheme x distance
/// and writes images, per-scheme feature CSVs and the manifest. Fully
/// deterministic for a given config.
inline DatasetManifest generate(const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                                bool dump_locus = false) {
    namespace fs = std::filesystem;
    const auto distances = cfg.distances();
    for (double d : distances)
        if (d > cfg.system.length_km)
            throw std::invalid_argument("generate: distance " + detail::format_km(d) +
                                        " km exceeds line length");

    fs::create_directories(out_dir / "images");
    if (dump_locus) fs::create_directories(out_dir / "loci");

    DatasetManifest manifest;
    manifest.config_hash = config_hash(cfg);
    manifest.reduction = cfg.reduction;
    manifest.normalization = cfg.normalization;

    const RasterOptions raster_opts = [&] {
        RasterOptions o;
        o.intensity_step = cfg.raster.intensity_step;
        o.zone_overlay = cfg.raster.zone_overlay;
        const std::complex<double> z_line = cfg.system.length_km * cfg.system.z1_per_km;
        o.zone_reach_ohm = cfg.raster.zone_reach_fraction * std::abs(z_line);
        o.zone_angle_rad = std::arg(z_line);
        return o;
    }();
    LocusOptions locus_opts;
    locus_opts.current_floor = 0.01 * cfg.nominal_load_current_peak();

    for (const auto& scheme : cfg.dataset.schemes) {
        const SystemModel model = cfg.build_model(scheme);
        const TerminalState pre = prefault_state(model);
        std::vector<std::vector<double>> feature_rows;
        int row_index = 0;
        for (double d : distances) {
            const std::string tag = scheme + "@" + detail::format_km(d) + "km";
            try {
                const FaultSpec fault{d, cfg.fault.rf_ohm, cfg.fault.t_on_s, cfg.fault.duration_s};
                const TerminalState during = solve_slg(model, fault);
                const SampleRecord rec = synthesize_waveforms(pre, during, fault, cfg.system.f0_hz,
                                                              cfg.signal.fs_hz, cfg.signal.dc_offset);
                const ImpedanceLocus locus = compute_locus(rec, model.line, cfg.system.f0_hz, locus_opts);
                const RasterImage img = rasterize(locus, cfg.raster.viewport, raster_opts);

                const std::string image_rel = "images/" + scheme + "_" + detail::format_km(d) + ".pgm";
                write_pgm(img, (out_dir / image_rel).string());
                if (dump_locus) {
                    std::ofstream lf(out_dir / "loci" / (scheme + "_" + detail::format_km(d) + ".csv"));
                    lf << "t,r,x\n";
                    for (const auto& p : locus.points)
                        lf << detail::format_num(p.t) << ',' << detail::format_num(p.r) << ','
                           << detail::format_num(p.x) << "\n";
                }

                feature_rows.push_back(reduce(normalize_pixels(img), cfg.reduction).values);
                manifest.scenarios.push_back({scheme, d, cfg.fault.rf_ohm, image_rel, row_index,
                                              d <= cfg.dataset.train_max_km});
                ++row_index;
            } catch (const std::exception& e) {
                throw std::runtime_error("scenario " + tag + ": " + e.what());
            }
        }
        const std::string csv_rel = "features_" + scheme + ".csv";
        save_features_csv(out_dir / csv_rel, feature_rows, cfg.reduction);
        manifest.features_csv[scheme] = csv_rel;
    }
    save_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

// ---------------------------------------------------------------------------
// model files

struct LoadedDataset {
    std::vector<std::vector<double>> train_x, test_x;
    std::vector<double> train_actual_km, test_actual_km;
    std::vector<int> train_rows, test_rows;
};

inline LoadedDataset load_scheme_dataset(const DatasetManifest& manifest,
                                         const std::filesystem::path& out_dir,
                                         const std::string& scheme) {
    const auto it = manifest.features_csv.find(scheme);
    if (it == manifest.features_csv.end())
        throw std::runtime_error("dataset: scheme '" + scheme + "' not in manifest");
    const auto rows = load_features_csv(out_dir / it->second);
    LoadedDataset ds;
    for (const auto* s : manifest.scheme_rows(scheme)) {
        if (s->feature_row < 0 || s->feature_row >= static_cast<int>(rows.size()))
            throw std::runtime_error("dataset: feature row out of range");
        if (s->is_train) {
            ds.train_x.push_back(rows[s->feature_row]);
            ds.train_actual_km.push_back(s->distance_km);
            ds.train_rows.push_back(s->feature_row);
        } else {
            ds.test_x.push_back(rows[s->feature_row]);
            ds.test_actual_km.push_back(s->distance_km);
            ds.test_rows.push_back(s->feature_row);
        }
    }
    if (ds.train_x.empty() || ds.test_x.empty())
        throw std::runtime_error("dataset: missing train or test rows for scheme " + scheme);
    return ds;
}

struct ModelFile {
    int version = 1;
    std::string kind;  // "ann" or "svr"
    std::string scheme;
    std::string config_hash;
    std::string reduction;
    NormalizationSpec normalization;
    Standardizer standardizer;
    std::vector<int> train_rows;

    // ann
    CascadeNet net;
    TrainConfig train_cfg;
    double final_train_mse = 0.0;
    std::string stop_reason;
    int epochs = 0;

    // svr
    SvrModel svr;
    double svr_cv_mse = 0.0;

    std::string descriptor() const {
        return kind == "ann" ? "ann_" + algorithm_name(train_cfg.algorithm) : "svr";
    }
};

inline nlohmann::json to_json(const ModelFile& m) {
    nlohmann::json j;
    j["version"] = m.version;
    j["kind"] = m.kind;
    j["scheme"] = m.scheme;
    j["config_hash"] = m.config_hash;
    j["reduction"] = m.reduction;
    j["normalization"] = {{"x_min", m.normalization.x_min}, {"x_max", m.normalization.x_max}};
    j["standardizer"] = {{"mean", m.standardizer.mean}, {"scale", m.standardizer.scale}};
    j["train_rows"] = m.train_rows;
    if (m.kind == "ann") {
        j["topology"] = {{"input_dim", m.net.topology.input_dim},
                         {"hidden", m.net.topology.hidden},
                         {"output_dim", m.net.topology.output_dim},
                         {"cascade", m.net.topology.cascade}};
        // block order per layer: input, then each earlier hidden layer; row-major
        auto& layers = j["layers"] = nlohmann::json::array();
        for (int layer = 0; layer < m.net.topology.layer_count(); ++layer) {
            nlohmann::json lj;
            lj["blocks"] = m.net.blocks[layer];
            lj["bias"] = m.net.biases[layer];
            layers.push_back(std::move(lj));
        }
        j["train"] = {{"algorithm", algorithm_name(m.train_cfg.algorithm)},
                      {"max_epochs", m.train_cfg.max_epochs},
                      {"learning_rate", m.train_cfg.learning_rate},
                      {"goal_mse", m.train_cfg.goal_mse},
                      {"seed", m.train_cfg.seed}};
        j["final_train_mse"] = m.final_train_mse;
        j["stop_reason"] = m.stop_reason;
        j["epochs"] = m.epochs;
    } else {
        j["svr"] = {{"c", m.svr.c},
                    {"epsilon", m.svr.epsilon},
                    {"gamma", m.svr.gamma},
                    {"bias", m.svr.bias},
                    {"support_vectors", m.svr.support_vectors},
                    {"coefficients", m.svr.coefficients},
                    {"cv_mse", m.svr_cv_mse}};
    }
    return j;
}

inline ModelFile model_from_json(const nlohmann::json& j) {
    ModelFile m;
    m.version = j.value("version", 1);
    m.kind = j.at("kind").get<std::string>();
    m.scheme = j.at("scheme").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.reduction = j.at("reduction").get<std::string>();
    m.normalization.x_min = j.at("normalization").at("x_min").get<double>();
    m.normalization.x_max = j.at("normalization").at("x_max").get<double>();
    m.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    m.standardizer.scale = j.at("standardizer").at("scale").get<std::vector<double>>();
    m.train_rows = j.at("train_rows").get<std::vector<int>>();
    if (m.kind == "ann") {
        const auto& t = j.at("topology");
        m.net.topology.input_dim = t.at("input_dim").get<int>();
        m.net.topology.hidden = t.at("hidden").get<std::vector<int>>();
        m.net.topology.output_dim = t.at("output_dim").get<int>();
        m.net.topology.cascade = t.at("cascade").get<bool>();
        for (const auto& lj : j.at("layers")) {
            m.net.blocks.push_back(lj.at("blocks").get<std::vector<std::vector<double>>>());
            m.net.biases.push_back(lj.at("bias").get<std::vector<double>>());
        }
        m.train_cfg.algorithm = parse_algorithm(j.at("train").at("algorithm").get<std::string>());
        m.train_cfg.max_epochs = j.at("train").at("max_epochs").get<int>();
        m.train_cfg.learning_rate = j.at("train").at("learning_rate").get<double>();
        m.train_cfg.goal_mse = j.at("train").at("goal_mse").get<double>();
        m.train_cfg.seed = j.at("train").at("seed").get<std::uint64_t>();
        m.final_train_mse = j.at("final_train_mse").get<double>();
        m.stop_reason = j.value("stop_reason", "");
        m.epochs = j.value("epochs", 0);
    } else if (m.kind == "svr") {
        const auto& s = j.at("svr");
        m.svr.c = s.at("c").get<double>();
        m.svr.epsilon = s.at("epsilon").get<double>();
        m.svr.gamma = s.at("gamma").get<double>();
        m.svr.bias = s.at("bias").get<double>();
        m.svr.support_vectors = s.at("support_vectors").get<std::vector<std::vector<double>>>();
        m.svr.coefficients = s.at("coefficients").get<std::vector<double>>();
        m.svr_cv_mse = s.at("cv_mse").get<double>();
    } else {
        throw std::runtime_error("model: unknown kind '" + m.kind + "'");
    }
    return m;
}

inline void save_model(const ModelFile& m, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("model: cannot write " + path.string());
    f << to_json(m).dump(2) << "\n";
}

inline ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("model: cannot open " + path.string());
    nlohmann::json j;
    f >> j;
    return model_from_json(j);
}

// ---------------------------------------------------------------------------
// train

struct TrainOverrides {
    std::uint64_t seed = 1;
    int max_epochs = 1000;
    double goal_mse = 1e-5;
    double learning_rate = 0.9;
};

/// Trains one per-scheme cascade-forward model on the 34 train rows and
/// writes the model file plus a per-epoch training log.
inline std::filesystem::path train_ann(const std::filesystem::path& out_dir,
                                       const std::string& scheme, Algorithm algorithm,
                                       const TrainOverrides& ov = {}) {
    const auto manifest = load_manifest(out_dir / "manifest.json");
    const auto ds = load_scheme_dataset(manifest, out_dir, scheme);

    ModelFile m;
    m.kind = "ann";
    m.scheme = scheme;
    m.config_hash = manifest.config_hash;
    m.reduction = manifest.reduction.name();
    m.normalization = manifest.normalization;
    m.standardizer = Standardizer::fit(ds.train_x);
    m.train_rows = ds.train_rows;

    std::vector<std::vector<double>> x;
    x.reserve(ds.train_x.size());
    for (const auto& r : ds.train_x) x.push_back(m.standardizer.apply(r));
    std::vector<double> t;
    t.reserve(ds.train_actual_km.size());
    for (double km : ds.train_actual_km) t.push_back(dminmax(km, manifest.normalization));

    Topology topo;
    topo.input_dim = static_cast<int>(x[0].size());
    m.net = init_weights(topo, ov.seed);

    m.train_cfg.algorithm = algorithm;
    m.train_cfg.seed = ov.seed;
    m.train_cfg.max_epochs = ov.max_epochs;
    m.train_cfg.goal_mse = ov.goal_mse;
    m.train_cfg.learning_rate = ov.learning_rate;
    const TrainLog log = train(m.net, x, t, m.train_cfg);
    m.final_train_mse = log.final_mse;
    m.stop_reason = stop_reason_name(log.stop);
    m.epochs = static_cast<int>(log.epoch_mse.size());

    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "models");
    fs::create_directories(out_dir / "logs");
    const fs::path model_path =
        out_dir / "models" / ("ann_" + algorithm_name(algorithm) + "_" + scheme + ".json");
    save_model(m, model_path);

    std::ofstream lf(out_dir / "logs" /
                     ("train_ann_" + algorithm_name(algorithm) + "_" + scheme + ".csv"));
    lf << "epoch,mse\n";
    for (std::size_t i = 0; i < log.epoch_mse.size(); ++i)
        lf << i + 1 << ',' << detail::format_num(log.epoch_mse[i]) << "\n";
    return model_path;
}

/// Grid-searched epsilon-SVR baseline on the same rows and normalization.
inline std::filesystem::path train_svr_baseline(const std::filesystem::path& out_dir,
                                                const std::string& scheme,
                                                std::uint64_t seed = 1) {
    const auto manifest = load_manifest(out_dir / "manifest.json");
    const auto ds = load_scheme_dataset(manifest, out_dir, scheme);

    ModelFile m;
    m.kind = "svr";
    m.scheme = scheme;
    m.config_hash = manifest.config_hash;
    m.reduction = manifest.reduction.name();
    m.normalization = manifest.normalization;
    m.standardizer = Standardizer::fit(ds.train_x);
    m.train_rows = ds.train_rows;

    std::vector<std::vector<double>> x;
    for (const auto& r : ds.train_x) x.push_back(m.standardizer.apply(r));
    std::vector<double> t;
    for (double km : ds.train_actual_km) t.push_back(dminmax(km, manifest.normalization));

    const auto grid = grid_search_svr(x, t, seed);
    m.svr = grid.model;
    m.svr_cv_mse = grid.cv_mse;

    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "models");
    const fs::path model_path = out_dir / "models" / ("svr_" + scheme + ".json");
    save_model(m, model_path);
    return model_path;
}

// ---------------------------------------------------------------------------
// eval

struct EvalRow {
    double actual_km = 0.0;
    double predicted_km = 0.0;
    double pct_error = 0.0;
};

struct EvalReport {
    std::string scheme;
    std::string model_desc;
    std::string config_hash;
    double denom_km = 195.0;
    std::vector<EvalRow> rows;  // sorted by actual_km
    double mse_norm = 0.0;

    double max_pct_error() const {
        double m = 0.0;
        for (const auto& r : rows) m = std::max(m, r.pct_error);
        return m;
    }
};

inline double model_predict_km(const ModelFile& m, const std::vector<double>& features) {
    const auto x = m.standardizer.apply(features);
    const double yn = m.kind == "ann" ? forward(m.net, x) : predict(m.svr, x);
    return dminmax_inverse(yn, m.normalization);
}

/// Predicts the test rows of the model's scheme. Refuses a manifest whose
/// config hash differs from the one the model was trained against.
inline EvalReport evaluate_model(const DatasetManifest& manifest,
                                 const std::filesystem::path& out_dir, const ModelFile& model,
                                 double denom_km = 195.0) {
    if (model.config_hash != manifest.config_hash)
        throw std::runtime_error("eval: config hash mismatch (model " + model.config_hash +
                                 " vs dataset " + manifest.config_hash + ")");
    const auto ds = load_scheme_dataset(manifest, out_dir, model.scheme);

    EvalReport rep;
    rep.scheme = model.scheme;
    rep.model_desc = model.descriptor();
    rep.config_hash = manifest.config_hash;
    rep.denom_km = denom_km;

    std::vector<double> actual, predicted;
    for (std::size_t i = 0; i < ds.test_x.size(); ++i) {
        const double pred_km = model_predict_km(model, ds.test_x[i]);
        actual.push_back(ds.test_actual_km[i]);
        predicted.push_back(pred_km);
    }
    for (std::size_t i = 0; i < actual.size(); ++i)
        rep.rows.push_back({actual[i], predicted[i], percent_error(actual[i], predicted[i], denom_km)});
    std::sort(rep.rows.begin(), rep.rows.end(),
              [](const EvalRow& a, const EvalRow& b) { return a.actual_km < b.actual_km; });
    rep.mse_norm = mse_normalized(actual, predicted, model.normalization);
    return rep;
}

inline void write_eval_report(const EvalReport& rep, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "reports");
    const std::string stem = "eval_" + rep.model_desc + "_" + rep.scheme;

    std::ofstream csv(out_dir / "reports" / (stem + ".csv"));
    csv << "actual_km,predicted_km,pct_error\n";
    for (const auto& r : rep.rows)
        csv << detail::format_num(r.actual_km, "%.4f") << ','
            << detail::format_num(r.predicted_km, "%.4f") << ','
            << detail::format_num(r.pct_error, "%.4f") << "\n";
    csv << "mse_normalized," << detail::format_num(rep.mse_norm, "%.6e") << ",\n";

    std::ofstream md(out_dir / "reports" / (stem + ".md"));
    md << "# Fault location — " << rep.scheme << " system, model " << rep.model_desc << "\n\n";
    md << "Config `" << rep.config_hash << "`, percent-error denominator " << rep.denom_km
       << " km.\n\n";
    md << "| Actual (km) | Predicted (km) | % error |\n|---:|---:|---:|\n";
    for (const auto& r : rep.rows)
        md << "| " << detail::format_num(r.actual_km, "%.0f") << " | "
           << detail::format_num(r.predicted_km, "%.4f") << " | "
           << detail::format_num(r.pct_error, "%.4f") << " |\n";
    md << "\nNormalized MSE: " << detail::format_num(rep.mse_norm, "%.3e") << "\n";

    std::ofstream sc(out_dir / "reports" / ("scatter_" + rep.model_desc + "_" + rep.scheme + ".csv"));
    sc << "actual_km,predicted_km\n";
    for (const auto& r : rep.rows)
        sc << detail::format_num(r.actual_km, "%.6f") << ','
           << detail::format_num(r.predicted_km, "%.6f") << "\n";
}

inline EvalReport eval_model_file(const std::filesystem::path& out_dir,
                                  const std::filesystem::path& model_path, double denom_km = 195.0,
                                  bool write_files = true) {
    const auto manifest = load_manifest(out_dir / "manifest.json");
    const auto model = load_model(model_path);
    auto rep = evaluate_model(manifest, out_dir, model, denom_km);
    if (write_files) write_eval_report(rep, out_dir);
    return rep;
}

// ---------------------------------------------------------------------------
// compare / report

struct SchemeComparison {
    std::string scheme;
    std::string best_ann_desc;
    double ann_mse = 0.0;
    double svr_mse = 0.0;
};

/// Per-scheme best-ANN vs SVR normalized test MSE, written as a two-column
/// comparison table.
inline std::vector<SchemeComparison> compare_models(const std::filesystem::path& out_dir,
                                                    double denom_km = 195.0,
                                                    bool write_files = true) {
    namespace fs = std::filesystem;
    const auto manifest = load_manifest(out_dir / "manifest.json");

    std::vector<std::string> schemes;
    for (const auto& [scheme, csv] : manifest.features_csv) schemes.push_back(scheme);

    std::vector<SchemeComparison> table;
    for (const auto& scheme : schemes) {
        SchemeComparison row;
        row.scheme = scheme;
        double best_ann = std::numeric_limits<double>::infinity();
        fs::path svr_path;
        std::vector<fs::path> model_paths;
        if (fs::exists(out_dir / "models"))
            for (const auto& entry : fs::directory_iterator(out_dir / "models"))
                model_paths.push_back(entry.path());
        std::sort(model_paths.begin(), model_paths.end());
        for (const auto& path : model_paths) {
            if (path.extension() != ".json") continue;
            const auto model = load_model(path);
            if (model.scheme != scheme) continue;
            const auto rep = evaluate_model(manifest, out_dir, model, denom_km);
            if (model.kind == "ann") {
                if (rep.mse_norm < best_ann) {
                    best_ann = rep.mse_norm;
                    row.best_ann_desc = rep.model_desc;
                    row.ann_mse = rep.mse_norm;
                }
            } else {
                row.svr_mse = rep.mse_norm;
            }
        }
        if (!std::isfinite(best_ann)) continue;
        table.push_back(row);
    }

    if (write_files) {
        fs::create_directories(out_dir / "reports");
        std::ofstream csv(out_dir / "reports" / "comparison.csv");
        csv << "scheme,ann_model,ann_mse,svr_mse\n";
        for (const auto& r : table)
            csv << r.scheme << ',' << r.best_ann_desc << ',' << detail::format_num(r.ann_mse, "%.6e")
                << ',' << detail::format_num(r.svr_mse, "%.6e") << "\n";

        std::ofstream md(out_dir / "reports" / "comparison.md");
        md << "# Cascade-forward network vs support vector regression\n\n";
        md << "Normalized test MSE per grounding scheme.\n\n";
        md << "| System | Cascade-forward net | SVR |\n|---|---:|---:|\n";
        for (const auto& r : table)
            md << "| " << r.scheme << " | " << detail::format_num(r.ann_mse, "%.3e") << " ("
               << r.best_ann_desc << ") | " << detail::format_num(r.svr_mse, "%.3e") << " |\n";
    }
    return table;
}

/// Combined summary: dataset description, every model's test table, and the
/// comparison when SVR baselines exist.
inline void write_summary(const std::filesystem::path& out_dir, double denom_km = 195.0) {
    namespace fs = std::filesystem;
    const auto manifest = load_manifest(out_dir / "manifest.json");
    fs::create_directories(out_dir / "reports");
    std::ofstream md(out_dir / "reports" / "summary.md");

    md << "# Fault-location pipeline summary\n\n";
    md << "Config `" << manifest.config_hash << "`, features `" << manifest.reduction.name()
       << "`, target normalization [" << manifest.normalization.x_min << ", "
       << manifest.normalization.x_max << "] km.\n\n";
    std::size_t train_n = 0, test_n = 0;
    for (const auto& s : manifest.scenarios) (s.is_train ? train_n : test_n)++;
    md << "Scenarios: " << manifest.scenarios.size() << " (" << train_n << " train / " << test_n
       << " test), schemes:";
    for (const auto& [scheme, csv] : manifest.features_csv) md << " " << scheme;
    md << ".\n\n";

    std::vector<fs::path> model_paths;
    if (fs::exists(out_dir / "models"))
        for (const auto& entry : fs::directory_iterator(out_dir / "models"))
            if (entry.path().extension() == ".json") model_paths.push_back(entry.path());
    std::sort(model_paths.begin(), model_paths.end());

    bool any_svr = false;
    for (const auto& path : model_paths) {
        const auto model = load_model(path);
        any_svr |= model.kind == "svr";
        const auto rep = evaluate_model(manifest, out_dir, model, denom_km);
        md << "## " << rep.scheme << " — " << rep.model_desc << "\n\n";
        md << "| Actual (km) | Predicted (km) | % error |\n|---:|---:|---:|\n";
        for (const auto& r : rep.rows)
            md << "| " << detail::format_num(r.actual_km, "%.0f") << " | "
               << detail::format_num(r.predicted_km, "%.4f") << " | "
               << detail::format_num(r.pct_error, "%.4f") << " |\n";
        md << "\nNormalized MSE: " << detail::format_num(rep.mse_norm, "%.3e");
        if (model.kind == "ann")
            md << " (train MSE " << detail::format_num(model.final_train_mse, "%.3e") << ", "
               << model.stop_reason << ")";
        else
            md << " (5-fold CV MSE " << detail::format_num(model.svr_cv_mse, "%.3e") << ")";
        md << "\n\n";
    }
    if (any_svr) {
        const auto table = compare_models(out_dir, denom_km, false);
        md << "## Method comparison (normalized test MSE)\n\n";
        md << "| System | Cascade-forward net | SVR |\n|---|---:|---:|\n";
        for (const auto& r : table)
            md << "| " << r.scheme << " | " << detail::format_num(r.ann_mse, "%.3e") << " ("
               << r.best_ann_desc << ") | " << detail::format_num(r.svr_mse, "%.3e") << " |\n";
    }
}

}  // namespace faultloc
