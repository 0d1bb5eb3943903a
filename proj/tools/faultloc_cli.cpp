// Command-line front end for the fault-location pipeline: generate the image
// dataset, train per-scheme models, evaluate them and render reports.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "faultloc/config.hpp"
#include "faultloc/pipeline.hpp"

namespace {

faultloc::PipelineConfig load_or_default(const std::string& path) {
    if (path.empty()) return {};
    return faultloc::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Image-based transmission-line fault locator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "dataset";
    std::string scheme;
    std::string trainer = "lm";
    std::string model_kind = "ann";
    std::string model_file;
    std::string reduction;
    std::uint64_t seed = 1;
    int max_epochs = 1000;
    double goal_mse = 1e-5;
    double learning_rate = 0.9;
    double denom = 195.0;
    bool dump_locus = false;

    auto* gen = app.add_subcommand("generate", "Simulate faults and build the image dataset");
    gen->add_option("--config", config_path, "Config JSON (defaults when omitted)");
    gen->add_option("--out", out_dir, "Dataset output directory");
    gen->add_option("--reduction", reduction, "Feature mode: global|perrow|percolumn|blockK");
    gen->add_flag("--dump-locus", dump_locus, "Also write per-scenario locus CSVs");

    auto* train = app.add_subcommand("train", "Train one per-scheme model");
    train->add_option("--out", out_dir, "Dataset directory");
    train->add_option("--scheme", scheme, "Grounding scheme: ungrounded|solid|impedance")->required();
    train->add_option("--model", model_kind, "ann or svr");
    train->add_option("--trainer", trainer, "ann trainer: lm|cgb|scg|oss|gdx");
    train->add_option("--seed", seed, "Init / CV seed");
    train->add_option("--max-epochs", max_epochs, "Epoch cap");
    train->add_option("--goal-mse", goal_mse, "Stop when training MSE reaches this");
    train->add_option("--learning-rate", learning_rate, "Learning rate (gdx)");

    auto* eval = app.add_subcommand("eval", "Evaluate a model on its test split");
    eval->add_option("--out", out_dir, "Dataset directory");
    eval->add_option("--model-file", model_file, "Model JSON (default: derived from scheme/model/trainer)");
    eval->add_option("--scheme", scheme, "Grounding scheme (for the derived path)");
    eval->add_option("--model", model_kind, "ann or svr (for the derived path)");
    eval->add_option("--trainer", trainer, "Trainer (for the derived path)");
    eval->add_option("--denominator", denom, "Percent-error denominator in km (195 or 200)");

    auto* compare = app.add_subcommand("compare", "Best ANN vs SVR table across schemes");
    compare->add_option("--out", out_dir, "Dataset directory");
    compare->add_option("--denominator", denom, "Percent-error denominator in km");

    auto* report = app.add_subcommand("report", "Combined summary.md from all trained models");
    report->add_option("--out", out_dir, "Dataset directory");
    report->add_option("--denominator", denom, "Percent-error denominator in km");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            auto cfg = load_or_default(config_path);
            if (!reduction.empty()) cfg.reduction = faultloc::ReductionMode::parse(reduction);
            const auto manifest = faultloc::generate(cfg, out_dir, dump_locus);
            std::size_t train_n = 0;
            for (const auto& s : manifest.scenarios)
                if (s.is_train) ++train_n;
            std::cout << "dataset " << manifest.config_hash << ": " << manifest.scenarios.size()
                      << " scenarios (" << train_n << " train, "
                      << manifest.scenarios.size() - train_n << " test) in " << out_dir << "\n";
        } else if (train->parsed()) {
            if (model_kind == "ann") {
                faultloc::TrainOverrides ov;
                ov.seed = seed;
                ov.max_epochs = max_epochs;
                ov.goal_mse = goal_mse;
                ov.learning_rate = learning_rate;
                const auto path =
                    faultloc::train_ann(out_dir, scheme, faultloc::parse_algorithm(trainer), ov);
                const auto model = faultloc::load_model(path);
                std::cout << "trained " << path.string() << ": train MSE "
                          << faultloc::detail::format_num(model.final_train_mse, "%.3e") << " ("
                          << model.epochs << " epochs, " << model.stop_reason << ")\n";
            } else if (model_kind == "svr") {
                const auto path = faultloc::train_svr_baseline(out_dir, scheme, seed);
                const auto model = faultloc::load_model(path);
                std::cout << "trained " << path.string() << ": C=" << model.svr.c
                          << " eps=" << model.svr.epsilon << " gamma=" << model.svr.gamma
                          << " (cv MSE "
                          << faultloc::detail::format_num(model.svr_cv_mse, "%.3e") << ")\n";
            } else {
                throw std::runtime_error("--model must be ann or svr");
            }
        } else if (eval->parsed()) {
            std::string path = model_file;
            if (path.empty()) {
                if (scheme.empty()) throw std::runtime_error("eval: --model-file or --scheme required");
                path = out_dir + "/models/" +
                       (model_kind == "svr" ? "svr_" + scheme
                                            : "ann_" + trainer + "_" + scheme) +
                       ".json";
            }
            const auto rep = faultloc::eval_model_file(out_dir, path, denom);
            std::printf("%-12s %-8s  max %%err %.4f  mse %.3e\n", rep.scheme.c_str(),
                        rep.model_desc.c_str(), rep.max_pct_error(), rep.mse_norm);
            for (const auto& r : rep.rows)
                std::printf("  %6.1f km -> %9.4f km  (%.4f%%)\n", r.actual_km, r.predicted_km,
                            r.pct_error);
        } else if (compare->parsed()) {
            const auto table = faultloc::compare_models(out_dir, denom);
            for (const auto& r : table)
                std::printf("%-12s ann(%s) %.3e  svr %.3e\n", r.scheme.c_str(),
                            r.best_ann_desc.c_str(), r.ann_mse, r.svr_mse);
        } else if (report->parsed()) {
            faultloc::write_summary(out_dir, denom);
            std::cout << "wrote " << out_dir << "/reports/summary.md\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
