// romforge command-line entry point. Exit codes: 0 ok, 1 invalid input, 2 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "romforge/core/error.hpp"
#include "romforge/core/log.hpp"
#include "romforge/rom/config.hpp"
#include "romforge/rom/pipeline.hpp"

namespace {

using namespace romforge;

rom::ExperimentConfig load(const std::string& path, const std::string& out_dir) {
    auto config = rom::load_config(path);
    if (rom::apply_seed_override(config)) log::info("seed overridden by ROMFORGE_SEED: " + std::to_string(config.seed));
    if (!out_dir.empty()) config.output_dir = out_dir;
    return config;
}

int run(int argc, char** argv) {
    CLI::App app{"Reduced-order models for porous-media natural convection"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Suppress informational output and warnings");

    std::string config_path, out;
    double t = 0.0;
    std::vector<double> mu;
    std::vector<std::string> archives;

    auto* gen = app.add_subcommand("generate", "Run the full-order solver for the training and test parameters");
    auto* train = app.add_subcommand("train", "Train the compressor and the latent map");
    auto* predict = app.add_subcommand("predict", "Predict one field at (t, mu)");
    auto* evaluate = app.add_subcommand("evaluate", "Score the trained model on the test archives");
    auto* exp = app.add_subcommand("export-latents", "Write latent codes of archived snapshots as CSV");
    for (auto* sub : {gen, train, predict, evaluate, exp})
        sub->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
    for (auto* sub : {gen, train, evaluate}) sub->add_option("--out", out, "Output directory (overrides the config)");
    predict->add_option("--t", t, "Query time")->required();
    predict->add_option("--mu", mu, "Parameter value(s), one per component")->required()->delimiter(',');
    predict->add_option("--out", out, "Output archive (default <output>/reports/prediction.snap)");
    exp->add_option("--archive", archives, "Archive(s) to encode (default: all training archives)");
    exp->add_option("--out", out, "Output CSV (default <output>/reports/latents.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    log::set_quiet(quiet);

    if (gen->parsed()) {
        const auto config = load(config_path, out);
        const auto manifest = rom::cmd_generate(config);
        std::printf("generated %zu archive(s) in %s\n", manifest.entries.size() - manifest.failures(),
                    rom::OutputLayout{config.output_dir}.archives().c_str());
        if (manifest.failures() > 0) {
            std::fprintf(stderr, "error: %zu full-order run(s) failed, see manifest.json\n", manifest.failures());
            return 2;
        }
    } else if (train->parsed()) {
        const auto config = load(config_path, out);
        const auto s = rom::cmd_train(config);
        std::printf("trained %s on %zu snapshots (%zu validation), code size %zu\n",
                    std::string(rom::to_string(config.compressor)).c_str(), s.train_snapshots,
                    s.validation_snapshots, s.code_size);
        if (s.btae_history)
            std::printf("  autoencoder validation loss %.6g (epoch %zu)\n", s.btae_history->best_validation_ae,
                        s.btae_history->best_epoch);
        std::printf("  latent map validation loss %.6g (epoch %zu)\n", s.latent.best_validation_loss,
                    s.latent.best_epoch);
    } else if (predict->parsed()) {
        const auto config = load(config_path, "");
        const std::filesystem::path target =
            out.empty() ? rom::OutputLayout{config.output_dir}.reports() / "prediction.snap" : std::filesystem::path(out);
        const auto p = rom::cmd_predict(config, t, mu, target);
        std::printf("wrote %s (%lld values%s)\n", target.c_str(), static_cast<long long>(p.field.size()),
                    p.extrapolated ? ", extrapolated" : "");
    } else if (evaluate->parsed()) {
        const auto config = load(config_path, out);
        const auto r = rom::cmd_evaluate(config);
        for (const auto& m : r.per_mu)
            std::printf("test %zu: mse %.6g, speedup %.3g\n", m.index, m.mse, m.speedup);
        std::printf("mean test mse %.6g\n", r.mean_mse);
    } else if (exp->parsed()) {
        const auto config = load(config_path, "");
        const std::filesystem::path target =
            out.empty() ? rom::OutputLayout{config.output_dir}.reports() / "latents.csv" : std::filesystem::path(out);
        std::vector<std::filesystem::path> paths(archives.begin(), archives.end());
        const auto rows = rom::cmd_export_latents(config, paths, target);
        std::printf("wrote %zu row(s) to %s\n", rows, target.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const romforge::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
