#include "romforge/rom/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "romforge/btae/trainer.hpp"
#include "romforge/core/error.hpp"
#include "romforge/core/log.hpp"
#include "romforge/fom/solver.hpp"
#include "romforge/store/snapshot_matrix.hpp"

namespace romforge::rom {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr const char* kModelJson = "model.json";
constexpr const char* kPodFile = "pod_basis.podb";
constexpr const char* kBtAeFile = "bt_ae.btae";
constexpr const char* kLatentFile = "latent_map.lmap";

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Re-throws failures of `body` with the stage name prefixed, keeping the exit-code class.
template <typename F>
auto stage(const std::string& name, F&& body) {
    try {
        return body();
    } catch (const ValidationError& e) {
        throw ValidationError(name + ": " + e.what());
    } catch (const std::exception& e) {
        throw RuntimeError(name + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw RuntimeError("failed writing '" + path.string() + "'");
}

/// Minimal CSV builder: rows of pre-formatted cells.
class Csv {
public:
    explicit Csv(std::vector<std::string> header) { row(std::move(header)); }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
        text_ += '\n';
    }
    void save(const fs::path& path) const { write_text(path, text_); }

private:
    std::string text_;
};

std::string archive_name(Role role, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%03zu.snap", role == Role::Train ? "train" : "test", index);
    return buf;
}

std::vector<std::string> mu_header(std::size_t p) {
    if (p == 1) return {"mu"};
    std::vector<std::string> h;
    for (std::size_t i = 0; i < p; ++i) h.push_back("mu_" + std::to_string(i + 1));
    return h;
}

std::vector<std::string> cells(std::vector<std::string> head, const std::vector<double>& values) {
    for (double v : values) head.push_back(format_double(v));
    return head;
}

store::SnapshotSet load_entry(const OutputLayout& layout, const ManifestEntry& e) {
    const char* role = e.role == Role::Train ? "training" : "test";
    if (!e.ok)
        throw RuntimeError(std::string(role) + " archive for mu index " + std::to_string(e.index) +
                           " failed during generate: " + e.error);
    const fs::path path = layout.archives() / e.file;
    if (!fs::exists(path))
        throw RuntimeError(std::string(role) + " archive for mu index " + std::to_string(e.index) +
                           " not found: " + path.string());
    return store::read_archive(path);
}

Manifest require_manifest(const OutputLayout& layout) {
    if (!fs::exists(layout.manifest()))
        throw RuntimeError("no archive manifest at " + layout.manifest().string() + " (run generate first)");
    return read_manifest(layout.manifest());
}

}  // namespace

std::vector<const ManifestEntry*> Manifest::with_role(Role role) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
        if (e.role == role) out.push_back(&e);
    return out;
}

std::size_t Manifest::failures() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](auto& e) { return !e.ok; }));
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
    json j;
    j["preset"] = manifest.preset;
    j["parameter_dim"] = manifest.parameter_dim;
    j["dof"] = manifest.dof;
    j["test_placement"] = manifest.test_placement;
    j["entries"] = json::array();
    for (const auto& e : manifest.entries) {
        json je{{"role", e.role == Role::Train ? "train" : "test"},
                {"index", e.index},
                {"mu", e.mu},
                {"file", e.file},
                {"status", e.ok ? "ok" : "failed"},
                {"fom_seconds", e.fom_seconds},
                {"steps", e.steps},
                {"snapshots", e.snapshots}};
        if (!e.ok) je["error"] = e.error;
        j["entries"].push_back(std::move(je));
    }
    write_text(path, j.dump(2) + "\n");
}

Manifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeError("cannot open manifest '" + path.string() + "'");
    try {
        const json j = json::parse(in);
        Manifest m;
        m.preset = j.at("preset").get<std::string>();
        m.parameter_dim = j.at("parameter_dim").get<std::size_t>();
        m.dof = j.at("dof").get<std::size_t>();
        m.test_placement = j.value("test_placement", m.test_placement);
        for (const auto& je : j.at("entries")) {
            ManifestEntry e;
            e.role = je.at("role").get<std::string>() == "test" ? Role::Test : Role::Train;
            e.index = je.at("index").get<std::size_t>();
            e.mu = je.at("mu").get<std::vector<double>>();
            e.file = je.at("file").get<std::string>();
            e.ok = je.at("status").get<std::string>() == "ok";
            e.error = je.value("error", "");
            e.fom_seconds = je.value("fom_seconds", 0.0);
            e.steps = je.value("steps", std::size_t{0});
            e.snapshots = je.value("snapshots", std::size_t{0});
            m.entries.push_back(std::move(e));
        }
        return m;
    } catch (const json::exception& e) {
        throw RuntimeError("malformed manifest '" + path.string() + "': " + e.what());
    }
}

Manifest cmd_generate(const ExperimentConfig& config) {
    config.validate();
    const OutputLayout layout{config.output_dir};
    fs::create_directories(layout.archives());

    Manifest manifest;
    manifest.preset = std::string(to_string(config.preset));
    manifest.parameter_dim = config.parameter_dim();
    manifest.dof = config.fom.grid.cells();
    const auto train = training_parameters(config);
    const auto test = test_parameters(config);
    auto add = [&](Role role, std::size_t i, const std::vector<double>& mu) {
        ManifestEntry e;
        e.role = role;
        e.index = i;
        e.mu = mu;
        e.file = archive_name(role, i);
        manifest.entries.push_back(std::move(e));
    };
    for (std::size_t i = 0; i < train.size(); ++i) add(Role::Train, i, train[i]);
    for (std::size_t i = 0; i < test.size(); ++i) add(Role::Test, i, test[i]);

    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < manifest.entries.size(); k = next++) {
            auto& e = manifest.entries[k];
            const auto start = Clock::now();
            try {
                const auto result = fom::run_simulation(fom_for(config, e.mu, k));
                e.fom_seconds = seconds_since(start);
                e.steps = result.steps;
                e.snapshots = result.snapshots.size();
                store::SnapshotSet set;
                for (const auto& s : result.snapshots) set.add(s, static_cast<std::uint32_t>(k));
                store::write_archive(set, layout.archives() / e.file);
                e.ok = true;
            } catch (const std::exception& ex) {
                e.fom_seconds = seconds_since(start);
                e.error = ex.what();
                std::lock_guard lock(log_mutex);
                log::warn(e.file + ": " + e.error);
            }
        }
    };
    std::size_t workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, manifest.entries.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    write_manifest(manifest, layout.manifest());
    return manifest;
}

TrainSummary cmd_train(const ExperimentConfig& config) {
    config.validate();
    const OutputLayout layout{config.output_dir};
    const auto manifest = stage("train/load", [&] { return require_manifest(layout); });

    store::SnapshotSet all;
    stage("train/load", [&] {
        for (const auto* e : manifest.with_role(Role::Train))
            all.append(load_entry(layout, *e), static_cast<std::uint32_t>(e->index));
        if (all.empty()) throw RuntimeError("no training snapshots");
        return 0;
    });
    const auto split = stage("train/split", [&] { return store::split_train_validation(all, config.seed); });
    const Matrix f_train = store::field_matrix(all, split.train);
    const Matrix f_val = store::field_matrix(all, split.validation);
    const Matrix i_train = store::input_matrix(all, split.train);
    const Matrix i_val = store::input_matrix(all, split.validation);

    fs::create_directories(layout.models());
    fs::create_directories(layout.reports());
    TrainSummary summary;
    summary.train_snapshots = split.train.size();
    summary.validation_snapshots = split.validation.size();
    summary.code_size = config.code_size();

    json model_json;
    model_json["compressor"] = std::string(to_string(config.compressor));
    model_json["code_size"] = config.code_size();
    model_json["parameter_dim"] = all.parameter_dim;
    model_json["dof"] = all.dof;
    model_json["seed"] = config.seed;
    model_json["split"] = {{"train", split.train.size()}, {"validation", split.validation.size()}};

    Matrix codes_train, codes_val;
    if (config.compressor == CompressorKind::Pod) {
        stage("train/compressor", [&] {
            const auto basis = pod::compute_pod_basis(f_train, config.pod_modes);
            pod::save_basis(basis, layout.models() / kPodFile);
            codes_train = pod::project(basis, f_train);
            codes_val = pod::project(basis, f_val);
            summary.pod_train_mse = pod::reconstruction_mse(basis, f_train);
            Csv csv({"mode", "singular_value"});
            for (Eigen::Index k = 0; k < basis.singular_values.size(); ++k)
                csv.row({std::to_string(k + 1), format_double(basis.singular_values(k))});
            csv.save(layout.reports() / "pod_spectrum.csv");
            return 0;
        });
        model_json["files"] = {{"compressor", kPodFile}, {"latent_map", kLatentFile}};
        model_json["pod"] = {{"train_reconstruction_mse", summary.pod_train_mse}};
    } else {
        stage("train/compressor", [&] {
            const auto trained = btae::train_bt_ae(f_train, f_val, config.btae);
            btae::save_model(trained.model, layout.models() / kBtAeFile);
            codes_train = btae::encode(trained.model, f_train);
            codes_val = btae::encode(trained.model, f_val);
            const auto& h = trained.history;
            Csv csv({"epoch", "validation_ae", "validation_bt", "train_ae", "train_bt"});
            csv.row({"0", format_double(h.initial_validation_ae), format_double(h.initial_validation_bt), "", ""});
            for (std::size_t e = 0; e < h.validation_ae.size(); ++e)
                csv.row({std::to_string(e + 1), format_double(h.validation_ae[e]), format_double(h.validation_bt[e]),
                         format_double(h.train_ae[e]), format_double(h.train_bt[e])});
            csv.save(layout.reports() / "btae_curves.csv");
            summary.btae_history = h;
            return 0;
        });
        const auto& h = *summary.btae_history;
        model_json["files"] = {{"compressor", kBtAeFile}, {"latent_map", kLatentFile}};
        model_json["bt_ae"] = {{"best_epoch", h.best_epoch},
                               {"best_validation_ae", h.best_validation_ae},
                               {"initial_validation_ae", h.initial_validation_ae}};
    }

    summary.latent = stage("train/latent_map", [&] {
        auto result = latent::train_latent_map(i_train, codes_train, i_val, codes_val, config.latent);
        latent::save_regressor(result.regressor, layout.models() / kLatentFile);
        Csv csv({"epoch", "train_loss", "validation_loss"});
        for (std::size_t e = 0; e < result.validation_loss.size(); ++e)
            csv.row({std::to_string(e + 1), format_double(result.train_loss[e]),
                     format_double(result.validation_loss[e])});
        csv.save(layout.reports() / "latent_curve.csv");
        return result;
    });
    model_json["latent_map"] = {{"best_epoch", summary.latent.best_epoch},
                                {"best_validation_loss", summary.latent.best_validation_loss}};
    write_text(layout.models() / kModelJson, model_json.dump(2) + "\n");
    return summary;
}

std::size_t RomModel::dof() const { return basis ? basis->dof() : autoencoder->dof(); }

std::size_t RomModel::code_size() const { return basis ? basis->size() : autoencoder->latent_dim(); }

Matrix RomModel::compress(const Matrix& fields) const {
    if (static_cast<std::size_t>(fields.rows()) != dof())
        throw RuntimeError("fields have " + std::to_string(fields.rows()) + " DOFs, the model expects " +
                           std::to_string(dof()));
    return basis ? pod::project(*basis, fields) : btae::encode(*autoencoder, fields);
}

Matrix RomModel::expand(const Matrix& codes) const {
    return basis ? pod::reconstruct(*basis, codes) : btae::decode(*autoencoder, codes);
}

RomModel load_rom_model(const fs::path& models_dir) {
    const fs::path meta = models_dir / kModelJson;
    std::ifstream in(meta);
    if (!in) throw RuntimeError("no trained model at " + models_dir.string() + " (run train first)");
    RomModel model;
    std::string compressor_file, latent_file;
    try {
        const json j = json::parse(in);
        model.kind = parse_compressor(j.at("compressor").get<std::string>());
        model.parameter_dim = j.at("parameter_dim").get<std::size_t>();
        compressor_file = j.at("files").at("compressor").get<std::string>();
        latent_file = j.at("files").at("latent_map").get<std::string>();
    } catch (const json::exception& e) {
        throw RuntimeError("malformed " + meta.string() + ": " + e.what());
    }
    if (model.kind == CompressorKind::Pod) {
        model.basis = pod::load_basis(models_dir / compressor_file);
    } else {
        model.autoencoder = btae::load_model(models_dir / compressor_file);
    }
    model.map = latent::load_regressor(models_dir / latent_file);
    if (model.map.output_size() != model.code_size())
        throw RuntimeError("checkpoint mismatch: latent map predicts " + std::to_string(model.map.output_size()) +
                           " coordinates but the compressor uses " + std::to_string(model.code_size()));
    if (model.map.input_size() != 1 + model.parameter_dim)
        throw RuntimeError("checkpoint mismatch: latent map takes " + std::to_string(model.map.input_size()) +
                           " inputs, expected 1 + " + std::to_string(model.parameter_dim));
    return model;
}

Prediction rom_predict(const RomModel& model, double t, const std::vector<double>& mu) {
    const auto z = latent::predict_latent(model.map, t, mu);
    return {model.expand(Matrix(z.code)).col(0), z.extrapolated};
}

Matrix rom_predict(const RomModel& model, const Matrix& inputs) {
    return model.expand(latent::predict_latent(model.map, inputs));
}

Prediction cmd_predict(const ExperimentConfig& config, double t, const std::vector<double>& mu, const fs::path& out) {
    if (!std::isfinite(t)) throw ValidationError("query time must be finite");
    if (mu.size() != config.parameter_dim())
        throw ValidationError("expected " + std::to_string(config.parameter_dim()) + " parameter value(s), got " +
                              std::to_string(mu.size()));
    const OutputLayout layout{config.output_dir};
    const auto model = stage("predict/load", [&] { return load_rom_model(layout.models()); });
    const auto start = Clock::now();
    auto p = rom_predict(model, t, mu);
    const double elapsed = seconds_since(start);
    if (p.extrapolated) log::warn("query lies outside the training range; the prediction is an extrapolation");
    log::info("prediction took " + format_double(elapsed) + " s");

    store::SnapshotSet set;
    set.add({t, mu, std::vector<double>(p.field.data(), p.field.data() + p.field.size())});
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    store::write_archive(set, out);
    return p;
}

EvaluationReport cmd_evaluate(const ExperimentConfig& config) {
    const OutputLayout layout{config.output_dir};
    const auto model = stage("evaluate/load", [&] { return load_rom_model(layout.models()); });
    const auto manifest = stage("evaluate/load", [&] { return require_manifest(layout); });

    EvaluationReport report;
    for (const auto* e : manifest.with_role(Role::Test)) {
        if (!e->ok) {
            log::warn("skipping test mu index " + std::to_string(e->index) + ": " + e->error);
            continue;
        }
        const auto set = stage("evaluate/load", [&] { return load_entry(layout, *e); });
        if (set.dof != model.dof())
            throw RuntimeError("test archive " + e->file + " has " + std::to_string(set.dof) +
                               " DOFs, the model expects " + std::to_string(model.dof()));
        const Matrix inputs = store::input_matrix(set);
        const Matrix reference = store::field_matrix(set);
        const Matrix predicted = rom_predict(model, inputs);

        MuEvaluation m;
        m.index = e->index;
        m.mu = e->mu;
        for (const auto& s : set.snapshots) m.times.push_back(s.t);
        m.snapshot_mse = snapshot_mse(predicted, reference);
        m.diff = diff_stats(predicted, reference);
        m.mse = trajectory_mse(predicted, reference);

        const auto start = Clock::now();
        for (const auto& s : set.snapshots) (void)rom_predict(model, s.t, s.mu);
        m.rom_query_seconds = seconds_since(start) / static_cast<double>(set.size());
        m.fom_seconds = e->fom_seconds;
        m.speedup = m.rom_query_seconds > 0.0 ? m.fom_seconds / m.rom_query_seconds : 0.0;
        report.per_mu.push_back(std::move(m));
    }
    if (report.per_mu.empty()) throw RuntimeError("evaluate: no usable test archives");

    const std::size_t p = manifest.parameter_dim;
    Csv mse_csv([&] {
        std::vector<std::string> h{"mu_index"};
        for (auto& c : mu_header(p)) h.push_back(c);
        h.insert(h.end(), {"mse", "snapshots"});
        return h;
    }());
    Csv diff_csv({"mu_index", "t", "mse", "diff_max", "diff_mean"});
    Csv summary_csv({"mu_index", "min", "q1", "median", "q3", "max", "mean"});
    Csv timing_csv({"mu_index", "fom_seconds", "rom_query_seconds", "speedup"});
    std::vector<double> pooled;
    std::vector<PlotSeries> series;
    double sum = 0.0;
    for (const auto& m : report.per_mu) {
        const auto idx = std::to_string(m.index);
        auto mse_row = cells(cells({idx}, m.mu), {m.mse});
        mse_row.push_back(std::to_string(m.times.size()));
        mse_csv.row(mse_row);
        for (std::size_t k = 0; k < m.times.size(); ++k)
            diff_csv.row(cells({idx}, {m.times[k], m.snapshot_mse[k], m.diff[k].max, m.diff[k].mean}));
        const auto b = box_stats(m.snapshot_mse);
        summary_csv.row(cells({idx}, {b.min, b.q1, b.median, b.q3, b.max, b.mean}));
        timing_csv.row(cells({idx}, {m.fom_seconds, m.rom_query_seconds, m.speedup}));
        pooled.insert(pooled.end(), m.snapshot_mse.begin(), m.snapshot_mse.end());
        std::string label = "test " + idx + ", mu =";
        for (double v : m.mu) label += " " + format_double(v);
        series.push_back({label, m.times, moving_average(m.snapshot_mse, 50)});
        sum += m.mse;
    }
    report.mean_mse = sum / static_cast<double>(report.per_mu.size());
    const auto b = box_stats(pooled);
    summary_csv.row(cells({"all"}, {b.min, b.q1, b.median, b.q3, b.max, b.mean}));

    fs::create_directories(layout.reports());
    mse_csv.save(layout.reports() / "evaluation_mse.csv");
    diff_csv.save(layout.reports() / "evaluation_diff.csv");
    summary_csv.save(layout.reports() / "evaluation_summary.csv");
    timing_csv.save(layout.reports() / "timing.csv");
    write_text(layout.reports() / "mse_vs_time.svg",
               render_log_plot_svg(series, "Test MSE over time (moving average, window 50)", "t", "MSE"));
    return report;
}

std::size_t cmd_export_latents(const ExperimentConfig& config, const std::vector<fs::path>& archives,
                               const fs::path& out) {
    const OutputLayout layout{config.output_dir};
    const auto model = stage("export-latents/load", [&] { return load_rom_model(layout.models()); });
    std::vector<store::SnapshotSet> sets;
    if (archives.empty()) {
        const auto manifest = stage("export-latents/load", [&] { return require_manifest(layout); });
        for (const auto* e : manifest.with_role(Role::Train))
            sets.push_back(stage("export-latents/load", [&] { return load_entry(layout, *e); }));
    } else {
        for (const auto& a : archives) sets.push_back(stage("export-latents/load", [&] { return store::read_archive(a); }));
    }

    std::vector<std::string> header{"t"};
    for (auto& c : mu_header(model.parameter_dim)) header.push_back(c);
    for (std::size_t q = 0; q < model.code_size(); ++q) header.push_back("z_" + std::to_string(q + 1));
    Csv csv(header);
    std::size_t rows = 0;
    for (const auto& set : sets) {
        if (set.empty()) continue;
        if (set.parameter_dim != model.parameter_dim)
            throw RuntimeError("archive has " + std::to_string(set.parameter_dim) + " parameters, the model expects " +
                               std::to_string(model.parameter_dim));
        const Matrix codes = model.compress(store::field_matrix(set));
        for (std::size_t k = 0; k < set.size(); ++k) {
            const auto& s = set.snapshots[k];
            std::vector<double> values{s.t};
            values.insert(values.end(), s.mu.begin(), s.mu.end());
            for (Eigen::Index q = 0; q < codes.rows(); ++q) values.push_back(codes(q, static_cast<Eigen::Index>(k)));
            csv.row(cells({}, values));
            ++rows;
        }
    }
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    csv.save(out);
    return rows;
}

}  // namespace romforge::rom
