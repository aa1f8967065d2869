#include "romforge/rom/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "romforge/core/error.hpp"

namespace romforge::rom {

namespace pt = boost::property_tree;

std::string_view to_string(Preset p) {
    switch (p) {
        case Preset::Ex1: return "ex1";
        case Preset::Ex2Elder: return "ex2-elder";
        case Preset::Ex4Quad: return "ex4-quad";
        case Preset::Custom: return "custom";
    }
    return "custom";
}

std::string_view to_string(CompressorKind k) { return k == CompressorKind::Pod ? "pod" : "bt-ae"; }

Preset parse_preset(std::string_view s) {
    for (auto p : {Preset::Ex1, Preset::Ex2Elder, Preset::Ex4Quad, Preset::Custom})
        if (s == to_string(p)) return p;
    throw ValidationError("unknown preset '" + std::string(s) + "' (expected ex1, ex2-elder, ex4-quad or custom)");
}

CompressorKind parse_compressor(std::string_view s) {
    if (s == "pod") return CompressorKind::Pod;
    if (s == "bt-ae" || s == "btae") return CompressorKind::BtAe;
    throw ValidationError("unknown compressor '" + std::string(s) + "' (expected pod or bt-ae)");
}

void ExperimentConfig::derive_seeds() {
    btae.seed = seed + 1;
    btae.distortion.rng_seed = seed + 2;
    latent.seed = seed + 3;
    fom.rng_seed = seed + 4;
}

namespace {

std::size_t per_axis_count(std::size_t m, std::size_t p) {
    const auto k = static_cast<std::size_t>(std::lround(std::pow(static_cast<double>(m), 1.0 / static_cast<double>(p))));
    std::size_t power = 1;
    for (std::size_t i = 0; i < p; ++i) power *= k;
    if (power != m)
        throw ValidationError("m_train = " + std::to_string(m) + " is not a perfect power k^" + std::to_string(p) +
                              " for a " + std::to_string(p) + "-component parameter grid");
    return k;
}

/// Tensor product of per-axis value lists; last axis varies fastest.
std::vector<std::vector<double>> tensor(const std::vector<std::vector<double>>& axes) {
    std::vector<std::vector<double>> out{{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<double>> next;
        for (const auto& prefix : out)
            for (double v : axis) {
                auto point = prefix;
                point.push_back(v);
                next.push_back(std::move(point));
            }
        out = std::move(next);
    }
    return out;
}

std::vector<double> axis_points(const ParameterRange& r, std::size_t k) {
    std::vector<double> v(k);
    for (std::size_t i = 0; i < k; ++i)
        v[i] = i + 1 == k ? r.hi : r.lo + static_cast<double>(i) * (r.hi - r.lo) / static_cast<double>(k - 1);
    return v;
}

std::size_t midpoint_count(const ExperimentConfig& c) {
    const std::size_t k = c.parameter_dim() == 1 ? c.m_train : per_axis_count(c.m_train, c.parameter_dim());
    std::size_t n = 1;
    for (std::size_t i = 0; i < c.parameter_dim(); ++i) n *= k - 1;
    return n;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (m_train < 2) throw ValidationError("m_train must be at least 2");
    if (m_test < 1) throw ValidationError("m_test must be at least 1");
    if (ranges.size() != 1 && ranges.size() != 4)
        throw ValidationError("the Rayleigh parameter has 1 or 4 components, got " + std::to_string(ranges.size()));
    for (const auto& r : ranges) {
        if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.hi > r.lo))
            throw ValidationError("parameter range [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                                  "] is empty or non-finite");
        if (r.lo < 0.0) throw ValidationError("Rayleigh ranges must be non-negative");
    }
    if (parameter_dim() > 1) {
        const auto k = per_axis_count(m_train, parameter_dim());
        if (k < 2) throw ValidationError("tensor grids need at least 2 points per axis");
    }
    if (m_test > midpoint_count(*this))
        throw ValidationError("m_test = " + std::to_string(m_test) + " exceeds the " +
                              std::to_string(midpoint_count(*this)) + " available interval midpoints");
    auto probe = fom;
    probe.ra = fom::RayleighField::from_mu(std::vector<double>(parameter_dim(), ranges[0].lo));
    probe.validate();
    if (pod_modes == 0) throw ValidationError("pod modes must be at least 1");
    btae.validate();
    latent.validate();
}

ExperimentConfig preset_config(Preset preset) {
    using fom::Edge;
    ExperimentConfig c;
    c.preset = preset;
    c.btae.ae_schedule.eta_max = 1e-3;
    switch (preset) {
        case Preset::Ex1:
        case Preset::Custom:
            c.fom.grid = {32, 32, 1.0, 1.0};
            c.fom.bc[Edge::Left].dirichlet = 1.0;
            c.fom.bc[Edge::Right].dirichlet = 0.0;
            c.fom.snapshot_stride = 10;
            break;
        case Preset::Ex2Elder:
            c.fom.grid = {64, 32, 2.0, 1.0};
            c.fom.bc[Edge::Bottom].heated = {{0.25, 0.75, 1.0}};
            c.fom.bc[Edge::Top].dirichlet = 0.0;
            c.fom.snapshot_stride = 10;
            c.ranges = {{350.0, 450.0}};
            break;
        case Preset::Ex4Quad:
            c.fom.grid = {32, 32, 1.0, 1.0};
            c.fom.bc[Edge::Bottom].heated = {{0.0, 0.5, 1.0}};
            c.fom.bc[Edge::Top].dirichlet = 0.0;
            c.fom.snapshot_stride = 20;
            c.ranges.assign(4, {350.0, 450.0});
            c.m_train = 81;
            c.m_test = 4;
            break;
    }
    c.derive_seeds();
    return c;
}

namespace {

class Section {
public:
    Section(const pt::ptree& tree, std::string name) : name_(std::move(name)) {
        if (auto child = tree.get_child_optional(name_)) tree_ = *child;
    }

    template <typename T>
    void read(const std::string& key, T& target) {
        if (auto v = tree_.get_optional<std::string>(key)) {
            used_.insert(key);
            std::istringstream is(*v);
            T value{};
            if constexpr (std::is_same_v<T, bool>) {
                is >> std::boolalpha >> value;
            } else {
                is >> value;
            }
            if (!is || !(is >> std::ws).eof())
                throw ValidationError("[" + name_ + "] " + key + ": cannot parse '" + *v + "'");
            target = value;
        }
    }

    std::optional<std::string> raw(const std::string& key) {
        auto v = tree_.get_optional<std::string>(key);
        if (!v) return std::nullopt;
        used_.insert(key);
        return *v;
    }

    void reject_unknown() const {
        for (const auto& [key, _] : tree_)
            if (!used_.count(key)) throw ValidationError("[" + name_ + "] unknown key '" + key + "'");
    }

private:
    std::string name_;
    pt::ptree tree_;
    std::set<std::string> used_;
};

ParameterRange parse_range(const std::string& key, const std::string& text) {
    std::istringstream is(text);
    ParameterRange r;
    if (!(is >> r.lo >> r.hi) || !(is >> std::ws).eof())
        throw ValidationError("[parameters] " + key + ": expected '<min> <max>', got '" + text + "'");
    return r;
}

/// "insulated" | "fixed <T>", optionally followed by "segment <from> <to> <T>" groups.
fom::EdgeCondition parse_edge(const std::string& key, const std::string& text, fom::EdgeCondition base) {
    std::istringstream is(text);
    std::string word;
    base.dirichlet.reset();
    base.heated.clear();
    auto fail = [&] { throw ValidationError("[fom] " + key + ": cannot parse '" + text + "'"); };
    if (!(is >> word)) fail();
    if (word == "fixed") {
        double v;
        if (!(is >> v)) fail();
        base.dirichlet = v;
    } else if (word != "insulated") {
        fail();
    }
    while (is >> word) {
        fom::HeatedSegment seg;
        if (word != "segment" || !(is >> seg.begin >> seg.end >> seg.temperature)) fail();
        base.heated.push_back(seg);
    }
    return base;
}

const std::map<std::string, fom::Edge> kEdgeNames{
    {"left", fom::Edge::Left}, {"right", fom::Edge::Right}, {"bottom", fom::Edge::Bottom}, {"top", fom::Edge::Top}};

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    for (const auto& [name, _] : tree)
        if (name != "experiment" && name != "parameters" && name != "fom" && name != "compressor" &&
            name != "latent_map")
            throw ValidationError("config: unknown section [" + name + "]");

    Section exp(tree, "experiment");
    std::string preset_name = "ex1";
    exp.read("preset", preset_name);
    ExperimentConfig c = preset_config(parse_preset(preset_name));
    std::string output = c.output_dir.string();
    exp.read("output", output);
    c.output_dir = output;
    exp.read("seed", c.seed);
    exp.read("workers", c.workers);
    exp.reject_unknown();

    Section par(tree, "parameters");
    par.read("m_train", c.m_train);
    par.read("m_test", c.m_test);
    std::size_t components = c.parameter_dim();
    par.read("components", components);
    if (components != c.parameter_dim()) {
        if (components != 1 && components != 4)
            throw ValidationError("[parameters] components must be 1 or 4");
        c.ranges.assign(components, c.ranges.front());
    }
    if (auto r = par.raw("ra_range")) c.ranges.assign(c.parameter_dim(), parse_range("ra_range", *r));
    for (std::size_t p = 0; p < c.parameter_dim(); ++p) {
        const auto key = "ra_range_" + std::to_string(p + 1);
        if (auto r = par.raw(key)) c.ranges[p] = parse_range(key, *r);
    }
    par.reject_unknown();

    Section f(tree, "fom");
    f.read("nx", c.fom.grid.nx);
    f.read("ny", c.fom.grid.ny);
    f.read("lx", c.fom.grid.lx);
    f.read("ly", c.fom.grid.ly);
    f.read("t_final", c.fom.t_final);
    f.read("cfl", c.fom.cfl_constant);
    f.read("poisson_tol", c.fom.poisson_tol);
    f.read("snapshot_stride", c.fom.snapshot_stride);
    f.read("initial_temperature", c.fom.initial_temperature);
    f.read("initial_noise", c.fom.initial_noise);
    f.read("source", c.fom.source);
    for (const auto& [name, edge] : kEdgeNames) {
        auto& ec = c.fom.bc[edge];
        if (auto v = f.raw(name)) ec = parse_edge(name, *v, ec);
        if (auto v = f.raw(name + "_flow")) {
            if (*v == "impermeable") {
                ec.flow = fom::FlowCondition::Impermeable;
            } else if (*v == "open") {
                ec.flow = fom::FlowCondition::FixedPressure;
            } else {
                throw ValidationError("[fom] " + name + "_flow: expected impermeable or open");
            }
        }
        f.read(name + "_inflow_temperature", ec.inflow_temperature);
    }
    f.reject_unknown();

    Section comp(tree, "compressor");
    if (auto v = comp.raw("kind")) c.compressor = parse_compressor(*v);
    comp.read("modes", c.pod_modes);
    comp.read("latent_dim", c.btae.latent_dim);
    comp.read("epochs", c.btae.epochs);
    comp.read("outer_batch", c.btae.outer_batch);
    comp.read("inner_batch", c.btae.inner_batch);
    comp.read("bt_lr_max", c.btae.bt_schedule.eta_max);
    comp.read("bt_lr_min", c.btae.bt_schedule.eta_min);
    comp.read("ae_lr_max", c.btae.ae_schedule.eta_max);
    comp.read("ae_lr_min", c.btae.ae_schedule.eta_min);
    comp.read("epsilon", c.btae.distortion.epsilon);
    comp.read("blur", c.btae.distortion.blur_enabled);
    comp.read("lambda", c.btae.lambda);
    comp.reject_unknown();

    Section lm(tree, "latent_map");
    lm.read("epochs", c.latent.epochs);
    lm.read("batch", c.latent.batch);
    lm.read("learning_rate", c.latent.learning_rate);
    lm.read("hidden_layers", c.latent.hidden_layers);
    lm.read("hidden_width", c.latent.hidden_width);
    lm.reject_unknown();

    c.derive_seeds();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
    return parse_config(in);
}

bool apply_seed_override(ExperimentConfig& config) {
    const char* env = std::getenv("ROMFORGE_SEED");
    if (!env || !*env) return false;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || *env == '-')
        throw ValidationError(std::string("ROMFORGE_SEED is not an unsigned integer: '") + env + "'");
    config.seed = v;
    config.derive_seeds();
    return true;
}

std::vector<std::vector<double>> training_parameters(const ExperimentConfig& config) {
    const std::size_t p = config.parameter_dim();
    const std::size_t k = p == 1 ? config.m_train : per_axis_count(config.m_train, p);
    std::vector<std::vector<double>> axes;
    for (const auto& r : config.ranges) axes.push_back(axis_points(r, k));
    return tensor(axes);
}

std::vector<std::vector<double>> test_parameters(const ExperimentConfig& config) {
    const std::size_t p = config.parameter_dim();
    const std::size_t k = p == 1 ? config.m_train : per_axis_count(config.m_train, p);
    std::vector<std::vector<double>> axes;
    for (const auto& r : config.ranges) {
        const auto pts = axis_points(r, k);
        std::vector<double> mids;
        for (std::size_t i = 0; i + 1 < k; ++i) mids.push_back(0.5 * (pts[i] + pts[i + 1]));
        axes.push_back(std::move(mids));
    }
    const auto all = tensor(axes);
    if (config.m_test > all.size())
        throw ValidationError("m_test exceeds the " + std::to_string(all.size()) + " available interval midpoints");
    std::vector<std::vector<double>> out;
    for (std::size_t j = 0; j < config.m_test; ++j) {
        const auto idx = static_cast<std::size_t>(std::floor((static_cast<double>(j) + 0.5) *
                                                             static_cast<double>(all.size()) /
                                                             static_cast<double>(config.m_test)));
        out.push_back(all[idx]);
    }
    return out;
}

fom::FomConfig fom_for(const ExperimentConfig& config, const std::vector<double>& mu, std::uint64_t run_index) {
    auto f = config.fom;
    f.ra = fom::RayleighField::from_mu(mu);
    f.rng_seed = config.fom.rng_seed + run_index;
    return f;
}

}  // namespace romforge::rom
