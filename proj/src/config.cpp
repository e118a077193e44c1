#include "gridkcf/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridkcf/errors.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace gridkcf {

namespace {

constexpr int kSchemaVersion = 1;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ordered_json parse_object(const std::string& text, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    if (!j.is_object())
        throw ConfigError(origin + ": config root must be an object");
    const auto it = j.find("schema_version");
    if (it == j.end())
        throw ConfigError(origin + ": missing schema_version");
    if (!it->is_number_integer() || it->get<int>() != kSchemaVersion)
        throw ConfigError(origin + ": unsupported schema_version (expected " +
                          std::to_string(kSchemaVersion) + ")");
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path);
    out << text;
}

// Join a config-relative path onto the config file's directory.
std::string rebase(const std::string& cfg_path, const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute())
        return p;
    return (fs::path(cfg_path).parent_path() / p).lexically_normal().string();
}

} // namespace

RegistrationMode parse_registration_mode(const std::string& name) {
    if (name == "off")
        return RegistrationMode::off;
    if (name == "from-manifest")
        return RegistrationMode::from_manifest;
    if (name == "estimate")
        return RegistrationMode::estimate;
    throw ConfigError("unknown registration mode: '" + name +
                      "' (expected off, from-manifest or estimate)");
}

std::string registration_mode_name(RegistrationMode mode) {
    switch (mode) {
    case RegistrationMode::off: return "off";
    case RegistrationMode::from_manifest: return "from-manifest";
    case RegistrationMode::estimate: return "estimate";
    }
    return "off";
}

Kernel parse_kernel(const std::string& name) {
    if (name == "gaussian")
        return Kernel::gaussian;
    if (name == "linear")
        return Kernel::linear;
    throw ConfigError("unknown kernel: '" + name + "' (expected gaussian or linear)");
}

std::string kernel_name(Kernel k) {
    return k == Kernel::gaussian ? "gaussian" : "linear";
}

void RunConfig::validate() const {
    if (manifest.empty())
        throw ConfigError("run config: manifest path is required");
    if (out_dir.empty())
        throw ConfigError("run config: out_dir must not be empty");
    if (threads < 0)
        throw ConfigError("run config: threads must be >= 0");
    if (registration_channel < -1)
        throw ConfigError("run config: registration_channel must be -1 or a channel index");
}

TrackerConfig parse_tracker_config(const std::string& json_text, const std::string& origin) {
    const ordered_json j = parse_object(json_text, origin);
    TrackerConfig cfg;
    try {
        if (j.contains("feature")) {
            const auto& f = j.at("feature");
            if (f.contains("kind"))
                cfg.feature.kind = parse_feature_kind(f.at("kind").get<std::string>());
            cfg.feature.cell_size = f.value("cell_size", cfg.feature.cell_size);
            cfg.feature.channel_subset =
                f.value("channel_subset", cfg.feature.channel_subset);
        }
        if (j.contains("kcf")) {
            const auto& k = j.at("kcf");
            cfg.kcf.lambda = k.value("lambda", cfg.kcf.lambda);
            cfg.kcf.kernel_sigma = k.value("kernel_sigma", cfg.kcf.kernel_sigma);
            cfg.kcf.learning_rate = k.value("learning_rate", cfg.kcf.learning_rate);
            cfg.kcf.output_sigma_factor =
                k.value("output_sigma_factor", cfg.kcf.output_sigma_factor);
            if (k.contains("kernel"))
                cfg.kcf.kernel = parse_kernel(k.at("kernel").get<std::string>());
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            cfg.grid.full_roi_size = g.value("full_roi_size", cfg.grid.full_roi_size);
            cfg.grid.roi_size = g.value("roi_size", cfg.grid.roi_size);
            cfg.grid.grid_n = g.value("grid_n", cfg.grid.grid_n);
            cfg.grid.psr_threshold = g.value("psr_threshold", cfg.grid.psr_threshold);
            if (g.contains("fusion"))
                cfg.grid.fusion = parse_fusion(g.at("fusion").get<std::string>());
            cfg.grid.reuse_training_features =
                g.value("reuse_training_features", cfg.grid.reuse_training_features);
        }
        cfg.coasting_limit = j.value("coasting_limit", cfg.coasting_limit);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(origin + ": malformed tracker config: " + e.what());
    }
    // the feature grid stride is the one authority on the pixel scale
    cfg.kcf.cell_size = cfg.feature.cell_size;
    if (cfg.coasting_limit < 0)
        throw ConfigError(origin + ": coasting_limit must be >= 0");
    cfg.kcf.validate();
    cfg.grid.validate();
    return cfg;
}

TrackerConfig load_tracker_config(const std::string& path) {
    return parse_tracker_config(slurp(path), path);
}

void save_tracker_config(const TrackerConfig& cfg, const std::string& path) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["feature"] = {{"kind", feature_kind_name(cfg.feature.kind)},
                    {"cell_size", cfg.feature.cell_size},
                    {"channel_subset", cfg.feature.channel_subset}};
    j["kcf"] = {{"lambda", cfg.kcf.lambda},
                {"kernel_sigma", cfg.kcf.kernel_sigma},
                {"learning_rate", cfg.kcf.learning_rate},
                {"output_sigma_factor", cfg.kcf.output_sigma_factor},
                {"kernel", kernel_name(cfg.kcf.kernel)}};
    j["grid"] = {{"full_roi_size", cfg.grid.full_roi_size},
                 {"roi_size", cfg.grid.roi_size},
                 {"grid_n", cfg.grid.grid_n},
                 {"psr_threshold", cfg.grid.psr_threshold},
                 {"fusion", fusion_name(cfg.grid.fusion)},
                 {"reuse_training_features", cfg.grid.reuse_training_features}};
    j["coasting_limit"] = cfg.coasting_limit;
    write_text(path, j.dump(2) + "\n");
}

RunConfig parse_run_config(const std::string& json_text, const std::string& origin) {
    const ordered_json j = parse_object(json_text, origin);
    RunConfig cfg;
    try {
        cfg.manifest = j.value("manifest", cfg.manifest);
        cfg.tracker_config = j.value("tracker_config", cfg.tracker_config);
        cfg.feature_map_dir = j.value("feature_map_dir", cfg.feature_map_dir);
        cfg.out_dir = j.value("out_dir", cfg.out_dir);
        if (j.contains("registration"))
            cfg.registration = parse_registration_mode(j.at("registration").get<std::string>());
        cfg.registration_channel = j.value("registration_channel", cfg.registration_channel);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.threads = j.value("threads", cfg.threads);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(origin + ": malformed run config: " + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg = parse_run_config(slurp(path), path);
    cfg.manifest = rebase(path, cfg.manifest);
    cfg.tracker_config = rebase(path, cfg.tracker_config);
    cfg.feature_map_dir = rebase(path, cfg.feature_map_dir);
    return cfg;
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["manifest"] = cfg.manifest;
    j["tracker_config"] = cfg.tracker_config;
    j["feature_map_dir"] = cfg.feature_map_dir;
    j["out_dir"] = cfg.out_dir;
    j["registration"] = registration_mode_name(cfg.registration);
    j["registration_channel"] = cfg.registration_channel;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    write_text(path, j.dump(2) + "\n");
}

} // namespace gridkcf
