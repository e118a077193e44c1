#pragma once

#include <cstdint>
#include <string>

#include "gridkcf/tracker.hpp"

namespace gridkcf {

enum class RegistrationMode {
    off,           // track in stored frame coordinates
    from_manifest, // warp with the manifest's to-canonical homographies
    estimate,      // estimate per-frame homographies and accumulate to frame 0
};

// Accepted names: "off", "from-manifest", "estimate".
RegistrationMode parse_registration_mode(const std::string& name);
std::string registration_mode_name(RegistrationMode mode);

// Everything a track run needs. Input paths in the JSON are resolved relative
// to the config file's directory on load; out_dir stays relative to the
// working directory.
struct RunConfig {
    std::string manifest;        // sequence manifest path
    std::string tracker_config;  // tracker config path; empty = built-in defaults
    std::string feature_map_dir; // FMAP directory, required for deep-from-file
    std::string out_dir = "out";
    RegistrationMode registration = RegistrationMode::off;
    int registration_channel = -1; // source channel for estimation; -1 = gray view
    std::uint64_t seed = 1;
    int threads = 0; // worker count; 0 = hardware concurrency

    void validate() const;
};

Kernel parse_kernel(const std::string& name);
std::string kernel_name(Kernel k);

TrackerConfig parse_tracker_config(const std::string& json_text, const std::string& origin);
TrackerConfig load_tracker_config(const std::string& path);
void save_tracker_config(const TrackerConfig& cfg, const std::string& path);

RunConfig parse_run_config(const std::string& json_text, const std::string& origin);
RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

} // namespace gridkcf
