#include "vocscreen/report.hpp"

#include <filesystem>

#include "json.hpp"
#include "vocscreen/common.hpp"

namespace vocscreen {

using nlohmann::json;

namespace {
// Build stamp rather than wall clock: rerunning a command with the same seed
// must reproduce the manifest byte for byte.
const char* kBuildStamp = __DATE__ " " __TIME__;
}  // namespace

RunManifest::RunManifest(std::string command, std::uint64_t seed)
    : command_(std::move(command)), seed_(seed) {}

void RunManifest::add_config(const std::string& path) { config_paths_.push_back(path); }

void RunManifest::set_input_digest(const std::string& digest) { input_digest_ = digest; }

void RunManifest::write_output(const std::string& dir, const std::string& name,
                               const std::string& content) {
    std::filesystem::create_directories(dir);
    write_file((std::filesystem::path(dir) / name).string(), content);
    outputs_.emplace_back(name, fnv1a64_hex(content));
}

std::string RunManifest::to_json() const {
    json j;
    j["command"] = command_;
    j["configs"] = config_paths_;
    if (!input_digest_.empty()) j["input_digest"] = input_digest_;
    j["master_seed"] = seed_;
    j["version"] = kVersion;
    j["timestamp"] = kBuildStamp;
    j["outputs"] = json::array();
    for (const auto& [name, digest] : outputs_)
        j["outputs"].push_back({{"file", name}, {"digest", digest}});
    return j.dump(2) + "\n";
}

void RunManifest::save(const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_file((std::filesystem::path(dir) / "manifest.json").string(), to_json());
}

std::string file_digest(const std::string& path) { return fnv1a64_hex(read_file(path)); }

}  // namespace vocscreen
