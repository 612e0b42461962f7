#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vocscreen {

// Provenance record for one CLI run. Output entries keep file names relative
// to the run directory and a content digest, so re-running with the same seed
// yields a byte-identical manifest. The timestamp is the toolkit build stamp
// for the same reason.
class RunManifest {
public:
    RunManifest(std::string command, std::uint64_t seed);

    void add_config(const std::string& path);
    void set_input_digest(const std::string& digest);

    // Writes content under dir/name and records (name, digest).
    void write_output(const std::string& dir, const std::string& name, const std::string& content);

    // Serializes the manifest itself to dir/manifest.json (listed last,
    // without its own digest).
    void save(const std::string& dir);

    std::string to_json() const;

private:
    std::string command_;
    std::uint64_t seed_;
    std::vector<std::string> config_paths_;
    std::string input_digest_;
    std::vector<std::pair<std::string, std::string>> outputs_;  // name, digest
};

// Digest of a file's bytes (FNV-1a 64, hex).
std::string file_digest(const std::string& path);

}  // namespace vocscreen
