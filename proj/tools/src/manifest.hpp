#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trajseq::cli {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Provenance record written next to each stage's outputs as
/// <stage>.manifest.json. The timestamp lives here and nowhere else, so
/// artifacts themselves are byte-reproducible.
struct Manifest {
    std::string stage;
    std::string version;
    std::string config_hash;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    std::vector<std::string> notes;  ///< warnings raised while running the stage
};

/// Hashes every input and output and writes the manifest into `dir`.
void write_manifest(const std::filesystem::path& dir, const Manifest& m);

}  // namespace trajseq::cli
