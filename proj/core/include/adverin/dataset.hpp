#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "adverin/image.hpp"

namespace adverin {

struct ManifestEntry {
    std::string sample_id;
    int domain_id = 0;
    std::string path;
};

struct Dataset {
    std::vector<Sample> samples;

    int domain_count() const;
    std::vector<std::size_t> indices_for_domain(int domain_id) const;
    std::vector<std::size_t> indices_excluding_domain(int domain_id) const;
};

void save_sample(const std::string& path, const Sample& sample);
Sample load_sample(const std::string& path);

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::string& path);

// Loads every sample listed in the manifest; relative paths resolve against
// the manifest's directory.
Dataset load_dataset(const std::string& manifest_path);

}  // namespace adverin
