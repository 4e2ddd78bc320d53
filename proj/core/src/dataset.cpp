#include "adverin/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "adverin/container.hpp"

namespace adverin {

namespace {

NamedTensor tensor2d(const std::string& name, int h, int w, const std::vector<double>& v) {
    return {name, {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w)}, v};
}

}  // namespace

int Dataset::domain_count() const {
    int max_id = -1;
    for (const auto& s : samples) {
        max_id = std::max(max_id, s.domain_id);
    }
    return max_id + 1;
}

std::vector<std::size_t> Dataset::indices_for_domain(int domain_id) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].domain_id == domain_id) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> Dataset::indices_excluding_domain(int domain_id) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].domain_id != domain_id) {
            out.push_back(i);
        }
    }
    return out;
}

void save_sample(const std::string& path, const Sample& sample) {
    validate(sample);
    const auto& img = sample.image;
    std::vector<NamedTensor> tensors;
    tensors.push_back(tensor2d("image", img.height, img.width, img.data));
    tensors.push_back({"truth",
                       {static_cast<std::uint32_t>(sample.truth.channels),
                        static_cast<std::uint32_t>(sample.truth.height),
                        static_cast<std::uint32_t>(sample.truth.width)},
                       sample.truth.data});
    tensors.push_back({"meta.vrange", {2}, {img.vmin, img.vmax}});
    if (sample.region_labels) {
        const auto& rl = *sample.region_labels;
        std::vector<double> vals(rl.labels.begin(), rl.labels.end());
        tensors.push_back(tensor2d("region_labels", rl.height, rl.width, vals));
    }
    write_container(path, tensors);
}

Sample load_sample(const std::string& path) {
    const auto tensors = read_container(path);

    Sample s;
    const auto& img_t = find_tensor(tensors, "image");
    if (img_t.dims.size() != 2) {
        throw std::runtime_error("sample: 'image' must be 2-d");
    }
    s.image.height = static_cast<int>(img_t.dims[0]);
    s.image.width = static_cast<int>(img_t.dims[1]);
    s.image.data = img_t.values;

    const auto& vr = find_tensor(tensors, "meta.vrange");
    if (vr.values.size() != 2) {
        throw std::runtime_error("sample: 'meta.vrange' must have 2 values");
    }
    s.image.vmin = vr.values[0];
    s.image.vmax = vr.values[1];
    // Widen for float32 round-off so stored pixels stay inside the range.
    for (double v : s.image.data) {
        s.image.vmin = std::min(s.image.vmin, v);
        s.image.vmax = std::max(s.image.vmax, v);
    }

    const auto& truth_t = find_tensor(tensors, "truth");
    if (truth_t.dims.size() != 3) {
        throw std::runtime_error("sample: 'truth' must be 3-d");
    }
    s.truth.channels = static_cast<int>(truth_t.dims[0]);
    s.truth.height = static_cast<int>(truth_t.dims[1]);
    s.truth.width = static_cast<int>(truth_t.dims[2]);
    s.truth.data = truth_t.values;

    if (const auto* rl_t = find_tensor_opt(tensors, "region_labels")) {
        if (rl_t->dims.size() != 2) {
            throw std::runtime_error("sample: 'region_labels' must be 2-d");
        }
        RegionLabels rl;
        rl.height = static_cast<int>(rl_t->dims[0]);
        rl.width = static_cast<int>(rl_t->dims[1]);
        rl.labels.resize(rl_t->values.size());
        int max_label = -1;
        for (std::size_t i = 0; i < rl_t->values.size(); ++i) {
            rl.labels[i] = static_cast<int>(rl_t->values[i]);
            max_label = std::max(max_label, rl.labels[i]);
        }
        rl.k = max_label + 1;
        s.region_labels = std::move(rl);
    }
    return s;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << "sample_id,domain_id,path\n";
    for (const auto& e : entries) {
        if (e.sample_id.find_first_of(",\n\r") != std::string::npos ||
            e.path.find_first_of(",\n\r") != std::string::npos) {
            throw std::invalid_argument("manifest fields must not contain commas or newlines");
        }
        out << e.sample_id << ',' << e.domain_id << ',' << e.path << '\n';
    }
    if (!out.flush()) {
        throw std::runtime_error("failed writing manifest '" + path + "'");
    }
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("manifest '" + path + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "sample_id,domain_id,path") {
        throw std::runtime_error("manifest '" + path + "' has unexpected header");
    }
    std::vector<ManifestEntry> entries;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) {
            throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                     ": expected 3 fields");
        }
        ManifestEntry e;
        e.sample_id = line.substr(0, c1);
        const std::string dom = line.substr(c1 + 1, c2 - c1 - 1);
        e.path = line.substr(c2 + 1);
        try {
            std::size_t used = 0;
            e.domain_id = std::stoi(dom, &used);
            if (used != dom.size()) {
                throw std::invalid_argument(dom);
            }
        } catch (const std::exception&) {
            throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                     ": bad domain id '" + dom + "'");
        }
        if (e.sample_id.empty() || e.path.empty()) {
            throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                     ": empty field");
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

Dataset load_dataset(const std::string& manifest_path) {
    const auto entries = read_manifest(manifest_path);
    const auto base = std::filesystem::path(manifest_path).parent_path();
    Dataset ds;
    ds.samples.reserve(entries.size());
    for (const auto& e : entries) {
        std::filesystem::path p(e.path);
        if (p.is_relative()) {
            p = base / p;
        }
        Sample s = load_sample(p.string());
        s.sample_id = e.sample_id;
        s.domain_id = e.domain_id;
        validate(s);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace adverin
