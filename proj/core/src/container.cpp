#include "adverin/container.hpp"

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <unordered_set>

namespace adverin {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'I', 'N'};
constexpr std::uint32_t kVersion = 1;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32(out, bits);
}

class Reader {
public:
    Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = static_cast<std::uint32_t>(data_[pos_]) |
                          (static_cast<std::uint32_t>(data_[pos_ + 1]) << 8) |
                          (static_cast<std::uint32_t>(data_[pos_ + 2]) << 16) |
                          (static_cast<std::uint32_t>(data_[pos_ + 3]) << 24);
        pos_ += 4;
        return v;
    }

    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }

    bool exhausted() const { return pos_ == size_; }

private:
    void need(std::size_t n) {
        if (size_ - pos_ < n) {
            throw std::runtime_error("container: truncated file");
        }
    }

    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

}  // namespace

void write_container(const std::string& path, const std::vector<NamedTensor>& tensors) {
    if (tensors.empty()) {
        throw std::invalid_argument("container: no tensors");
    }
    std::unordered_set<std::string> seen;
    for (const auto& t : tensors) {
        if (t.name.empty()) {
            throw std::invalid_argument("container: empty tensor name");
        }
        if (!seen.insert(t.name).second) {
            throw std::invalid_argument("container: duplicate tensor name '" + t.name + "'");
        }
        std::size_t count = 1;
        for (std::uint32_t d : t.dims) {
            count *= d;
        }
        if (count != t.values.size()) {
            throw std::invalid_argument("container: dims/value mismatch for '" + t.name + "'");
        }
    }

    std::vector<std::uint8_t> buf;
    buf.insert(buf.end(), kMagic, kMagic + 4);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        put_u32(buf, static_cast<std::uint32_t>(t.name.size()));
        buf.insert(buf.end(), t.name.begin(), t.name.end());
        put_u32(buf, static_cast<std::uint32_t>(t.dims.size()));
        for (std::uint32_t d : t.dims) {
            put_u32(buf, d);
        }
        for (double v : t.values) {
            put_f32(buf, static_cast<float>(v));
        }
    }

    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) {
        throw std::runtime_error("container: cannot open '" + path + "' for writing");
    }
    if (std::fwrite(buf.data(), 1, buf.size(), f.get()) != buf.size()) {
        throw std::runtime_error("container: short write to '" + path + "'");
    }
    if (std::fflush(f.get()) != 0) {
        throw std::runtime_error("container: flush failed for '" + path + "'");
    }
}

std::vector<NamedTensor> read_container(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) {
        throw std::runtime_error("container: cannot open '" + path + "'");
    }
    std::vector<std::uint8_t> buf;
    std::uint8_t chunk[1 << 16];
    std::size_t n;
    while ((n = std::fread(chunk, 1, sizeof chunk, f.get())) > 0) {
        buf.insert(buf.end(), chunk, chunk + n);
    }
    if (std::ferror(f.get())) {
        throw std::runtime_error("container: read error on '" + path + "'");
    }

    Reader r(buf.data(), buf.size());
    const std::string magic = r.bytes(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        throw std::runtime_error("container: bad magic in '" + path + "'");
    }
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw std::runtime_error("container: version mismatch in '" + path + "'");
    }
    const std::uint32_t count = r.u32();
    std::vector<NamedTensor> tensors;
    tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        const std::uint32_t name_len = r.u32();
        t.name = r.bytes(name_len);
        const std::uint32_t ndims = r.u32();
        t.dims.resize(ndims);
        std::size_t total = 1;
        for (std::uint32_t d = 0; d < ndims; ++d) {
            t.dims[d] = r.u32();
            total *= t.dims[d];
        }
        t.values.resize(total);
        for (std::size_t v = 0; v < total; ++v) {
            t.values[v] = static_cast<double>(r.f32());
        }
        tensors.push_back(std::move(t));
    }
    if (!r.exhausted()) {
        throw std::runtime_error("container: trailing bytes in '" + path + "'");
    }
    return tensors;
}

const NamedTensor* find_tensor_opt(const std::vector<NamedTensor>& tensors,
                                   const std::string& name) {
    for (const auto& t : tensors) {
        if (t.name == name) {
            return &t;
        }
    }
    return nullptr;
}

const NamedTensor& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
    const NamedTensor* t = find_tensor_opt(tensors, name);
    if (!t) {
        throw std::runtime_error("container: missing tensor '" + name + "'");
    }
    return *t;
}

}  // namespace adverin
