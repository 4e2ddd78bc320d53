#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace adverin {

// One named tensor as stored in the .adin container. Values are carried
// as 64-bit reals in memory and written as f32 on disk; the narrowing is
// explicit and happens only at this I/O boundary.
struct NamedTensor {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<double> values;
};

// Writes the bit-exact little-endian container:
//   magic "ADIN" | version u32=1 | tensor_count u32 |
//   per tensor: name_len u32, name bytes, ndims u32, dims u32*ndims,
//               payload f32*prod(dims).
// Throws std::invalid_argument on empty/duplicate names or dim/value
// mismatch, std::runtime_error on I/O failure.
void write_container(const std::string& path, const std::vector<NamedTensor>& tensors);

// Inverse of write_container. Throws std::runtime_error with "bad magic",
// "version mismatch" or "truncated" in the message as appropriate.
std::vector<NamedTensor> read_container(const std::string& path);

// Convenience lookup; throws std::runtime_error if absent.
const NamedTensor& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name);
const NamedTensor* find_tensor_opt(const std::vector<NamedTensor>& tensors,
                                   const std::string& name);

}  // namespace adverin
