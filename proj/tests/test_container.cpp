#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "adverin/container.hpp"
#include "adverin/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace adverin;
using testutil::TempDir;

namespace {

void push_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void push_f32(std::vector<unsigned char>& out, double v) {
    push_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

}  // namespace

TEST_CASE("container bytes match the documented little-endian layout") {
    TempDir tmp("container");
    const std::string path = tmp.str("golden.adin");

    NamedTensor t;
    t.name = "ab";
    t.dims = {2, 2};
    t.values = {1.0, 0.5, -2.0, 3.25};
    write_container(path, {t});

    std::vector<unsigned char> expected;
    expected.insert(expected.end(), {'A', 'D', 'I', 'N'});
    push_u32(expected, 1);  // version
    push_u32(expected, 1);  // tensor count
    push_u32(expected, 2);  // name length
    expected.push_back('a');
    expected.push_back('b');
    push_u32(expected, 2);  // ndims
    push_u32(expected, 2);
    push_u32(expected, 2);
    for (double v : t.values) {
        push_f32(expected, v);
    }

    CHECK(testutil::slurp(path) == expected);
}

TEST_CASE("container round-trips fuzzed tensor sets exactly") {
    TempDir tmp("container");
    Rng rng(42);

    for (int iter = 0; iter < 50; ++iter) {
        std::vector<NamedTensor> tensors;
        const int count = 1 + static_cast<int>(rng.below(4));
        for (int i = 0; i < count; ++i) {
            NamedTensor t;
            t.name = "t" + std::to_string(iter) + "_" + std::to_string(i);
            const int ndims = 1 + static_cast<int>(rng.below(3));
            std::size_t total = 1;
            for (int d = 0; d < ndims; ++d) {
                const std::uint32_t dim = 1 + static_cast<std::uint32_t>(rng.below(5));
                t.dims.push_back(dim);
                total *= dim;
            }
            for (std::size_t v = 0; v < total; ++v) {
                // Payload is f32 on disk, so draw values that f32 represents.
                const float f = static_cast<float>(rng.normal() * 100.0);
                t.values.push_back(static_cast<double>(f));
            }
            tensors.push_back(std::move(t));
        }

        const std::string path = tmp.str("fuzz.adin");
        write_container(path, tensors);
        const auto back = read_container(path);

        REQUIRE(back.size() == tensors.size());
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            CHECK(back[i].name == tensors[i].name);
            CHECK(back[i].dims == tensors[i].dims);
            CHECK(back[i].values == tensors[i].values);
        }
    }
}

TEST_CASE("container write rejects malformed tensor sets") {
    TempDir tmp("container");
    const std::string path = tmp.str("bad.adin");

    NamedTensor ok{"a", {2}, {1.0, 2.0}};
    CHECK_THROWS_AS(write_container(path, {NamedTensor{"", {1}, {0.0}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(write_container(path, {ok, ok}), std::invalid_argument);
    CHECK_THROWS_AS(write_container(path, {NamedTensor{"a", {3}, {1.0}}}),
                    std::invalid_argument);
}

TEST_CASE("container read reports bad magic, version mismatch and truncation") {
    TempDir tmp("container");
    const std::string path = tmp.str("mut.adin");
    write_container(path, {NamedTensor{"w", {2, 2}, {1.0, 2.0, 3.0, 4.0}}});
    const auto good = testutil::slurp(path);

    auto write_bytes = [&](std::vector<unsigned char> bytes) {
        std::ofstream out(path, std::ios::binary);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    };

    auto corrupted = good;
    corrupted[0] = 'X';
    write_bytes(corrupted);
    CHECK_THROWS_WITH_AS(read_container(path), doctest::Contains("bad magic"),
                         std::runtime_error);

    corrupted = good;
    corrupted[4] = 9;
    write_bytes(corrupted);
    CHECK_THROWS_WITH_AS(read_container(path), doctest::Contains("version mismatch"),
                         std::runtime_error);

    corrupted = good;
    corrupted.resize(good.size() - 3);
    write_bytes(corrupted);
    CHECK_THROWS_WITH_AS(read_container(path), doctest::Contains("truncated"),
                         std::runtime_error);

    corrupted = good;
    corrupted.resize(10);
    write_bytes(corrupted);
    CHECK_THROWS_WITH_AS(read_container(path), doctest::Contains("truncated"),
                         std::runtime_error);
}

TEST_CASE("find_tensor locates by name and reports absence") {
    std::vector<NamedTensor> tensors{{"a", {1}, {1.0}}, {"b", {1}, {2.0}}};
    CHECK(find_tensor(tensors, "b").values[0] == 2.0);
    CHECK(find_tensor_opt(tensors, "c") == nullptr);
    CHECK_THROWS_AS(find_tensor(tensors, "c"), std::runtime_error);
}
