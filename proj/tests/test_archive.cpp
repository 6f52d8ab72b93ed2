#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lsrna/archive.hpp"
#include "lsrna/image_io.hpp"
#include "lsrna/rng.hpp"
#include "lsrna/tensor.hpp"

using namespace lsrna;
namespace fs = std::filesystem;

TEST_CASE("tensor archive round-trips bitwise") {
    TensorArchive arch;
    Rng rng(21);
    Tensor a = rng.normal_tensor(5, 7, 3);
    Tensor b = rng.normal_tensor(1, 1, 16);
    arch.put("alpha", a);
    arch.put("beta", b);

    const std::string path = (fs::temp_directory_path() / "lsrna_arch_test.lta").string();
    arch.save(path);
    auto loaded = TensorArchive::load(path);

    REQUIRE(loaded.contains("alpha"));
    REQUIRE(loaded.contains("beta"));
    CHECK(loaded.get("alpha").same_shape(a));
    CHECK(loaded.get("alpha").data == a.data);  // bitwise
    CHECK(loaded.get("beta").data == b.data);
    fs::remove(path);
}

TEST_CASE("archive save is deterministic byte-for-byte") {
    TensorArchive arch;
    Rng rng(22);
    arch.put("z", rng.normal_tensor(3, 3, 2));
    arch.put("a", rng.normal_tensor(2, 2, 1));
    const auto p1 = (fs::temp_directory_path() / "lsrna_arch_d1.lta").string();
    const auto p2 = (fs::temp_directory_path() / "lsrna_arch_d2.lta").string();
    arch.save(p1);
    arch.save(p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
    CHECK(s1.substr(0, 8) == "LSRNATA1");
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("missing entries and corrupt files are rejected") {
    TensorArchive arch;
    CHECK_THROWS(arch.get("nope"));
    const auto p = (fs::temp_directory_path() / "lsrna_arch_bad.lta").string();
    std::ofstream(p) << "not an archive at all";
    CHECK_THROWS(TensorArchive::load(p));
    fs::remove(p);
}

TEST_CASE("png io round-trips 8-bit content exactly") {
    RgbImage img(9, 11, 3);
    Rng rng(23);
    for (float& v : img.data)
        v = static_cast<float>(rng.uniform_int(256)) / 255.0f;
    const auto p = (fs::temp_directory_path() / "lsrna_io_test.png").string();
    write_png(p, img);
    RgbImage back = read_png(p);
    REQUIRE(back.same_shape(img));
    CHECK(max_abs_diff(back, img) < 1e-6f);
    fs::remove(p);
}

TEST_CASE("gray png export quantizes to 8 bits") {
    Tensor map(4, 4, 1);
    for (int i = 0; i < 16; ++i) map.data[i] = i / 15.0f;
    const auto p = (fs::temp_directory_path() / "lsrna_io_gray.png").string();
    write_png_gray(p, map);
    CHECK(fs::exists(p));
    fs::remove(p);
}
