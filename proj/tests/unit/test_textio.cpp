#include <doctest.h>

#include <filesystem>
#include <random>

#include "korpusmap/error.hpp"
#include "korpusmap/textio.hpp"
#include "scratch.hpp"

using namespace korpusmap;

TEST_SUITE("textio") {

TEST_CASE("sparse triplets round-trip exactly") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const DocTermMatrix m(3, 5, {0, 2, 2, 5}, {1, 4, 0, 2, 3}, {u(rng), 1.0 / 3.0, u(rng), 1e-300, 7.25});
    const std::string text = format_triplets(m);
    CHECK(text.rfind("3 5 5\n", 0) == 0);
    CHECK(parse_sparse_triplets(text) == m);
}

TEST_CASE("dense triplets round-trip exactly and store every entry") {
    const DenseMatrix m(2, 2, {0.1, 0.0, -2.5, 1.0 / 7.0});
    const std::string text = format_triplets(m);
    CHECK(text.rfind("2 2 4\n", 0) == 0);
    CHECK(parse_dense_triplets(text) == m);
}

TEST_CASE("triplet parsing sorts entries and drops sparse zeros") {
    const auto m = parse_sparse_triplets("2 3 3\n1 2 0.5\n0 1 0\n0 0 2\n");
    CHECK(m.nnz() == 2);
    CHECK(m.row_ptr() == std::vector<std::size_t>{0, 1, 2});
    CHECK(m.weights() == std::vector<double>{2.0, 0.5});
}

TEST_CASE("malformed triplets are rejected") {
    CHECK_THROWS_AS(parse_sparse_triplets("2 2 1\n0 0 1\n0 0 2\n"), FormatError);
    CHECK_THROWS_AS(parse_sparse_triplets("2 2 1\n5 0 1\n"), FormatError);
    CHECK_THROWS_AS(parse_sparse_triplets("2 2 2\n0 0 1\n"), FormatError);
    CHECK_THROWS_AS(parse_dense_triplets("1 2 1\n0 0 1\n"), FormatError);
    CHECK_THROWS_AS(parse_dense_triplets("nonsense"), FormatError);
}

TEST_CASE("atomic writes replace the file and leave no temporaries") {
    const auto dir = scratch_dir("textio-atomic");
    const auto path = dir / "artifact.txt";
    write_file_atomic(path, "first");
    write_file_atomic(path, "second");
    CHECK(read_file(path) == "second");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);
    CHECK_THROWS_AS(read_file(dir / "missing.txt"), Error);
}

TEST_CASE("format_double uses the C locale and the requested digits") {
    CHECK(format_double(0.1, 9) == "0.1");
    CHECK(format_double(1.0 / 3.0, 9) == "0.333333333");
    CHECK(format_double(1e-20, 6) == "1e-20");
}

}
