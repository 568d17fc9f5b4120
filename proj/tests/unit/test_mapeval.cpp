#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "korpusmap/error.hpp"
#include "korpusmap/mapeval.hpp"
#include "oracles.hpp"

using namespace korpusmap;

namespace {

DenseMatrix uniform_points(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DenseMatrix y(n, 2);
    for (double& v : y.values()) v = u(rng);
    return y;
}

std::vector<std::string> random_labels(std::size_t n, std::size_t groups, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, groups - 1);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("g" + std::to_string(pick(rng)));
    return labels;
}

// Occupancy counted independently: cell index by floor, clamped at the top.
double occupancy_by_set(const DenseMatrix& y, std::size_t cells) {
    double lo[2] = {INFINITY, INFINITY}, hi[2] = {-INFINITY, -INFINITY};
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t c = 0; c < 2; ++c) {
            lo[c] = std::min(lo[c], y(i, c));
            hi[c] = std::max(hi[c], y(i, c));
        }
    std::set<std::pair<long, long>> seen;
    for (std::size_t i = 0; i < y.rows(); ++i) {
        long cell[2];
        for (std::size_t c = 0; c < 2; ++c) {
            const double extent = hi[c] - lo[c];
            cell[c] = extent > 0 ? std::min<long>(static_cast<long>(std::floor((y(i, c) - lo[c]) / extent * cells)),
                                                  static_cast<long>(cells) - 1)
                                 : 0;
        }
        seen.insert({cell[0], cell[1]});
    }
    return static_cast<double>(seen.size()) / static_cast<double>(cells * cells);
}

}  // namespace

TEST_SUITE("mapeval") {

TEST_CASE("two distant clusters agree perfectly") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    DenseMatrix y(40, 2);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < 40; ++i) {
        y(i, 0) = (i < 20 ? -100.0 : 100.0) + n(rng);
        y(i, 1) = n(rng);
        labels.push_back(i < 20 ? "left" : "right");
    }
    CHECK(knn_label_agreement(y, labels, 5) == 1.0);
}

TEST_CASE("single label agrees perfectly") {
    std::mt19937_64 rng(2);
    const DenseMatrix y = uniform_points(30, rng);
    CHECK(knn_label_agreement(y, std::vector<std::string>(30, "x"), 7) == 1.0);
}

TEST_CASE("distance ties go to the lower index") {
    // Point 0 has points 1 (label b) and 2 (label a) both at distance 1;
    // taking point 1 scores 0 for it, taking point 2 would score 1.
    const DenseMatrix y(4, 2, {0, 0, 1, 0, -1, 0, 0, 5});
    const std::vector<std::string> labels{"a", "b", "a", "a"};
    const double expected = (0.0 + 0.0 + 1.0 + 1.0) / 4.0;
    CHECK(knn_label_agreement(y, labels, 1) == doctest::Approx(expected));
    CHECK(oracle::knn_label_agreement(y, labels, 1) == doctest::Approx(expected));
}

TEST_CASE("unlabeled points are excluded in both roles") {
    const DenseMatrix y(5, 2, {0, 0, 0.1, 0, 10, 0, 10.1, 0, 0.05, 0});
    const std::vector<std::string> labels{"a", "a", "b", "b", "unlabeled"};
    CHECK(knn_label_agreement(y, labels, 1) == 1.0);
    CHECK_THROWS_AS(knn_label_agreement(y, std::vector<std::string>(5, "unlabeled"), 1), PreconditionError);
    CHECK_THROWS_AS(knn_label_agreement(y, labels, 4), PreconditionError);
    CHECK_THROWS_AS(knn_label_agreement(y, std::vector<std::string>{"a"}, 1), PreconditionError);
}

TEST_CASE("random labels give chance agreement") {
    // With labels drawn independently and uniformly from 4 groups, each
    // neighbor matches with probability exactly 1/4.
    std::mt19937_64 rng(20240105);
    std::vector<double> values;
    for (int seed = 0; seed < 100; ++seed) {
        const DenseMatrix y = uniform_points(400, rng);
        const auto labels = random_labels(400, 4, rng);
        const double a = knn_label_agreement(y, labels, 10);
        if (seed < 5) CHECK(std::abs(a - oracle::knn_label_agreement(y, labels, 10)) <= 1e-12);
        values.push_back(a);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= 100.0;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / 99.0);
    CHECK(std::abs(mean - 0.25) <= 3.0 * sd / 10.0);
    // Binomial spread of a single map over 400 x 10 neighbor draws, widened
    // by the correlation between overlapping neighborhoods.
    const double binomial = std::sqrt(0.25 * 0.75 / 4000.0);
    CHECK(sd >= binomial);
    CHECK(sd <= 3.0 * binomial);
}

TEST_CASE("agreement matches the full-sort oracle") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        DenseMatrix y = uniform_points(120, rng);
        // Snap to a coarse lattice so that distance ties are common.
        for (double& v : y.values()) v = std::round(v * 6.0);
        auto labels = random_labels(120, 3, rng);
        labels[5] = labels[17] = "unlabeled";
        for (std::size_t k : {1u, 4u, 10u})
            CHECK(std::abs(knn_label_agreement(y, labels, k) - oracle::knn_label_agreement(y, labels, k)) <= 1e-12);
    }
}

TEST_CASE("occupancy examples") {
    CHECK(grid_occupancy(DenseMatrix(10, 2, 3.5)) == doctest::Approx(1.0 / 400.0));
    DenseMatrix lattice(400, 2);
    for (std::size_t r = 0; r < 20; ++r)
        for (std::size_t c = 0; c < 20; ++c) {
            lattice(r * 20 + c, 0) = static_cast<double>(c);
            lattice(r * 20 + c, 1) = static_cast<double>(r);
        }
    CHECK(grid_occupancy(lattice) == 1.0);
    // A vertical line: the x axis collapses to one cell span.
    DenseMatrix line(20, 2);
    for (std::size_t i = 0; i < 20; ++i) line(i, 1) = static_cast<double>(i);
    CHECK(grid_occupancy(line) == doctest::Approx(20.0 / 400.0));
    CHECK(grid_occupancy(DenseMatrix(1, 2, {4.0, 2.0}), 5) == doctest::Approx(1.0 / 25.0));
    CHECK_THROWS_AS(grid_occupancy(DenseMatrix(0, 2)), PreconditionError);
}

TEST_CASE("uniform 2000 points nearly fill the grid") {
    std::mt19937_64 rng(20240106);
    int high = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const DenseMatrix y = uniform_points(2000, rng);
        const double occ = grid_occupancy(y, 20);
        if (t < 20) CHECK(occ == occupancy_by_set(y, 20));
        if (occ >= 0.95) ++high;
    }
    CHECK(static_cast<double>(high) / trials > 0.99);
}

TEST_CASE("metrics are invariant to translation and uniform scaling") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        std::normal_distribution<double> n;
        DenseMatrix y(300, 2);
        for (double& v : y.values()) v = n(rng);
        const auto labels = random_labels(300, 3, rng);
        DenseMatrix moved = y;
        for (std::size_t i = 0; i < 300; ++i) {
            moved(i, 0) = 4.0 * y(i, 0) + 7.0;
            moved(i, 1) = 4.0 * y(i, 1) - 3.0;
        }
        CHECK(knn_label_agreement(moved, labels, 10) == knn_label_agreement(y, labels, 10));
        CHECK(grid_occupancy(moved) == grid_occupancy(y));
    }
}

TEST_CASE("agreement is invariant to label renaming") {
    std::mt19937_64 rng(10);
    const DenseMatrix y = uniform_points(200, rng);
    const auto labels = random_labels(200, 4, rng);
    const std::map<std::string, std::string> rename{{"g0", "zeta"}, {"g1", "alpha"}, {"g2", "g3"}, {"g3", "g2"}};
    std::vector<std::string> renamed;
    for (const auto& l : labels) renamed.push_back(rename.at(l));
    CHECK(knn_label_agreement(y, renamed, 10) == knn_label_agreement(y, labels, 10));
}

TEST_CASE("metrics text round-trip") {
    const std::vector<MapMetrics> metrics{{"institution", 0.9475, 0.3125, 10, 20},
                                          {"keyword:a,b", 1.0 / 3.0, 0.0025, 5, 40}};
    const std::string text = format_metrics(metrics);
    CHECK(text.find("[keyword:a,b]\nk = 5\ngrid = 40\n") != std::string::npos);
    CHECK(parse_metrics(text) == metrics);
    CHECK_THROWS_AS(parse_metrics("[x\nk = 1\n"), FormatError);
    CHECK_THROWS_AS(parse_metrics("k = 1\n"), FormatError);
}

TEST_CASE("evaluate_map bundles both metrics") {
    std::mt19937_64 rng(11);
    const DenseMatrix y = uniform_points(50, rng);
    const auto labels = random_labels(50, 2, rng);
    const MapMetrics m = evaluate_map(y, labels, "institution", 6, 8);
    CHECK(m.scheme == "institution");
    CHECK(m.k == 6);
    CHECK(m.grid == 8);
    CHECK(m.knn_agreement == knn_label_agreement(y, labels, 6));
    CHECK(m.occupancy == grid_occupancy(y, 8));
}

}
