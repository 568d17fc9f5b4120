#include <doctest.h>

#include <cmath>
#include <random>

#include "korpusmap/error.hpp"
#include "korpusmap/quadtree.hpp"

using namespace korpusmap;

namespace {

DenseMatrix gaussian(std::size_t rows, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sd);
    DenseMatrix m(rows, 2);
    for (double& v : m.values()) v = normal(rng);
    return m;
}

double brute_repulsion(const DenseMatrix& y, std::size_t i, std::array<double, 2>& force) {
    double z = 0.0;
    for (std::size_t j = 0; j < y.rows(); ++j) {
        if (j == i) continue;
        const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
        const double w = 1.0 / (1.0 + dx * dx + dy * dy);
        z += w;
        force[0] += w * w * dx;
        force[1] += w * w * dy;
    }
    return z;
}

}  // namespace

TEST_SUITE("quadtree") {

TEST_CASE("root summarizes every point") {
    const DenseMatrix y = gaussian(300, 1, 4.0);
    const QuadTree tree(y);
    const auto& root = tree.nodes().front();
    CHECK(root.count == 300);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < 300; ++i) {
        mx += y(i, 0);
        my += y(i, 1);
    }
    mx /= 300;
    my /= 300;
    double xx = 0, xy = 0, yy = 0;
    for (std::size_t i = 0; i < 300; ++i) {
        xx += (y(i, 0) - mx) * (y(i, 0) - mx);
        xy += (y(i, 0) - mx) * (y(i, 1) - my);
        yy += (y(i, 1) - my) * (y(i, 1) - my);
    }
    CHECK(root.com_x == doctest::Approx(mx).epsilon(1e-12));
    CHECK(root.com_y == doctest::Approx(my).epsilon(1e-12));
    CHECK(root.m_xx == doctest::Approx(xx).epsilon(1e-10));
    CHECK(root.m_xy == doctest::Approx(xy).epsilon(1e-10));
    CHECK(root.m_yy == doctest::Approx(yy).epsilon(1e-10));
    for (std::size_t i = 0; i < 300; ++i) {
        CHECK(std::abs(y(i, 0) - root.center_x) <= root.half_width);
        CHECK(std::abs(y(i, 1) - root.center_y) <= root.half_width);
    }
}

TEST_CASE("child counts add up to the parent") {
    const QuadTree tree(gaussian(500, 2));
    for (const auto& node : tree.nodes()) {
        if (node.first_child < 0) continue;
        std::size_t sum = 0;
        for (int q = 0; q < 4; ++q) sum += tree.nodes()[static_cast<std::size_t>(node.first_child + q)].count;
        CHECK(sum == node.count);
    }
}

TEST_CASE("duplicate points share one leaf") {
    DenseMatrix y = gaussian(20, 3);
    for (std::size_t i = 1; i < 8; ++i) {
        y(i, 0) = y(0, 0);
        y(i, 1) = y(0, 1);
    }
    const QuadTree tree(y);
    for (std::size_t i = 0; i < 8; ++i) CHECK(tree.leaf_size_of(i) == 8);
    CHECK(tree.leaf_size_of(10) == 1);
}

TEST_CASE("depth cap chains nearby points") {
    DenseMatrix y(3, 2, {0.0, 0.0, 1e-9, 0.0, 1.0, 1.0});
    const QuadTree shallow(y, 4);
    CHECK(shallow.depth() <= 4);
    CHECK(shallow.leaf_size_of(0) == 2);
    const QuadTree deep(y);
    CHECK(deep.leaf_size_of(0) == 1);
    CHECK_THROWS_AS(QuadTree(y, QuadTree::kMaxDepth + 1), PreconditionError);
    CHECK_THROWS_AS(QuadTree(DenseMatrix(3, 3)), PreconditionError);
}

TEST_CASE("theta 0 equals brute-force summation") {
    DenseMatrix y = gaussian(200, 5, 3.0);
    y(7, 0) = y(8, 0);
    y(7, 1) = y(8, 1);
    const QuadTree tree(y);
    for (std::size_t i = 0; i < 200; ++i) {
        std::array<double, 2> f{0, 0}, g{0, 0};
        const double z = tree.repulsion(i, 0.0, f);
        const double zb = brute_repulsion(y, i, g);
        CHECK(std::abs(z - zb) <= 1e-12 * zb);
        CHECK(std::abs(f[0] - g[0]) <= 1e-12);
        CHECK(std::abs(f[1] - g[1]) <= 1e-12);
    }
}

TEST_CASE("approximation error grows with theta") {
    const DenseMatrix y = gaussian(1000, 6, 10.0);
    const QuadTree tree(y);
    auto errors = [&](double theta) {
        double worst = 0.0, approx = 0.0, exact = 0.0;
        for (std::size_t i = 0; i < 1000; ++i) {
            std::array<double, 2> f{0, 0}, g{0, 0};
            const double z = tree.repulsion(i, theta, f);
            const double zb = brute_repulsion(y, i, g);
            worst = std::max(worst, std::abs(z - zb) / zb);
            approx += z;
            exact += zb;
        }
        return std::pair{worst, std::abs(approx - exact) / exact};
    };
    const auto [fine_worst, fine_total] = errors(0.2);
    const auto [mid_worst, mid_total] = errors(0.5);
    CHECK(fine_worst <= 2e-3);
    CHECK(fine_total <= 1e-3);
    CHECK(mid_total <= 1e-2);
    CHECK(fine_worst < mid_worst);
}

TEST_CASE("single point has nothing to repel") {
    const DenseMatrix y(1, 2, {4.0, -1.0});
    const QuadTree tree(y);
    std::array<double, 2> f{0, 0};
    CHECK(tree.repulsion(0, 0.5, f) == 0.0);
    CHECK(f[0] == 0.0);
    CHECK(f[1] == 0.0);
}

}
