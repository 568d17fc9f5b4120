#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "korpusmap/error.hpp"
#include "korpusmap/mapeval.hpp"
#include "korpusmap/parallel.hpp"
#include "korpusmap/tsne.hpp"

using namespace korpusmap;

namespace {

DenseMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sd);
    DenseMatrix m(rows, cols);
    for (double& v : m.values()) v = normal(rng);
    return m;
}

// Two unit-variance blobs in `dims` dimensions, centers 10 apart, points
// interleaved.
DenseMatrix two_blobs(std::size_t per_blob, std::size_t dims, std::uint64_t seed, std::vector<std::string>& labels) {
    DenseMatrix x = gaussian(2 * per_blob, dims, seed);
    labels.clear();
    for (std::size_t i = 0; i < 2 * per_blob; ++i) {
        const bool second = i % 2 == 1;
        labels.push_back(second ? "b" : "a");
        if (second) x(i, 0) += 10.0;
    }
    return x;
}

TsneConfig short_run(double theta, std::size_t iters = 300) {
    TsneConfig c;
    c.perplexity = 10.0;
    c.n_iter = iters;
    c.theta = theta;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_SUITE("tsne") {

TEST_CASE("two blobs separate in the map") {
    std::vector<std::string> labels;
    const DenseMatrix x = two_blobs(50, 10, 1, labels);
    for (double theta : {0.0, 0.5}) {
        TsneConfig c;
        c.theta = theta;
        c.seed = 11;
        const EmbedState s = run_tsne(x, c);
        CHECK(knn_label_agreement(s.y, labels, 5) >= 0.95);
    }
}

TEST_CASE("same input and config give identical coordinates") {
    const DenseMatrix x = gaussian(80, 6, 2);
    for (double theta : {0.0, 0.5}) {
        const EmbedState a = run_tsne(x, short_run(theta));
        const EmbedState b = run_tsne(x, short_run(theta));
        CHECK(a.y == b.y);
        REQUIRE(a.kl_trace.size() == b.kl_trace.size());
        for (std::size_t t = 0; t < a.kl_trace.size(); ++t) CHECK(a.kl_trace[t].kl == b.kl_trace[t].kl);
    }
}

TEST_CASE("result does not depend on the worker count") {
    const DenseMatrix x = gaussian(90, 5, 4);
    for (double theta : {0.0, 0.5}) {
        set_worker_count(1);
        const EmbedState one = run_tsne(x, short_run(theta, 120));
        set_worker_count(4);
        const EmbedState four = run_tsne(x, short_run(theta, 120));
        set_worker_count(0);
        CHECK(one.y == four.y);
    }
}

TEST_CASE("layout stays centered") {
    const DenseMatrix x = gaussian(60, 4, 5, 3.0);
    for (double theta : {0.0, 0.5}) {
        const EmbedState s = run_tsne(x, short_run(theta));
        for (std::size_t c = 0; c < 2; ++c) {
            double mean = 0.0;
            for (std::size_t i = 0; i < 60; ++i) mean += s.y(i, c);
            CHECK(std::abs(mean / 60.0) <= 1e-9);
        }
    }
}

TEST_CASE("KL decreases and settles") {
    std::vector<std::string> labels;
    const DenseMatrix x = two_blobs(60, 8, 6, labels);
    TsneConfig c;
    c.n_iter = 2000;
    c.seed = 2;
    const EmbedState s = run_tsne(x, c);
    REQUIRE(s.kl_trace.size() >= 100);
    CHECK(s.kl_trace.back().kl < s.kl_trace.front().kl);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t t = s.kl_trace.size() - 100; t < s.kl_trace.size(); ++t) {
        lo = std::min(lo, s.kl_trace[t].kl);
        hi = std::max(hi, s.kl_trace[t].kl);
    }
    CHECK(hi <= lo + 1e-3);
}

TEST_CASE("trace is recorded at 0, every kl_every, and at the end") {
    TsneConfig c = short_run(0.5, 95);
    c.kl_every = 20;
    const EmbedState s = run_tsne(gaussian(40, 3, 7), c);
    std::vector<std::size_t> at;
    for (const auto& p : s.kl_trace) at.push_back(p.iteration);
    CHECK(at == std::vector<std::size_t>{0, 20, 40, 60, 80, 95});
    CHECK(s.iteration == 95);
    const std::string text = format_kl_trace(s.kl_trace);
    CHECK(text.rfind("0 ", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
}

TEST_CASE("progress callback can stop the run") {
    std::size_t calls = 0;
    const EmbedState s = run_tsne(gaussian(40, 3, 8), short_run(0.5), [&](const KlPoint& p) {
        ++calls;
        return p.iteration < 50;
    });
    CHECK(s.iteration == 50);
    CHECK(calls == 6);
}

TEST_CASE("gains stay above the floor") {
    const EmbedState s = run_tsne(gaussian(50, 4, 9), short_run(0.5));
    for (double g : s.gains.values()) CHECK(g >= 0.01);
    CHECK(s.y.all_finite());
}

TEST_CASE("wide input is reduced first, and PCA initialization works") {
    TsneConfig c = short_run(0.5, 100);
    c.input_dim_reduction = 5;
    c.init = TsneInit::FromPca;
    const EmbedState s = run_tsne(gaussian(40, 30, 10), c);
    CHECK(s.y.rows() == 40);
    CHECK(s.y.all_finite());
}

TEST_CASE("duplicate rows are allowed") {
    DenseMatrix x = gaussian(40, 3, 12);
    for (std::size_t i = 1; i < 10; ++i)
        for (std::size_t c = 0; c < 3; ++c) x(i, c) = x(0, c);
    for (double theta : {0.0, 0.5}) CHECK(run_tsne(x, short_run(theta, 100)).y.all_finite());
}

TEST_CASE("rigid rotation of the start gives a rotated trajectory") {
    // Plain momentum descent on the exact gradient; adaptive gains act per
    // coordinate and are not rotation-equivariant.
    const DenseMatrix x = gaussian(30, 4, 13);
    const Affinities p = calibrate_affinities(squared_distances(x), 5.0);
    const DenseMatrix y0 = gaussian(30, 2, 14, 1e-2);
    const double angle = 0.7;
    const double c = std::cos(angle), s = std::sin(angle);
    DenseMatrix r0(30, 2);
    for (std::size_t i = 0; i < 30; ++i) {
        r0(i, 0) = c * y0(i, 0) - s * y0(i, 1);
        r0(i, 1) = s * y0(i, 0) + c * y0(i, 1);
    }
    auto descend = [&](DenseMatrix y) {
        DenseMatrix v(30, 2);
        for (int it = 0; it < 10; ++it) {
            const DenseMatrix g = gradient_exact(p, y);
            for (std::size_t e = 0; e < y.values().size(); ++e) {
                v.values()[e] = 0.5 * v.values()[e] - 200.0 * 12.0 * g.values()[e];
                y.values()[e] += v.values()[e];
            }
        }
        return y;
    };
    const DenseMatrix a = descend(y0);
    const DenseMatrix b = descend(r0);
    double worst = 0.0;
    for (std::size_t i = 0; i < 30; ++i) {
        worst = std::max(worst, std::abs(c * a(i, 0) - s * a(i, 1) - b(i, 0)));
        worst = std::max(worst, std::abs(s * a(i, 0) + c * a(i, 1) - b(i, 1)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("configuration errors") {
    const DenseMatrix x = gaussian(20, 3, 15);
    TsneConfig c;
    CHECK_THROWS_AS(run_tsne(x, c), PreconditionError);  // 3 * 30 >= 20
    c.perplexity = 5.0;
    c.theta = 1.5;
    CHECK_THROWS_AS(run_tsne(x, c), PreconditionError);
    c.theta = 0.5;
    c.perplexity = 1.0;
    CHECK_THROWS_AS(run_tsne(x, c), PreconditionError);
    c.perplexity = 2.0;
    CHECK_THROWS_AS(run_tsne(gaussian(3, 3, 1), c), PreconditionError);
    DenseMatrix bad = x;
    bad(3, 1) = NAN;
    CHECK_THROWS_AS(run_tsne(bad, c), PreconditionError);
    c.kl_every = 0;
    CHECK_THROWS_AS(c.validate(20), PreconditionError);
}

}
