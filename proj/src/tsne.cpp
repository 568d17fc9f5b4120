#include <cmath>
#include <random>
#include <string>

#include "korpusmap/error.hpp"
#include "korpusmap/linred.hpp"
#include "korpusmap/textio.hpp"
#include "korpusmap/tsne.hpp"

namespace korpusmap {

void TsneConfig::validate(std::size_t n) const {
    if (!(perplexity >= 2.0) || !std::isfinite(perplexity)) throw PreconditionError("perplexity must be >= 2");
    if (!(theta >= 0.0 && theta <= 1.0)) throw PreconditionError("theta must lie in [0, 1]");
    if (!(learning_rate > 0.0)) throw PreconditionError("learning rate must be positive");
    if (!(early_exaggeration >= 1.0)) throw PreconditionError("early exaggeration must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0 && final_momentum >= 0.0 && final_momentum < 1.0))
        throw PreconditionError("momentum values must lie in [0, 1)");
    if (!(init_scale > 0.0)) throw PreconditionError("initial scale must be positive");
    if (kl_every == 0) throw PreconditionError("kl_every must be positive");
    if (input_dim_reduction < 2) throw PreconditionError("input_dim_reduction must be >= 2");
    if (n < 4) throw PreconditionError("t-SNE needs at least 4 points, got " + std::to_string(n));
    if (!(3.0 * perplexity < static_cast<double>(n)))
        throw PreconditionError("perplexity " + format_double(perplexity, 6) + " is too large for " +
                                std::to_string(n) + " points (requires 3 * perplexity < N)");
}

namespace {

DenseMatrix initial_layout(const DenseMatrix& x, const TsneConfig& config) {
    const std::size_t n = x.rows();
    DenseMatrix y(n, 2);
    if (config.init == TsneInit::FromPca && x.cols() >= 2) {
        const PcaModel model = pca_fit(x, 2, config.seed);
        y = pca_transform(model, x);
        double sum2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum2 += y(i, 0) * y(i, 0);
        const double sd = std::sqrt(sum2 / static_cast<double>(n - 1));
        if (sd > 0.0)
            for (double& v : y.values()) v *= config.init_scale / sd;
        return y;
    }
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, config.init_scale);
    for (double& v : y.values()) v = normal(rng);
    return y;
}

void recenter(DenseMatrix& y) {
    const std::size_t n = y.rows();
    for (std::size_t c = 0; c < 2; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += y(i, c);
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) y(i, c) -= mean;
    }
}

inline int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

EmbedState run_tsne(const DenseMatrix& x, const TsneConfig& config, const TsneProgress& progress) {
    const std::size_t n = x.rows();
    config.validate(n);
    if (!x.all_finite()) throw PreconditionError("t-SNE input contains non-finite values");

    DenseMatrix features = x;
    if (x.cols() > config.input_dim_reduction) {
        const std::size_t dims = std::min(config.input_dim_reduction, n - 1);
        features = pca_transform(pca_fit(x, dims, config.seed), x);
    }

    const bool exact = config.theta == 0.0;
    const Affinities p = (exact && n <= config.dense_limit)
                             ? calibrate_affinities(squared_distances(features), config.perplexity)
                             : knn_affinities(features, config.perplexity);

    EmbedState state;
    state.y = initial_layout(features, config);
    recenter(state.y);
    state.velocity = DenseMatrix(n, 2);
    state.gains = DenseMatrix(n, 2, 1.0);
    DenseMatrix grad(n, 2);

    auto record = [&](std::size_t iteration) {
        const double kl = kl_divergence(p, state.y);
        if (!std::isfinite(kl)) throw Error("t-SNE loss became non-finite at iteration " + std::to_string(iteration));
        state.kl_trace.push_back({iteration, kl});
        return !progress || progress(state.kl_trace.back());
    };

    if (!record(0)) return state;
    for (std::size_t it = 0; it < config.n_iter; ++it) {
        const double exaggeration = it < config.exaggeration_iters ? config.early_exaggeration : 1.0;
        const double momentum = it < config.momentum_switch_iter ? config.momentum : config.final_momentum;
        if (exact)
            detail::gradient_exact_into(p, state.y, exaggeration, grad);
        else
            detail::gradient_barnes_hut_into(p, state.y, config.theta, exaggeration, grad);

        auto& gains = state.gains.values();
        auto& velocity = state.velocity.values();
        auto& y = state.y.values();
        const auto& g = grad.values();
        for (std::size_t e = 0; e < y.size(); ++e) {
            gains[e] = sign(g[e]) != sign(velocity[e]) ? gains[e] + 0.2 : gains[e] * 0.8;
            gains[e] = std::max(gains[e], 0.01);
            velocity[e] = momentum * velocity[e] - config.learning_rate * gains[e] * g[e];
            y[e] += velocity[e];
        }
        recenter(state.y);
        if (!state.y.all_finite())
            throw Error("t-SNE layout became non-finite at iteration " + std::to_string(it + 1));
        state.iteration = it + 1;

        if (state.iteration % config.kl_every == 0 || state.iteration == config.n_iter)
            if (!record(state.iteration)) break;
    }
    return state;
}

std::string format_kl_trace(std::span<const KlPoint> trace) {
    std::string out;
    for (const auto& point : trace) out += std::to_string(point.iteration) + ' ' + format_double(point.kl, 17) + '\n';
    return out;
}

}  // namespace korpusmap
