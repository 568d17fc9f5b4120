#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "korpusmap/error.hpp"
#include "korpusmap/parallel.hpp"
#include "korpusmap/quadtree.hpp"
#include "korpusmap/tsne.hpp"

namespace korpusmap {

namespace {

void check_layout(const Affinities* p, const DenseMatrix& y) {
    if (y.cols() != 2) throw PreconditionError("embedding must have 2 columns, got " + std::to_string(y.cols()));
    if (p && p->size() != y.rows())
        throw PreconditionError("affinities cover " + std::to_string(p->size()) + " points, layout has " +
                                std::to_string(y.rows()));
}

inline double kernel(const DenseMatrix& y, std::size_t i, std::size_t j) {
    const double dx = y(i, 0) - y(j, 0);
    const double dy = y(i, 1) - y(j, 1);
    return 1.0 / (1.0 + dx * dx + dy * dy);
}

// Σ_{i≠j} (1 + d²)^-1, reduced in fixed row order.
double exact_normalizer(const DenseMatrix& y) {
    const std::size_t n = y.rows();
    std::vector<double> row_sums(n, 0.0);
    parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) s += kernel(y, i, j);
            row_sums[i] = s;
        }
    });
    double z = 0.0;
    for (double s : row_sums) z += s;
    return z;
}

// Exact attraction over the stored entries of row i.
inline void attraction(const Affinities& p, const DenseMatrix& y, std::size_t i, double& fx, double& fy) {
    p.for_each_in_row(i, [&](std::size_t j, double pij) {
        const double w = kernel(y, i, j);
        fx += pij * w * (y(i, 0) - y(j, 0));
        fy += pij * w * (y(i, 1) - y(j, 1));
    });
}

}  // namespace

JointQ joint_q(const DenseMatrix& y) {
    check_layout(nullptr, y);
    const std::size_t n = y.rows();
    if (n < 2) throw PreconditionError("joint_q needs at least 2 points");
    JointQ out{DenseMatrix(n, n), 0.0};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) out.q(i, j) = kernel(y, i, j);
    std::vector<double> row_sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) row_sums[i] += out.q(i, j);
    for (double s : row_sums) out.z += s;
    for (double& v : out.q.values()) v /= out.z;
    return out;
}

double kl_divergence(const Affinities& p, const DenseMatrix& y) {
    check_layout(&p, y);
    const std::size_t n = y.rows();
    const double z = exact_normalizer(y);
    std::vector<double> row_kl(n, 0.0);
    parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double s = 0.0;
            p.for_each_in_row(i, [&](std::size_t j, double pij) {
                const double pc = std::max(pij, kProbabilityFloor);
                const double qc = std::max(kernel(y, i, j) / z, kProbabilityFloor);
                s += pc * std::log(pc / qc);
            });
            row_kl[i] = s;
        }
    });
    double kl = 0.0;
    for (double s : row_kl) kl += s;
    return kl;
}

namespace detail {

double gradient_exact_into(const Affinities& p, const DenseMatrix& y, double exaggeration, DenseMatrix& grad) {
    check_layout(&p, y);
    const std::size_t n = y.rows();
    if (grad.rows() != n || grad.cols() != 2) grad = DenseMatrix(n, 2);
    const double z = exact_normalizer(y);
    parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double ax = 0.0, ay = 0.0, rx = 0.0, ry = 0.0;
            if (p.is_sparse()) {
                attraction(p, y, i, ax, ay);
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const double w = kernel(y, i, j);
                    rx += w * w * (y(i, 0) - y(j, 0));
                    ry += w * w * (y(i, 1) - y(j, 1));
                }
            } else {
                p.for_each_in_row(i, [&](std::size_t j, double pij) {
                    const double w = kernel(y, i, j);
                    const double dx = y(i, 0) - y(j, 0);
                    const double dy = y(i, 1) - y(j, 1);
                    ax += pij * w * dx;
                    ay += pij * w * dy;
                    rx += w * w * dx;
                    ry += w * w * dy;
                });
            }
            grad(i, 0) = 4.0 * (exaggeration * ax - rx / z);
            grad(i, 1) = 4.0 * (exaggeration * ay - ry / z);
        }
    });
    return z;
}

double gradient_barnes_hut_into(const Affinities& p, const DenseMatrix& y, double theta, double exaggeration,
                                DenseMatrix& grad) {
    check_layout(&p, y);
    if (!(theta >= 0.0 && theta <= 1.0)) throw PreconditionError("theta must lie in [0, 1]");
    const std::size_t n = y.rows();
    if (grad.rows() != n || grad.cols() != 2) grad = DenseMatrix(n, 2);

    const QuadTree tree(y);
    std::vector<double> row_z(n, 0.0);
    DenseMatrix repulsive(n, 2);
    parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            std::array<double, 2> force{0.0, 0.0};
            row_z[i] = tree.repulsion(i, theta, force);
            repulsive(i, 0) = force[0];
            repulsive(i, 1) = force[1];
        }
    });
    double z = 0.0;
    for (double s : row_z) z += s;

    parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double ax = 0.0, ay = 0.0;
            attraction(p, y, i, ax, ay);
            grad(i, 0) = 4.0 * (exaggeration * ax - repulsive(i, 0) / z);
            grad(i, 1) = 4.0 * (exaggeration * ay - repulsive(i, 1) / z);
        }
    });
    return z;
}

}  // namespace detail

DenseMatrix gradient_exact(const Affinities& p, const DenseMatrix& y) {
    DenseMatrix grad;
    detail::gradient_exact_into(p, y, 1.0, grad);
    return grad;
}

DenseMatrix gradient_barnes_hut(const Affinities& p, const DenseMatrix& y, double theta) {
    DenseMatrix grad;
    detail::gradient_barnes_hut_into(p, y, theta, 1.0, grad);
    return grad;
}

}  // namespace korpusmap
