#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "korpusmap/matrix.hpp"

namespace korpusmap {

/// Point-region quadtree over a 2D layout for Barnes-Hut summation.
///
/// Leaves hold one location; points with identical coordinates share a leaf
/// and are chained together. The tree is rebuilt from scratch for every
/// layout.
class QuadTree {
public:
    static constexpr std::size_t kMaxDepth = 64;

    explicit QuadTree(const DenseMatrix& y, std::size_t max_depth = 48);

    struct Node {
        double center_x = 0.0;
        double center_y = 0.0;
        double half_width = 0.0;
        double com_x = 0.0;
        double com_y = 0.0;
        /// Second moments about the center of mass, Σ (y - com)(y - com)ᵀ.
        double m_xx = 0.0;
        double m_xy = 0.0;
        double m_yy = 0.0;
        std::size_t count = 0;
        /// Index of the first of four children, or -1 for a leaf.
        std::int64_t first_child = -1;
        /// Head of the leaf's point chain, or -1.
        std::int64_t first_point = -1;
    };

    /// Repulsive sums for point i: accumulates Σ w_ij into the return value and
    /// Σ w_ij² (y_i - y_j) into force, with w = (1 + d²)^-1. A cell that does
    /// not contain y_i and whose half-width over its distance to y_i is below
    /// theta is summarized by its center of mass, plus the second-order Taylor
    /// term of the kernel taken from the cell's second moments.
    double repulsion(std::size_t i, double theta, std::array<double, 2>& force) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t depth() const { return depth_; }
    /// Number of points chained in the leaf containing point i.
    std::size_t leaf_size_of(std::size_t i) const;

private:
    void insert(std::size_t point);
    void subdivide(std::size_t node);
    std::size_t child_for(const Node& node, double x, double y) const;
    void accumulate_moments();

    const DenseMatrix& y_;
    std::size_t max_depth_;
    std::size_t depth_ = 0;
    std::vector<Node> nodes_;
    std::vector<std::int64_t> next_point_;
    std::vector<std::size_t> leaf_of_;
};

}  // namespace korpusmap
