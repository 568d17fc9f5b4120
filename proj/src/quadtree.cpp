#include "korpusmap/quadtree.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "korpusmap/error.hpp"

namespace korpusmap {

QuadTree::QuadTree(const DenseMatrix& y, std::size_t max_depth)
    : y_(y), max_depth_(max_depth), next_point_(y.rows(), -1), leaf_of_(y.rows(), 0) {
    if (y.cols() != 2) throw PreconditionError("quadtree needs a 2-column layout");
    if (max_depth > kMaxDepth) throw PreconditionError("quadtree depth is limited to 64 levels");
    const std::size_t n = y.rows();
    double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
    if (n > 0) {
        min_x = max_x = y(0, 0);
        min_y = max_y = y(0, 1);
    }
    for (std::size_t i = 1; i < n; ++i) {
        min_x = std::min(min_x, y(i, 0));
        max_x = std::max(max_x, y(i, 0));
        min_y = std::min(min_y, y(i, 1));
        max_y = std::max(max_y, y(i, 1));
    }
    Node root;
    root.center_x = 0.5 * (min_x + max_x);
    root.center_y = 0.5 * (min_y + max_y);
    root.half_width = 0.5 * std::max(max_x - min_x, max_y - min_y) * (1.0 + 1e-6) + 1e-12;
    nodes_.reserve(2 * n + 1);
    nodes_.push_back(root);
    for (std::size_t i = 0; i < n; ++i) insert(i);
    // Centers of mass were accumulated as coordinate sums.
    for (Node& node : nodes_)
        if (node.count > 0) {
            node.com_x /= static_cast<double>(node.count);
            node.com_y /= static_cast<double>(node.count);
        }
    accumulate_moments();
}

// Children are always stored after their parent, so a reverse sweep visits
// every child before its parent (parallel-axis combination).
void QuadTree::accumulate_moments() {
    for (std::size_t k = nodes_.size(); k-- > 0;) {
        Node& node = nodes_[k];
        if (node.count == 0) continue;
        double xx = 0.0, xy = 0.0, yy = 0.0;
        if (node.first_child < 0) {
            for (std::int64_t p = node.first_point; p >= 0; p = next_point_[static_cast<std::size_t>(p)]) {
                const double dx = y_(static_cast<std::size_t>(p), 0) - node.com_x;
                const double dy = y_(static_cast<std::size_t>(p), 1) - node.com_y;
                xx += dx * dx;
                xy += dx * dy;
                yy += dy * dy;
            }
        } else {
            for (int q = 0; q < 4; ++q) {
                const Node& child = nodes_[static_cast<std::size_t>(node.first_child + q)];
                if (child.count == 0) continue;
                const double m = static_cast<double>(child.count);
                const double dx = child.com_x - node.com_x;
                const double dy = child.com_y - node.com_y;
                xx += child.m_xx + m * dx * dx;
                xy += child.m_xy + m * dx * dy;
                yy += child.m_yy + m * dy * dy;
            }
        }
        node.m_xx = xx;
        node.m_xy = xy;
        node.m_yy = yy;
    }
}

std::size_t QuadTree::child_for(const Node& node, double x, double y) const {
    return static_cast<std::size_t>(node.first_child) + (x >= node.center_x ? 1 : 0) + (y >= node.center_y ? 2 : 0);
}

void QuadTree::subdivide(std::size_t index) {
    const auto first = static_cast<std::int64_t>(nodes_.size());
    const double quarter = 0.5 * nodes_[index].half_width;
    for (int q = 0; q < 4; ++q) {
        Node child;
        child.center_x = nodes_[index].center_x + ((q & 1) ? quarter : -quarter);
        child.center_y = nodes_[index].center_y + ((q & 2) ? quarter : -quarter);
        child.half_width = quarter;
        nodes_.push_back(child);
    }
    nodes_[index].first_child = first;
}

void QuadTree::insert(std::size_t point) {
    const double px = y_(point, 0);
    const double py = y_(point, 1);
    std::size_t index = 0;
    std::size_t depth = 0;
    while (true) {
        nodes_[index].count += 1;
        nodes_[index].com_x += px;
        nodes_[index].com_y += py;
        depth_ = std::max(depth_, depth);

        if (nodes_[index].first_child < 0) {
            const std::int64_t head = nodes_[index].first_point;
            const bool same_location =
                head >= 0 && y_(static_cast<std::size_t>(head), 0) == px && y_(static_cast<std::size_t>(head), 1) == py;
            if (head < 0 || same_location || depth >= max_depth_) {
                next_point_[point] = head;
                nodes_[index].first_point = static_cast<std::int64_t>(point);
                leaf_of_[point] = index;
                return;
            }
            // Push the resident chain (one location) down one level.
            subdivide(index);
            const auto hx = y_(static_cast<std::size_t>(head), 0);
            const auto hy = y_(static_cast<std::size_t>(head), 1);
            const std::size_t child = child_for(nodes_[index], hx, hy);
            const std::size_t resident = nodes_[index].count - 1;
            nodes_[child].first_point = head;
            nodes_[child].count = resident;
            nodes_[child].com_x = hx * static_cast<double>(resident);
            nodes_[child].com_y = hy * static_cast<double>(resident);
            for (std::int64_t p = head; p >= 0; p = next_point_[static_cast<std::size_t>(p)])
                leaf_of_[static_cast<std::size_t>(p)] = child;
            nodes_[index].first_point = -1;
        }
        index = child_for(nodes_[index], px, py);
        ++depth;
    }
}

double QuadTree::repulsion(std::size_t i, double theta, std::array<double, 2>& force) const {
    const double xi = y_(i, 0);
    const double yi = y_(i, 1);
    const double theta2 = theta * theta;
    double z = 0.0;
    // Depth-first stack; each level adds at most three pending siblings.
    std::array<std::size_t, 3 * kMaxDepth + 4> stack;
    std::size_t top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (node.count == 0) continue;
        if (node.first_child < 0) {
            for (std::int64_t p = node.first_point; p >= 0; p = next_point_[static_cast<std::size_t>(p)]) {
                const auto j = static_cast<std::size_t>(p);
                if (j == i) continue;
                const double dx = xi - y_(j, 0);
                const double dy = yi - y_(j, 1);
                const double w = 1.0 / (1.0 + dx * dx + dy * dy);
                z += w;
                force[0] += w * w * dx;
                force[1] += w * w * dy;
            }
            continue;
        }
        const double dx = xi - node.com_x;
        const double dy = yi - node.com_y;
        const double d2 = dx * dx + dy * dy;
        const bool contains_point =
            std::abs(xi - node.center_x) <= node.half_width && std::abs(yi - node.center_y) <= node.half_width;
        if (!contains_point && node.half_width * node.half_width < theta2 * d2) {
            const double w = 1.0 / (1.0 + d2);
            const double w2 = w * w;
            const double w3 = w2 * w;
            const double mass = static_cast<double>(node.count);
            const double trace = node.m_xx + node.m_yy;
            const double mr_x = node.m_xx * dx + node.m_xy * dy;
            const double mr_y = node.m_xy * dx + node.m_yy * dy;
            const double rmr = dx * mr_x + dy * mr_y;
            z += mass * w - w2 * trace + 4.0 * w3 * rmr;
            const double radial = mass * w2 - 2.0 * w3 * trace + 12.0 * w3 * w * rmr;
            force[0] += radial * dx - 4.0 * w3 * mr_x;
            force[1] += radial * dy - 4.0 * w3 * mr_y;
            continue;
        }
        for (int q = 3; q >= 0; --q) {
            const auto child = static_cast<std::size_t>(node.first_child + q);
            if (nodes_[child].count > 0) stack[top++] = child;
        }
    }
    return z;
}

std::size_t QuadTree::leaf_size_of(std::size_t i) const {
    std::size_t n = 0;
    for (std::int64_t p = nodes_[leaf_of_[i]].first_point; p >= 0; p = next_point_[static_cast<std::size_t>(p)]) ++n;
    return n;
}

}  // namespace korpusmap
