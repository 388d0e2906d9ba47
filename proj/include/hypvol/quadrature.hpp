#pragma once

// Adaptive cubature over Euclidean n-simplices.
//
// The local rule is the Grundmann-Moeller pair of degrees 2s+1 and 2s-1; their
// difference is the local error indicator. Refinement bisects the longest edge
// of the worst sub-simplex (global priority queue) until the summed indicator
// drops below the absolute tolerance or the subdivision budget is spent.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

namespace hypvol {

struct SimplexRule {
    int dim = 0;
    Eigen::MatrixXd bary;        // (dim+1) x points
    std::vector<double> weights;  // sum to 1 (volume-normalized)
};

/// Grundmann-Moeller rule of degree 2s+1 on the n-simplex.
SimplexRule grundmann_moeller(int n, int s);

struct CubatureResult {
    double value = 0.0;
    double err_estimate = 0.0;
    bool converged = false;
    int subdivisions = 0;
    long evaluations = 0;
};

/// Pairwise summation, fixed order.
double pairwise_sum(std::span<const double> xs);

/// Signed Euclidean volume of the simplex with vertex columns v (n x (n+1)).
double euclidean_simplex_volume(const Eigen::MatrixXd& v);

namespace detail {

struct CubatureNode {
    Eigen::MatrixXd verts;  // n x (n+1)
    double value;
    double err;
    std::size_t id;
};

struct NodeOrder {
    bool operator()(const CubatureNode* a, const CubatureNode* b) const {
        if (a->err != b->err) {
            return a->err < b->err;
        }
        return a->id > b->id;
    }
};

}  // namespace detail

/// Integrates density over the simplex with vertex columns verts. The pair
/// (high, low) of rules must share the dimension of verts.
template <class Density>
CubatureResult integrate_simplex(const Eigen::MatrixXd& verts, Density&& density,
                                 const SimplexRule& high, const SimplexRule& low, double abs_tol,
                                 int max_subdivisions) {
    using detail::CubatureNode;
    const int n = static_cast<int>(verts.rows());
    CubatureResult out;
    Eigen::VectorXd x(n);

    auto apply_rule = [&](const Eigen::MatrixXd& v, const SimplexRule& rule) {
        double acc = 0.0;
        for (std::size_t k = 0; k < rule.weights.size(); ++k) {
            x.noalias() = v * rule.bary.col(static_cast<Eigen::Index>(k));
            acc += rule.weights[k] * density(x);
        }
        out.evaluations += static_cast<long>(rule.weights.size());
        return acc;
    };
    auto make_node = [&](Eigen::MatrixXd v, std::size_t id) {
        const double vol = std::abs(euclidean_simplex_volume(v));
        const double hi = vol * apply_rule(v, high);
        const double lo = vol * apply_rule(v, low);
        return CubatureNode{std::move(v), hi, std::abs(hi - lo), id};
    };

    std::vector<CubatureNode> nodes;
    nodes.reserve(static_cast<std::size_t>(2 * max_subdivisions + 1));
    nodes.push_back(make_node(verts, 0));
    std::vector<bool> alive{true};

    // Indices into nodes; a pointer heap is unsafe across reallocation.
    auto cmp = [&](std::size_t a, std::size_t b) {
        return detail::NodeOrder{}(&nodes[a], &nodes[b]);
    };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
    heap.push(0);
    double total_err = nodes[0].err;

    while (total_err > abs_tol && out.subdivisions < max_subdivisions) {
        const std::size_t worst = heap.top();
        heap.pop();
        alive[worst] = false;
        total_err -= nodes[worst].err;

        const Eigen::MatrixXd& v = nodes[worst].verts;
        int bi = 0;
        int bj = 1;
        double best = -1.0;
        for (int i = 0; i <= n; ++i) {
            for (int j = i + 1; j <= n; ++j) {
                const double l = (v.col(i) - v.col(j)).squaredNorm();
                if (l > best) {
                    best = l;
                    bi = i;
                    bj = j;
                }
            }
        }
        const Eigen::VectorXd mid = 0.5 * (v.col(bi) + v.col(bj));
        Eigen::MatrixXd a = v;
        Eigen::MatrixXd b = v;
        a.col(bj) = mid;
        b.col(bi) = mid;
        for (auto* child : {&a, &b}) {
            const std::size_t id = nodes.size();
            nodes.push_back(make_node(std::move(*child), id));
            alive.push_back(true);
            total_err += nodes.back().err;
            heap.push(id);
        }
        ++out.subdivisions;
        // drift guard for the running error sum
        if (out.subdivisions % 4096 == 0) {
            std::vector<double> errs;
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                if (alive[k]) {
                    errs.push_back(nodes[k].err);
                }
            }
            total_err = pairwise_sum(errs);
        }
    }

    std::vector<double> values;
    std::vector<double> errs;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (alive[k]) {
            values.push_back(nodes[k].value);
            errs.push_back(nodes[k].err);
        }
    }
    out.value = pairwise_sum(values);
    out.err_estimate = pairwise_sum(errs);
    out.converged = out.err_estimate <= abs_tol;
    return out;
}

}  // namespace hypvol
