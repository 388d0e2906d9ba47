#include "hypvol/quadrature.hpp"

#include "hypvol/hypgeom.hpp"

#include <functional>

namespace hypvol {

namespace {

void compositions(int total, int parts, std::vector<int>& cur,
                  const std::function<void(const std::vector<int>&)>& emit) {
    if (parts == 1) {
        cur.push_back(total);
        emit(cur);
        cur.pop_back();
        return;
    }
    for (int k = total; k >= 0; --k) {
        cur.push_back(k);
        compositions(total - k, parts - 1, cur, emit);
        cur.pop_back();
    }
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) {
        f *= i;
    }
    return f;
}

}  // namespace

SimplexRule grundmann_moeller(int n, int s) {
    if (n < 1 || s < 0) {
        throw Error("grundmann_moeller: need n >= 1 and s >= 0");
    }
    const int d = 2 * s + 1;
    std::vector<std::vector<double>> pts;
    std::vector<double> w;
    for (int i = 0; i <= s; ++i) {
        const double denom = d + n - 2 * i;
        double c = std::pow(denom, d) / (factorial(i) * factorial(d + n - i));
        c *= std::ldexp(1.0, -2 * s) * ((i % 2 == 0) ? 1.0 : -1.0) * factorial(n);
        std::vector<int> cur;
        compositions(s - i, n + 1, cur, [&](const std::vector<int>& beta) {
            std::vector<double> b(n + 1);
            for (int j = 0; j <= n; ++j) {
                b[j] = (2.0 * beta[j] + 1.0) / denom;
            }
            pts.push_back(std::move(b));
            w.push_back(c);
        });
    }
    SimplexRule rule;
    rule.dim = n;
    rule.bary.resize(n + 1, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
        for (int j = 0; j <= n; ++j) {
            rule.bary(j, static_cast<Eigen::Index>(k)) = pts[k][j];
        }
    }
    rule.weights = std::move(w);
    return rule;
}

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double acc = 0.0;
        for (double x : xs) {
            acc += x;
        }
        return acc;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double euclidean_simplex_volume(const Eigen::MatrixXd& v) {
    const int n = static_cast<int>(v.rows());
    Eigen::MatrixXd e(n, n);
    for (int i = 0; i < n; ++i) {
        e.col(i) = v.col(i + 1) - v.col(0);
    }
    double f = 1.0;
    for (int i = 2; i <= n; ++i) {
        f *= i;
    }
    return e.determinant() / f;
}

}  // namespace hypvol
