#include "ulr/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Dense>

#include "ulr/types.hpp"

namespace ulr::quad {

namespace {

Rule reference_rule(int n)
{
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(n); it != cache.end())
        return it->second;

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule r;
    for (int i = 0; i < n; ++i) {
        r.nodes.push_back(es.eigenvalues()(i));
        const double v = es.eigenvectors()(0, i);
        r.weights.push_back(2.0 * v * v);
    }
    // Symmetrize to remove eigensolver round-off.
    for (int i = 0; i < n / 2; ++i) {
        const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
        const double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        r.nodes[n / 2] = 0.0;
    cache.emplace(n, r);
    return r;
}

} // namespace

Rule gauss_legendre(int n, double a, double b)
{
    if (n < 1)
        throw InvalidInput("gauss_legendre: need at least one node");
    Rule ref = reference_rule(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int i = 0; i < n; ++i) {
        ref.nodes[i] = mid + half * ref.nodes[i];
        ref.weights[i] *= half;
    }
    return ref;
}

Rule composite(const std::vector<double>& edges, int nodes_per_panel)
{
    Rule out;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const Rule p = gauss_legendre(nodes_per_panel, edges[i], edges[i + 1]);
        out.nodes.insert(out.nodes.end(), p.nodes.begin(), p.nodes.end());
        out.weights.insert(out.weights.end(), p.weights.begin(), p.weights.end());
    }
    return out;
}

} // namespace ulr::quad
