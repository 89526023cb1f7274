#pragma once

#include <vector>

namespace ulr::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b] (Golub-Welsch).
Rule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Gauss-Legendre on each panel [edges[i], edges[i+1]].
Rule composite(const std::vector<double>& edges, int nodes_per_panel);

template <class F>
double integrate(const Rule& r, F&& f)
{
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
        s += r.weights[i] * f(r.nodes[i]);
    return s;
}

} // namespace ulr::quad
