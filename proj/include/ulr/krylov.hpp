#pragma once

// Matrix-free Lanczos routines: extremal eigenpair and short-time propagation.

#include <functional>
#include <vector>

#include "ulr/types.hpp"

namespace ulr::krylov {

/// Hermitian operator known only through its action.
struct LinearOperator {
    Eigen::Index dim = 0;
    std::function<void(const CVector& in, CVector& out)> apply;
};

LinearOperator from_dense(const CMatrix& h);

struct Eigenpair {
    double value = 0.0;
    CVector vector;
    double residual = 0.0; ///< ||H v - E v||
    int iterations = 0;    ///< operator applications
    std::vector<double> residual_history;
};

struct LanczosOptions {
    double tol = 1e-10;
    int krylov_dim = 80;
    int max_restarts = 200;
};

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization, seeded
/// deterministically from `seed`. Throws NumericalError with the residual
/// history when the residual does not drop below `tol`.
Eigenpair lowest_eigenpair(const LinearOperator& h, const CVector& seed, const LanczosOptions& opts = {});

/// e^{-i t H} v by Lanczos projection, split into substeps.
CVector propagate(const LinearOperator& h, const CVector& v, double t, int krylov_dim = 40, double tol = 1e-12);

} // namespace ulr::krylov
