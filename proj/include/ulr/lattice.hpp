#pragma once

// Periodic box lattice with a real Fourier mode basis. Site sums carry the
// weight dx^d, so the mode functions h_n are orthonormal under
// dx^d sum_x h_n(x) h_m(x), and mode coordinates of a field are
// f_n = dx^d sum_x h_n(x) f(x).

#include <array>
#include <vector>

#include "ulr/types.hpp"

namespace ulr::lattice {

/// Self-conjugate wave vectors (each component 0 or Nyquist) carry one real
/// mode; other +-k pairs carry a cosine and a sine mode.
enum class ModeKind { self_conjugate, cosine, sine };

struct Mode {
    std::array<int, 3> j{0, 0, 0}; ///< integer wave vector, k = 2 pi j / L
    double k2 = 0.0;               ///< |k|^2
    ModeKind kind = ModeKind::self_conjugate;
};

class LatticeSpec {
public:
    /// d in {1, 3}; n even; d = 3 limited to n <= 4.
    LatticeSpec(int d, int n, double box_length);

    int dimension() const { return d_; }
    int sites_per_dim() const { return n_; }
    int site_count() const { return site_count_; }
    double box_length() const { return box_; }
    double spacing() const { return box_ / n_; }
    double cell_volume() const; ///< dx^d
    double volume() const;      ///< L^d
    const std::vector<Mode>& modes() const { return modes_; }

    /// Physical coordinates of site `i` (row-major index).
    std::array<double, 3> site_position(int i) const;

    /// sites x modes matrix of h_n(x), in mode order.
    const RMatrix& mode_functions() const { return h_; }

    /// Mode coordinates of a site field.
    RVector to_modes(const RVector& field) const;
    RVector from_modes(const RVector& coords) const;

    /// Spectral Laplacian as a site quadratic form: sum_n k_n^2 h_n(x) h_n(y) dx^d,
    /// so that dx^d sum grad(phi)^2 = phi^T G phi * dx^d.
    RMatrix gradient_form() const;

private:
    int d_;
    int n_;
    int site_count_;
    double box_;
    std::vector<Mode> modes_;
    RMatrix h_;
};

/// Momentum density pi(x) and field phi(x) on the sites.
struct FieldConfig {
    RVector pi;
    RVector phi;
};

FieldConfig zero_config(const LatticeSpec& spec);
void validate(const FieldConfig& f, const LatticeSpec& spec);

} // namespace ulr::lattice
