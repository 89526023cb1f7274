#include "ulr/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace ulr::lattice {

namespace {

int wrap(int j, int n)
{
    // Into (-n/2, n/2].
    int r = ((j % n) + n) % n;
    if (r > n / 2)
        r -= n;
    return r;
}

} // namespace

LatticeSpec::LatticeSpec(int d, int n, double box_length) : d_(d), n_(n), box_(box_length)
{
    if (d != 1 && d != 3)
        throw InvalidInput("LatticeSpec: spatial dimension must be 1 or 3");
    if (n < 2 || n % 2 != 0)
        throw InvalidInput("LatticeSpec: sites per dimension must be even and >= 2");
    if (d == 3 && n > 4)
        throw InvalidInput("LatticeSpec: d = 3 is limited to n <= 4");
    if (!(box_length > 0.0))
        throw InvalidInput("LatticeSpec: box length must be positive");

    site_count_ = d == 1 ? n : n * n * n;
    const double dk = 2.0 * std::numbers::pi / box_;

    std::vector<Mode> modes;
    const int lo = -n / 2 + 1;
    const int hi = n / 2;
    const int span_y = d == 3 ? hi : 0;
    const int low_y = d == 3 ? lo : 0;
    for (int jx = lo; jx <= hi; ++jx)
        for (int jy = low_y; jy <= span_y; ++jy)
            for (int jz = low_y; jz <= span_y; ++jz) {
                const std::array<int, 3> j{jx, jy, jz};
                const std::array<int, 3> neg{wrap(-jx, n), d == 3 ? wrap(-jy, n) : 0, d == 3 ? wrap(-jz, n) : 0};
                const double k2 = dk * dk * (jx * jx + jy * jy + jz * jz);
                if (neg == j) {
                    modes.push_back({j, k2, ModeKind::self_conjugate});
                } else if (j > neg) {
                    modes.push_back({j, k2, ModeKind::cosine});
                    modes.push_back({j, k2, ModeKind::sine});
                }
            }
    std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
        const auto ka = std::tie(a.j[0], a.j[1], a.j[2]);
        const auto kb = std::tie(b.j[0], b.j[1], b.j[2]);
        const int ia = a.j[0] * a.j[0] + a.j[1] * a.j[1] + a.j[2] * a.j[2];
        const int ib = b.j[0] * b.j[0] + b.j[1] * b.j[1] + b.j[2] * b.j[2];
        if (ia != ib)
            return ia < ib;
        if (ka != kb)
            return ka < kb;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
    modes_ = std::move(modes);

    const double vol = volume();
    h_.resize(site_count_, site_count_);
    for (int x = 0; x < site_count_; ++x) {
        const auto pos = site_position(x);
        for (std::size_t m = 0; m < modes_.size(); ++m) {
            const auto& md = modes_[m];
            const double arg = dk * (md.j[0] * pos[0] + md.j[1] * pos[1] + md.j[2] * pos[2]);
            double v = 0.0;
            switch (md.kind) {
            case ModeKind::self_conjugate: v = std::cos(arg) / std::sqrt(vol); break;
            case ModeKind::cosine: v = std::sqrt(2.0 / vol) * std::cos(arg); break;
            case ModeKind::sine: v = std::sqrt(2.0 / vol) * std::sin(arg); break;
            }
            h_(x, static_cast<Eigen::Index>(m)) = v;
        }
    }
}

double LatticeSpec::cell_volume() const
{
    return std::pow(spacing(), d_);
}

double LatticeSpec::volume() const
{
    return std::pow(box_, d_);
}

std::array<double, 3> LatticeSpec::site_position(int i) const
{
    const double dx = spacing();
    if (d_ == 1)
        return {dx * i, 0.0, 0.0};
    const int ix = i / (n_ * n_);
    const int iy = (i / n_) % n_;
    const int iz = i % n_;
    return {dx * ix, dx * iy, dx * iz};
}

RVector LatticeSpec::to_modes(const RVector& field) const
{
    if (field.size() != site_count_)
        throw InvalidInput("to_modes: field has wrong size");
    return cell_volume() * (h_.transpose() * field);
}

RVector LatticeSpec::from_modes(const RVector& coords) const
{
    if (coords.size() != site_count_)
        throw InvalidInput("from_modes: coordinate vector has wrong size");
    return h_ * coords;
}

RMatrix LatticeSpec::gradient_form() const
{
    RVector k2(site_count_);
    for (int m = 0; m < site_count_; ++m)
        k2(m) = modes_[static_cast<std::size_t>(m)].k2;
    return cell_volume() * (h_ * k2.asDiagonal() * h_.transpose());
}

FieldConfig zero_config(const LatticeSpec& spec)
{
    return {RVector::Zero(spec.site_count()), RVector::Zero(spec.site_count())};
}

void validate(const FieldConfig& f, const LatticeSpec& spec)
{
    if (f.pi.size() != spec.site_count() || f.phi.size() != spec.site_count())
        throw InvalidInput("FieldConfig: size does not match the lattice");
    if (!f.pi.allFinite() || !f.phi.allFinite())
        throw InvalidInput("FieldConfig: non-finite entries");
}

} // namespace ulr::lattice
