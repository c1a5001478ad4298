#include "kaw/grid.hpp"

#include "kaw/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kaw {

HyperRect::HyperRect(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi))
{
    if (lower.size() != upper.size())
        throw ValidationError("hyper-rectangle bounds differ in dimension");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i]))
            throw ValidationError("hyper-rectangle has lower > upper in dimension " + std::to_string(i));
}

bool HyperRect::contains(std::span<const double> x) const noexcept
{
    if (x.size() != lower.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
}

double wrapped_difference(double a, double b, double period) noexcept
{
    double d = std::fmod(a - b, period);
    if (d > period / 2) d -= period;
    if (d < -period / 2) d += period;
    return d;
}

Grid::Grid(HyperRect bounds, Vec eta, std::vector<bool> periodic)
    : bounds_(std::move(bounds)), requested_eta_(std::move(eta)), periodic_(std::move(periodic))
{
    const auto n = bounds_.dim();
    if (n == 0) throw ValidationError("grid needs at least one dimension");
    if (requested_eta_.size() != n || periodic_.size() != n)
        throw ValidationError("grid eta/periodic length does not match bounds");

    eta_.resize(n);
    counts_.resize(n);
    strides_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double eta_i = requested_eta_[i];
        if (!(eta_i > 0)) throw ValidationError("grid eta must be positive");
        const double span = bounds_.upper[i] - bounds_.lower[i];
        const double ratio = span / eta_i;
        if (periodic_[i]) {
            const auto c = static_cast<std::size_t>(std::llround(ratio));
            if (c == 0) throw ValidationError("periodic dimension narrower than its spacing");
            counts_[i] = c;
            eta_[i] = span / static_cast<double>(c);
        } else {
            // Tolerate representation error when the span is an exact multiple.
            counts_[i] = static_cast<std::size_t>(std::floor(ratio + 1e-9)) + 1;
            eta_[i] = eta_i;
        }
    }

    size_ = 1;
    for (std::size_t i = n; i-- > 0;) {
        strides_[i] = size_;
        size_ *= counts_[i];
    }
    if (size_ > std::numeric_limits<std::uint32_t>::max())
        throw ValidationError("grid too large for 32-bit cell indices");
}

void Grid::wrap(std::span<double> x) const noexcept
{
    for (std::size_t i = 0; i < dim(); ++i) {
        if (!periodic_[i]) continue;
        const double lo = bounds_.lower[i];
        const double span = bounds_.upper[i] - lo;
        double r = std::fmod(x[i] - lo, span);
        if (r < 0) r += span;
        if (r >= span) r = 0;
        x[i] = lo + r;
    }
}

void Grid::check(CellId cell) const
{
    if (!valid(cell))
        throw InvalidCell("cell " + std::to_string(cell.value) + " outside grid of " + std::to_string(size_) +
                          " cells");
}

CellId Grid::quantize(std::span<const double> x) const
{
    if (x.size() != dim()) throw OutOfDomain("point dimension does not match grid");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < dim(); ++i) {
        const double lo = bounds_.lower[i];
        double xi = x[i];
        if (periodic_[i]) {
            const double span = bounds_.upper[i] - lo;
            double r = std::fmod(xi - lo, span);
            if (r < 0) r += span;
            xi = lo + r;
        } else if (!(xi >= lo && xi <= bounds_.upper[i])) {
            std::ostringstream msg;
            msg << "coordinate " << i << " = " << xi << " outside [" << lo << ", " << bounds_.upper[i] << "]";
            throw OutOfDomain(msg.str());
        }
        // Nearest grid point, ties toward the lower index.
        auto k = static_cast<long long>(std::ceil((xi - lo) / eta_[i] - 0.5));
        const auto count = static_cast<long long>(counts_[i]);
        if (periodic_[i]) {
            k %= count;
            if (k < 0) k += count;
        } else {
            k = std::clamp(k, 0LL, count - 1);
        }
        flat += static_cast<std::size_t>(k) * strides_[i];
    }
    return CellId{static_cast<std::uint32_t>(flat)};
}

std::vector<std::size_t> Grid::multi_index(CellId cell) const
{
    check(cell);
    std::vector<std::size_t> k(dim());
    std::size_t rest = cell.value;
    for (std::size_t i = 0; i < dim(); ++i) {
        k[i] = rest / strides_[i];
        rest %= strides_[i];
    }
    return k;
}

CellId Grid::flatten(std::span<const std::size_t> index) const
{
    if (index.size() != dim()) throw InvalidCell("multi-index dimension does not match grid");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < dim(); ++i) {
        if (index[i] >= counts_[i]) throw InvalidCell("multi-index component out of range");
        flat += index[i] * strides_[i];
    }
    return CellId{static_cast<std::uint32_t>(flat)};
}

Vec Grid::center(CellId cell) const
{
    const auto k = multi_index(cell);
    Vec c(dim());
    for (std::size_t i = 0; i < dim(); ++i)
        c[i] = bounds_.lower[i] + static_cast<double>(k[i]) * eta_[i];
    return c;
}

HyperRect Grid::cell_rect(CellId cell) const
{
    auto c = center(cell);
    HyperRect r;
    r.lower.resize(dim());
    r.upper.resize(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        r.lower[i] = c[i] - eta_[i] / 2;
        r.upper[i] = c[i] + eta_[i] / 2;
    }
    return r;
}

void Grid::cells_intersecting(const HyperRect& region, std::vector<CellId>& out) const
{
    out.clear();
    if (region.dim() != dim()) throw ValidationError("region dimension does not match grid");

    // Per-dimension list of admissible indices; the same rounding as quantize
    // keeps every point of the region inside one of the returned cells.
    std::vector<std::vector<std::size_t>> axes(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        const double lo = bounds_.lower[i];
        const auto count = static_cast<long long>(counts_[i]);
        const auto k_lo = static_cast<long long>(std::ceil((region.lower[i] - lo) / eta_[i] - 0.5));
        const auto k_hi = static_cast<long long>(std::floor((region.upper[i] - lo) / eta_[i] + 0.5));
        auto& axis = axes[i];
        if (periodic_[i]) {
            if (k_hi - k_lo + 1 >= count) {
                axis.resize(static_cast<std::size_t>(count));
                for (long long k = 0; k < count; ++k) axis[static_cast<std::size_t>(k)] = static_cast<std::size_t>(k);
            } else {
                for (long long k = k_lo; k <= k_hi; ++k) {
                    long long m = k % count;
                    if (m < 0) m += count;
                    axis.push_back(static_cast<std::size_t>(m));
                }
                std::sort(axis.begin(), axis.end());
            }
        } else {
            // Points between the outer cell faces and the bounds quantize to
            // the outer cells.
            long long first = std::max(k_lo, 0LL), last = std::min(k_hi, count - 1);
            if (region.lower[i] <= bounds_.upper[i]) first = std::min(first, count - 1);
            if (region.upper[i] >= lo) last = std::max(last, 0LL);
            for (long long k = first; k <= last; ++k) axis.push_back(static_cast<std::size_t>(k));
        }
        if (axis.empty()) return;
    }

    // Odometer over the per-axis index lists, last dimension fastest.
    std::vector<std::size_t> pos(dim(), 0);
    while (true) {
        std::size_t flat = 0;
        for (std::size_t i = 0; i < dim(); ++i) flat += axes[i][pos[i]] * strides_[i];
        out.push_back(CellId{static_cast<std::uint32_t>(flat)});
        std::size_t d = dim();
        while (d-- > 0) {
            if (++pos[d] < axes[d].size()) break;
            pos[d] = 0;
        }
        if (d == static_cast<std::size_t>(-1)) break;
    }
}

std::vector<CellId> Grid::cells_intersecting(const HyperRect& region) const
{
    std::vector<CellId> out;
    cells_intersecting(region, out);
    return out;
}

CellSet Grid::cell_set_intersecting(const HyperRect& region) const
{
    CellSet s(size_);
    std::vector<CellId> buf;
    cells_intersecting(region, buf);
    for (auto c : buf) s.set(c.value);
    return s;
}

} // namespace kaw
