#pragma once

#include "kaw/cell_set.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace kaw {

using Vec = std::vector<double>;

struct HyperRect {
    Vec lower;
    Vec upper;

    HyperRect() = default;
    HyperRect(Vec lo, Vec hi);

    [[nodiscard]] std::size_t dim() const noexcept { return lower.size(); }
    [[nodiscard]] bool contains(std::span<const double> x) const noexcept;

    friend bool operator==(const HyperRect&, const HyperRect&) = default;
};

/*
 * Uniform grid over a compact box.
 *
 * Grid points sit at lower + k*eta, k = 0..floor((upper-lower)/eta) in
 * non-periodic dimensions. Periodic dimensions (angles) carry
 * round((upper-lower)/eta) points and no duplicate endpoint; their effective
 * spacing is (upper-lower)/count so that the cells tile the circle exactly.
 * Each point owns the cell [point - eta/2, point + eta/2].
 *
 * Cells are flattened row-major in declaration order (last dimension varies
 * fastest). Points on a face between two cells quantize to the lower index.
 */
class Grid {
public:
    Grid() = default;
    Grid(HyperRect bounds, Vec eta, std::vector<bool> periodic);

    [[nodiscard]] std::size_t dim() const noexcept { return bounds_.dim(); }
    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] const HyperRect& bounds() const noexcept { return bounds_; }
    // Effective spacing (differs from the requested one on periodic dims).
    [[nodiscard]] const Vec& eta() const noexcept { return eta_; }
    [[nodiscard]] const Vec& requested_eta() const noexcept { return requested_eta_; }
    [[nodiscard]] const std::vector<bool>& periodic() const noexcept { return periodic_; }
    [[nodiscard]] const std::vector<std::size_t>& counts() const noexcept { return counts_; }

    [[nodiscard]] CellId quantize(std::span<const double> x) const;
    [[nodiscard]] Vec center(CellId cell) const;
    [[nodiscard]] HyperRect cell_rect(CellId cell) const;

    // Cells whose closed rectangle meets the closed region (sorted).
    [[nodiscard]] std::vector<CellId> cells_intersecting(const HyperRect& region) const;
    // Same, appending into a caller-owned buffer (cleared first).
    void cells_intersecting(const HyperRect& region, std::vector<CellId>& out) const;
    [[nodiscard]] CellSet cell_set_intersecting(const HyperRect& region) const;

    [[nodiscard]] std::vector<std::size_t> multi_index(CellId cell) const;
    [[nodiscard]] CellId flatten(std::span<const std::size_t> index) const;

    // Maps periodic coordinates into [lower, upper); other coordinates unchanged.
    void wrap(std::span<double> x) const noexcept;

    [[nodiscard]] bool valid(CellId cell) const noexcept { return cell.value < size_; }

    friend bool operator==(const Grid& a, const Grid& b)
    {
        return a.bounds_ == b.bounds_ && a.requested_eta_ == b.requested_eta_ && a.periodic_ == b.periodic_;
    }

private:
    void check(CellId cell) const;

    HyperRect bounds_;
    Vec requested_eta_;
    Vec eta_;
    std::vector<bool> periodic_;
    std::vector<std::size_t> counts_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

// Shortest signed distance a-b on a circle of the given period.
double wrapped_difference(double a, double b, double period) noexcept;

} // namespace kaw
