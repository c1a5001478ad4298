#pragma once

#include <boost/dynamic_bitset.hpp>

#include <compare>
#include <cstdint>
#include <functional>
#include <vector>

namespace kaw {

// Flattened index of a grid cell (state or input).
struct CellId {
    std::uint32_t value = 0;

    friend constexpr auto operator<=>(CellId, CellId) = default;
};

// Dense set of cells over a fixed domain size.
using CellSet = boost::dynamic_bitset<std::uint64_t>;

inline CellSet make_cell_set(std::size_t domain_size, std::initializer_list<std::uint32_t> members = {})
{
    CellSet s(domain_size);
    for (auto m : members) s.set(m);
    return s;
}

template <typename Fn>
void for_each_member(const CellSet& s, Fn&& fn)
{
    for (auto i = s.find_first(); i != CellSet::npos; i = s.find_next(i))
        fn(CellId{static_cast<std::uint32_t>(i)});
}

inline std::vector<CellId> members(const CellSet& s)
{
    std::vector<CellId> out;
    out.reserve(s.count());
    for_each_member(s, [&](CellId c) { out.push_back(c); });
    return out;
}

} // namespace kaw

template <>
struct std::hash<kaw::CellId> {
    std::size_t operator()(kaw::CellId c) const noexcept { return std::hash<std::uint32_t>{}(c.value); }
};
