#pragma once

#include "kaw/abstraction.hpp"
#include "kaw/spec.hpp"

#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

namespace kaw {

/*
 * Winning strategy of a reach-avoid game.
 *
 * rank(x) is the fixpoint iteration at which x entered the winning set
 * (0 on the target). allowed(x) lists every input whose successors all have
 * a strictly smaller rank, so following any of them makes progress; policy(x)
 * is the lowest-index allowed input. Target cells have no inputs.
 */
class Controller {
public:
    static constexpr std::uint32_t kUnranked = std::numeric_limits<std::uint32_t>::max();
    static constexpr std::int32_t kNoInput = -1;

    [[nodiscard]] const CellSet& winning() const noexcept { return winning_; }
    [[nodiscard]] const CellSet& target() const noexcept { return target_; }
    [[nodiscard]] bool is_winning(CellId x) const { return winning_.test(x.value); }
    [[nodiscard]] std::uint32_t rank(CellId x) const { return rank_.at(x.value); }
    [[nodiscard]] std::int32_t policy(CellId x) const { return policy_.at(x.value); }
    [[nodiscard]] std::span<const CellId> allowed(CellId x) const
    {
        return {allowed_inputs_.data() + allowed_offsets_.at(x.value),
                allowed_inputs_.data() + allowed_offsets_.at(x.value + 1)};
    }
    // Largest rank, i.e. the number of fixpoint iterations that added cells.
    [[nodiscard]] std::uint32_t depth() const noexcept { return depth_; }
    // The game is lost everywhere outside the target.
    [[nodiscard]] bool trivial() const { return winning_ == target_; }

    friend bool operator==(const Controller&, const Controller&) = default;

private:
    friend Controller solve_reach_avoid(const Abstraction& abs, const GameObjective& obj);

    CellSet winning_;
    CellSet target_;
    std::vector<std::uint32_t> rank_;
    std::vector<std::int32_t> policy_;
    std::vector<std::uint64_t> allowed_offsets_;
    std::vector<CellId> allowed_inputs_;
    std::uint32_t depth_ = 0;
};

// Cells outside avoid having an input whose successors are nonempty and all in z.
CellSet cpre(const Abstraction& abs, const CellSet& z, const CellSet& avoid);

Controller solve_reach_avoid(const Abstraction& abs, const GameObjective& obj);

// Greatest set from which the forbidden cells can be avoided forever.
CellSet respected_region(const Abstraction& abs, const CellSet& forbidden);

// cell_index,rank,policy_input_index; one row per winning cell, -1 on the target.
void write_controller_csv(std::ostream& out, const Controller& ctrl);

} // namespace kaw
