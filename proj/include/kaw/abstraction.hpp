#pragma once

#include "kaw/dynamics.hpp"
#include "kaw/grid.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace kaw {

struct AbstractionStats {
    std::size_t states = 0;
    std::size_t inputs = 0;
    std::size_t blocked_pairs = 0;
    std::size_t transitions = 0;
    std::size_t memory_bytes = 0;
};

/*
 * Finite abstraction (X̄, Ū, T_F) stored as compressed successor lists.
 *
 * Pairs are indexed state-major: pair = x * |Ū| + u. A blocked pair (its
 * reach set left the state domain) has no usable transition and an empty
 * successor list. Immutable after construction, so safe to share across
 * threads.
 */
class Abstraction {
public:
    // successors has one sorted, duplicate-free list per pair; blocked lists must be empty.
    Abstraction(Grid grid_x, Grid grid_u, double tau, const std::vector<std::vector<CellId>>& successors,
                const std::vector<bool>& blocked);

    // Takes CSR arrays directly: offsets has pairs+1 entries.
    Abstraction(Grid grid_x, Grid grid_u, double tau, std::vector<std::uint64_t> offsets,
                std::vector<CellId> targets, std::vector<bool> blocked);

    [[nodiscard]] const Grid& grid_x() const noexcept { return grid_x_; }
    [[nodiscard]] const Grid& grid_u() const noexcept { return grid_u_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }
    [[nodiscard]] std::size_t num_states() const noexcept { return grid_x_.size(); }
    [[nodiscard]] std::size_t num_inputs() const noexcept { return grid_u_.size(); }
    [[nodiscard]] std::size_t transition_count() const noexcept { return targets_.size(); }

    [[nodiscard]] std::span<const CellId> post(CellId x, CellId u) const;
    [[nodiscard]] bool blocked(CellId x, CellId u) const;

    // Unchecked access by pair index, for the solvers.
    [[nodiscard]] std::span<const CellId> post_pair(std::size_t pair) const noexcept
    {
        return {targets_.data() + offsets_[pair], targets_.data() + offsets_[pair + 1]};
    }
    [[nodiscard]] bool blocked_pair(std::size_t pair) const noexcept { return blocked_[pair]; }
    // Pair indices having y among their successors, ascending.
    [[nodiscard]] std::span<const std::uint32_t> predecessors(CellId y) const noexcept
    {
        return {pred_pairs_.data() + pred_offsets_[y.value], pred_pairs_.data() + pred_offsets_[y.value + 1]};
    }

    [[nodiscard]] AbstractionStats stats() const;

    void save(const std::filesystem::path& path) const;
    static Abstraction load(const std::filesystem::path& path);

    // Bit-identical transition structure and descriptors.
    friend bool operator==(const Abstraction& a, const Abstraction& b);

private:
    void validate() const;
    void index_predecessors();
    void check(CellId x, CellId u) const;

    Grid grid_x_;
    Grid grid_u_;
    double tau_;
    std::vector<std::uint64_t> offsets_;
    std::vector<CellId> targets_;
    std::vector<bool> blocked_;
    std::vector<std::uint64_t> pred_offsets_;
    std::vector<std::uint32_t> pred_pairs_;
};

struct BuildOptions {
    // Widen reach sets to cover every input in the input cell, not just its center.
    bool cover_input_cells = true;
    // Added to every reach radius to absorb integration error.
    double integration_margin = 1e-6;
    // 0 means: KAW_THREADS if set, otherwise hardware concurrency.
    unsigned threads = 0;
};

// Worker count honouring the KAW_THREADS cap.
unsigned worker_count(unsigned requested = 0);

Abstraction build_abstraction(const ContinuousSystem& sys, const Grid& grid_x, const Grid& grid_u,
                              const BuildOptions& options = {});

} // namespace kaw
