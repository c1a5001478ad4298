#include "kaw/synthesis.hpp"

#include "kaw/error.hpp"

#include <algorithm>

namespace kaw {

namespace {

void check_domain(const Abstraction& abs, const CellSet& s, const char* what)
{
    if (s.size() != abs.num_states())
        throw ValidationError(std::string(what) + " set does not match the abstraction's state grid");
}

bool usable(const Abstraction& abs, std::size_t pair)
{
    return !abs.blocked_pair(pair) && !abs.post_pair(pair).empty();
}

} // namespace

CellSet cpre(const Abstraction& abs, const CellSet& z, const CellSet& avoid)
{
    check_domain(abs, z, "target");
    check_domain(abs, avoid, "avoid");
    const std::size_t nu = abs.num_inputs();
    CellSet out(abs.num_states());
    for (std::size_t x = 0; x < abs.num_states(); ++x) {
        if (avoid.test(x)) continue;
        for (std::size_t u = 0; u < nu; ++u) {
            const std::size_t p = x * nu + u;
            if (!usable(abs, p)) continue;
            const auto succ = abs.post_pair(p);
            if (std::all_of(succ.begin(), succ.end(), [&](CellId y) { return z.test(y.value); })) {
                out.set(x);
                break;
            }
        }
    }
    return out;
}

Controller solve_reach_avoid(const Abstraction& abs, const GameObjective& obj)
{
    check_domain(abs, obj.target, "target");
    check_domain(abs, obj.avoid, "avoid");
    if (obj.target.intersects(obj.avoid)) throw ValidationError("target and avoid sets overlap");

    const std::size_t nx = abs.num_states();
    const std::size_t nu = abs.num_inputs();

    Controller c;
    c.target_ = obj.target;
    c.winning_ = obj.target;
    c.rank_.assign(nx, Controller::kUnranked);

    // Successors of a pair still outside the current winning set.
    std::vector<std::uint32_t> pending(nx * nu, 0);
    for (std::size_t p = 0; p < pending.size(); ++p)
        if (usable(abs, p)) pending[p] = static_cast<std::uint32_t>(abs.post_pair(p).size());

    // Layer k holds the cells of rank k. A pair's counter reaches zero while
    // layer k is processed exactly when its successors all lie in Z^k.
    std::vector<CellId> layer = members(obj.target);
    for (auto x : layer) c.rank_[x.value] = 0;
    std::uint32_t k = 0;
    while (!layer.empty()) {
        std::vector<CellId> next;
        for (auto y : layer) {
            for (auto p : abs.predecessors(y)) {
                if (pending[p] == 0 || --pending[p] != 0) continue;
                const std::size_t x = p / nu;
                if (c.winning_.test(x) || obj.avoid.test(x)) continue;
                c.winning_.set(x);
                c.rank_[x] = k + 1;
                next.push_back(CellId{static_cast<std::uint32_t>(x)});
            }
        }
        if (!next.empty()) c.depth_ = k + 1;
        std::sort(next.begin(), next.end());
        layer = std::move(next);
        ++k;
    }

    c.policy_.assign(nx, Controller::kNoInput);
    c.allowed_offsets_.assign(nx + 1, 0);
    for (std::size_t x = 0; x < nx; ++x) {
        const std::uint32_t r = c.rank_[x];
        if (r != Controller::kUnranked && r > 0) {
            for (std::size_t u = 0; u < nu; ++u) {
                const std::size_t p = x * nu + u;
                if (!usable(abs, p)) continue;
                const auto succ = abs.post_pair(p);
                if (std::all_of(succ.begin(), succ.end(), [&](CellId y) { return c.rank_[y.value] < r; }))
                    c.allowed_inputs_.push_back(CellId{static_cast<std::uint32_t>(u)});
            }
            c.policy_[x] = static_cast<std::int32_t>(c.allowed_inputs_[c.allowed_offsets_[x]].value);
        }
        c.allowed_offsets_[x + 1] = c.allowed_inputs_.size();
    }
    return c;
}

CellSet respected_region(const Abstraction& abs, const CellSet& forbidden)
{
    check_domain(abs, forbidden, "forbidden");
    const std::size_t nx = abs.num_states();
    const std::size_t nu = abs.num_inputs();

    CellSet z = ~forbidden;
    // alive: usable pair with every successor still in z.
    std::vector<char> alive(nx * nu, 0);
    std::vector<std::uint32_t> alive_count(nx, 0);
    for (std::size_t p = 0; p < alive.size(); ++p) {
        if (!usable(abs, p)) continue;
        const auto succ = abs.post_pair(p);
        if (std::all_of(succ.begin(), succ.end(), [&](CellId y) { return z.test(y.value); })) {
            alive[p] = 1;
            ++alive_count[p / nu];
        }
    }

    std::vector<std::uint32_t> removed;
    for (std::size_t x = 0; x < nx; ++x) {
        if (z.test(x) && alive_count[x] == 0) {
            z.reset(x);
            removed.push_back(static_cast<std::uint32_t>(x));
        }
    }
    while (!removed.empty()) {
        const std::uint32_t y = removed.back();
        removed.pop_back();
        for (auto p : abs.predecessors(CellId{y})) {
            if (!alive[p]) continue;
            alive[p] = 0;
            const std::size_t x = p / nu;
            if (--alive_count[x] == 0 && z.test(x)) {
                z.reset(x);
                removed.push_back(static_cast<std::uint32_t>(x));
            }
        }
    }
    return z;
}

void write_controller_csv(std::ostream& out, const Controller& ctrl)
{
    out << "cell_index,rank,policy_input_index\n";
    for_each_member(ctrl.winning(), [&](CellId x) {
        out << x.value << ',' << ctrl.rank(x) << ',' << ctrl.policy(x) << '\n';
    });
    if (!out) throw IoError("failed to write controller CSV");
}

} // namespace kaw
