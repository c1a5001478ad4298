#include "doctest.h"
#include "oracles.hpp"

#include "kaw/abstraction.hpp"
#include "kaw/error.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace kaw;
using std::numbers::pi;

namespace {

HyperRect zero_w() { return HyperRect({0, 0, 0}, {0, 0, 0}); }

ContinuousSystem still_system()
{
    auto field = [](std::span<const double>, std::span<const double>, std::span<double> dx) { dx[0] = 0; };
    return ContinuousSystem("still", 1, 1, field, HyperRect({0}, {0}), 0.2, Eigen::MatrixXd::Zero(1, 1),
                            Eigen::MatrixXd::Zero(1, 1));
}

Grid small_car_grid() { return Grid(HyperRect({0, 0, -pi}, {3.1, 3, pi}), {0.3, 0.3, 0.52}, {false, false, true}); }
Grid car_inputs() { return Grid(HyperRect({-2 * pi}, {2 * pi}), {0.26}, {false}); }

bool contains(std::span<const CellId> s, CellId c) { return std::binary_search(s.begin(), s.end(), c); }

} // namespace

TEST_CASE("a system at rest only reaches its own cell")
{
    const Grid gx(HyperRect({0}, {4}), {1}, {false});
    const Grid gu(HyperRect({0}, {1}), {1}, {false});
    BuildOptions opts;
    opts.integration_margin = 0;
    const Abstraction abs = build_abstraction(still_system(), gx, gu, opts);
    for (std::uint32_t x = 0; x < gx.size(); ++x) {
        for (std::uint32_t u = 0; u < gu.size(); ++u) {
            const auto post = abs.post(CellId{x}, CellId{u});
            REQUIRE(post.size() == 1);
            CHECK(post[0].value == x);
        }
    }
    CHECK(abs.transition_count() == gx.size() * gu.size());
    CHECK_THROWS_AS((void)abs.post(CellId{5}, CellId{0}), InvalidCell);
    CHECK_THROWS_AS((void)abs.post(CellId{0}, CellId{2}), InvalidCell);
}

TEST_CASE("successors of a car cell")
{
    const Grid gx(HyperRect({-1.5, -1.5, -pi}, {1.5, 1.5, pi}), {0.15, 0.15, 0.26}, {false, false, true});
    const Grid gu = car_inputs();
    const auto car = make_dubins_car(0.2, zero_w());
    BuildOptions opts;
    opts.cover_input_cells = false;
    const Abstraction abs = build_abstraction(car, gx, gu, opts);

    const CellId x = gx.quantize(std::vector{0.0, 0.0, 0.0});
    // Input points are -2pi + 0.26 k, so the one nearest 0 is slightly negative.
    const CellId u = gu.quantize(std::vector{0.0});
    REQUIRE(std::abs(gu.center(u)[0]) < 0.13);
    // Oracle: reach rectangle from the growth bound, then every cell whose
    // rectangle overlaps its interior.
    const ReachSet reach = reach_over_approx(car, {gx.center(x), {0.075, 0.075, gx.eta()[2] / 2}}, gu.center(u));
    CHECK(reach.radius[0] == doctest::Approx(0.075 + 0.2 * gx.eta()[2] / 2));
    std::vector<CellId> expected;
    for (std::uint32_t c = 0; c < gx.size(); ++c) {
        const HyperRect r = gx.cell_rect(CellId{c});
        bool meets = true;
        for (int d = 0; d < 2; ++d) {
            const double lo = reach.center[d] - reach.radius[d] - 1e-6, hi = reach.center[d] + reach.radius[d] + 1e-6;
            meets = meets && r.lower[d] < hi && lo < r.upper[d];
        }
        const double mid = 0.5 * (r.lower[2] + r.upper[2]);
        meets = meets && oracle::angle_gap(mid, reach.center[2]) < gx.eta()[2] / 2 + reach.radius[2] + 1e-6;
        if (meets) expected.push_back(CellId{c});
    }
    const auto post = abs.post(x, u);
    CHECK(std::vector<CellId>(post.begin(), post.end()) == expected);
    for (auto y : post) {
        const Vec c = gx.center(y);
        CHECK(c[0] > 0.1);
        CHECK(c[0] < 0.35);
        CHECK(std::abs(c[1]) < 0.2);
    }
}

TEST_CASE("pairs leaving the domain are blocked")
{
    const Grid gx = small_car_grid();
    const auto car = make_dubins_car(0.2, zero_w());
    const Abstraction abs = build_abstraction(car, gx, car_inputs());
    const CellId corner = gx.quantize(std::vector{0.0, 1.5, pi});
    const CellId straight = car_inputs().quantize(std::vector{0.0});
    CHECK(abs.blocked(corner, straight));
    CHECK(abs.post(corner, straight).empty());
    CHECK(abs.stats().blocked_pairs > 0);
}

TEST_CASE("abstraction is sound for sampled trajectories")
{
    const Grid gx = small_car_grid();
    const Grid gu = car_inputs();
    const HyperRect w({-0.02, -0.02, -0.02}, {0.02, 0.02, 0.02});
    const auto car = make_dubins_car(0.2, w);
    const Abstraction abs = build_abstraction(car, gx, gu);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u01(0, 1);
    std::uniform_int_distribution<std::uint32_t> cell(0, static_cast<std::uint32_t>(gx.size() - 1));
    std::uniform_int_distribution<std::uint32_t> input(0, static_cast<std::uint32_t>(gu.size() - 1));
    int checked = 0, violations = 0;
    while (checked < 10000) {
        const CellId xc{cell(rng)}, uc{input(rng)};
        if (abs.blocked(xc, uc)) continue;
        const HyperRect r = gx.cell_rect(xc);
        Vec x(3);
        for (int d = 0; d < 3; ++d) {
            const double lo = gx.periodic()[d] ? r.lower[d] : std::max(r.lower[d], gx.bounds().lower[d]);
            const double hi = gx.periodic()[d] ? r.upper[d] : std::min(r.upper[d], gx.bounds().upper[d]);
            x[d] = lo + (hi - lo) * u01(rng);
        }
        const HyperRect ur = gu.cell_rect(uc);
        const double u = ur.lower[0] + (ur.upper[0] - ur.lower[0]) * u01(rng);
        Vec pieces(12);
        for (int k = 0; k < 12; ++k) pieces[k] = w.lower[k % 3] + (w.upper[k % 3] - w.lower[k % 3]) * u01(rng);
        Vec y = flow(car, x, Vec{u}, 0.2, pieces);
        ++checked;
        if (!gx.bounds().contains(y)) {
            ++violations;
            continue;
        }
        violations += !contains(abs.post(xc, uc), gx.quantize(y));
    }
    CHECK(violations == 0);
}

TEST_CASE("cache round trip and determinism")
{
    const Grid gx = small_car_grid();
    const auto car = make_dubins_car(0.2, zero_w());
    const Abstraction a = build_abstraction(car, gx, car_inputs());
    BuildOptions two;
    two.threads = 2;
    const Abstraction b = build_abstraction(car, gx, car_inputs(), two);
    CHECK(a == b);

    const auto dir = std::filesystem::temp_directory_path();
    const auto path = dir / "kaw_test_cache.kawc";
    a.save(path);
    const Abstraction c = Abstraction::load(path);
    CHECK(a == c);
    CHECK(c.stats().transitions == a.transition_count());

    // Recompute 100 random pairs from scratch against the stored lists.
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::uint32_t> cell(0, static_cast<std::uint32_t>(gx.size() - 1));
    std::uniform_int_distribution<std::uint32_t> input(0, 48);
    for (int t = 0; t < 100; ++t) {
        const CellId x{cell(rng)}, u{input(rng)};
        const auto post = c.post(x, u);
        CHECK(std::is_sorted(post.begin(), post.end()));
        for (auto y : post) {
            const auto preds = c.predecessors(y);
            CHECK(std::binary_search(preds.begin(), preds.end(), x.value * 49 + u.value));
        }
    }

    {
        std::ofstream bad(dir / "kaw_test_bad.kawc", std::ios::binary);
        bad << "NOPE and some bytes";
    }
    CHECK_THROWS_AS((void)Abstraction::load(dir / "kaw_test_bad.kawc"), CacheError);
    {
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        std::ofstream cut(dir / "kaw_test_cut.kawc", std::ios::binary);
        cut << bytes.substr(0, bytes.size() / 2);
    }
    CHECK_THROWS_AS((void)Abstraction::load(dir / "kaw_test_cut.kawc"), CacheError);
    CHECK_THROWS_AS((void)Abstraction::load(dir / "does_not_exist.kawc"), IoError);
    std::filesystem::remove(path);
    std::filesystem::remove(dir / "kaw_test_bad.kawc");
    std::filesystem::remove(dir / "kaw_test_cut.kawc");
}

TEST_CASE("explicit transition tables are validated")
{
    const Grid g = oracle::line_grid(3);
    const Grid u = oracle::line_grid(1);
    CHECK_THROWS_AS(Abstraction(g, u, 1.0, {{CellId{1}, CellId{0}}, {}, {}}, {false, false, false}), ValidationError);
    CHECK_THROWS_AS(Abstraction(g, u, 1.0, {{CellId{5}}, {}, {}}, {false, false, false}), ValidationError);
    CHECK_THROWS_AS(Abstraction(g, u, 1.0, {{CellId{0}}, {}, {}}, {true, false, false}), ValidationError);
    const Abstraction ok(g, u, 1.0, {{CellId{1}}, {CellId{2}}, {}}, {false, false, true});
    CHECK(ok.blocked(CellId{2}, CellId{0}));
    CHECK(ok.post(CellId{2}, CellId{0}).empty());
    CHECK(ok.predecessors(CellId{2}).size() == 1);
}

TEST_CASE("thread cap from the environment")
{
    setenv("KAW_THREADS", "1", 1);
    CHECK(worker_count(8) == 1);
    unsetenv("KAW_THREADS");
    CHECK(worker_count(3) == 3);
}
