#include "kaw/abstraction.hpp"

#include "kaw/error.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>
#include <thread>

namespace kaw {

namespace {

constexpr char kMagic[4] = {'K', 'A', 'W', '1'};
constexpr std::uint32_t kCacheVersion = 1;

// Reach sets are inflated by this much to absorb RK4 error in the center.
// Reach rectangles merely touching a cell face do not make it a successor.
constexpr double kFaceTolerance = 1e-9;

class Writer {
public:
    void bytes(const void* p, std::size_t n)
    {
        const auto* c = static_cast<const char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    template <typename T>
    void pod(T v)
    {
        bytes(&v, sizeof v);
    }
    void varint(std::uint64_t v)
    {
        while (v >= 0x80) {
            buf_.push_back(static_cast<char>((v & 0x7f) | 0x80));
            v >>= 7;
        }
        buf_.push_back(static_cast<char>(v));
    }
    [[nodiscard]] const std::vector<char>& data() const noexcept { return buf_; }

private:
    std::vector<char> buf_;
};

class Reader {
public:
    explicit Reader(std::vector<char> buf) : buf_(std::move(buf)) {}

    void bytes(void* p, std::size_t n)
    {
        if (pos_ + n > buf_.size()) throw CacheError("abstraction cache truncated");
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    template <typename T>
    T pod()
    {
        T v;
        bytes(&v, sizeof v);
        return v;
    }
    std::uint64_t varint()
    {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            if (pos_ >= buf_.size()) throw CacheError("abstraction cache truncated inside varint");
            const auto b = static_cast<unsigned char>(buf_[pos_++]);
            v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
            if (!(b & 0x80)) return v;
        }
        throw CacheError("malformed varint in abstraction cache");
    }
    [[nodiscard]] bool done() const noexcept { return pos_ == buf_.size(); }

private:
    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

void write_grid(Writer& w, const Grid& g)
{
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(g.dim()));
    for (std::size_t i = 0; i < g.dim(); ++i) {
        w.pod<double>(g.bounds().lower[i]);
        w.pod<double>(g.bounds().upper[i]);
        w.pod<double>(g.requested_eta()[i]);
        w.pod<std::uint8_t>(g.periodic()[i] ? 1 : 0);
    }
}

Grid read_grid(Reader& r)
{
    const auto n = r.pod<std::uint32_t>();
    if (n == 0 || n > kMaxStateDim) throw CacheError("abstraction cache has an invalid grid dimension");
    Vec lo(n), hi(n), eta(n);
    std::vector<bool> periodic(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        lo[i] = r.pod<double>();
        hi[i] = r.pod<double>();
        eta[i] = r.pod<double>();
        periodic[i] = r.pod<std::uint8_t>() != 0;
    }
    return Grid(HyperRect(lo, hi), eta, periodic);
}

} // namespace

Abstraction::Abstraction(Grid grid_x, Grid grid_u, double tau, const std::vector<std::vector<CellId>>& successors,
                         const std::vector<bool>& blocked)
    : grid_x_(std::move(grid_x)), grid_u_(std::move(grid_u)), tau_(tau), blocked_(blocked)
{
    const std::size_t pairs = grid_x_.size() * grid_u_.size();
    if (successors.size() != pairs || blocked.size() != pairs)
        throw ValidationError("successor table does not match |X| * |U|");
    offsets_.reserve(pairs + 1);
    offsets_.push_back(0);
    for (const auto& list : successors) {
        targets_.insert(targets_.end(), list.begin(), list.end());
        offsets_.push_back(targets_.size());
    }
    validate();
    index_predecessors();
}

Abstraction::Abstraction(Grid grid_x, Grid grid_u, double tau, std::vector<std::uint64_t> offsets,
                         std::vector<CellId> targets, std::vector<bool> blocked)
    : grid_x_(std::move(grid_x)), grid_u_(std::move(grid_u)), tau_(tau), offsets_(std::move(offsets)),
      targets_(std::move(targets)), blocked_(std::move(blocked))
{
    validate();
    index_predecessors();
}

void Abstraction::validate() const
{
    const std::size_t pairs = grid_x_.size() * grid_u_.size();
    if (offsets_.size() != pairs + 1 || blocked_.size() != pairs || offsets_.front() != 0 ||
        offsets_.back() != targets_.size())
        throw ValidationError("malformed transition table");
    for (std::size_t p = 0; p < pairs; ++p) {
        if (offsets_[p] > offsets_[p + 1]) throw ValidationError("transition offsets not monotone");
        const auto list = post_pair(p);
        if (blocked_[p] && !list.empty()) throw ValidationError("blocked pair with successors");
        for (std::size_t k = 0; k < list.size(); ++k) {
            if (!grid_x_.valid(list[k])) throw ValidationError("successor outside the state grid");
            if (k > 0 && !(list[k - 1] < list[k])) throw ValidationError("successor list not sorted and unique");
        }
    }
}

void Abstraction::index_predecessors()
{
    const std::size_t nx = num_states();
    pred_offsets_.assign(nx + 1, 0);
    for (auto t : targets_) ++pred_offsets_[t.value + 1];
    for (std::size_t i = 0; i < nx; ++i) pred_offsets_[i + 1] += pred_offsets_[i];
    pred_pairs_.resize(targets_.size());
    std::vector<std::uint64_t> fill(pred_offsets_.begin(), pred_offsets_.end() - 1);
    const std::size_t pairs = offsets_.size() - 1;
    for (std::size_t p = 0; p < pairs; ++p)
        for (auto t : post_pair(p)) pred_pairs_[fill[t.value]++] = static_cast<std::uint32_t>(p);
}

void Abstraction::check(CellId x, CellId u) const
{
    if (!grid_x_.valid(x)) throw InvalidCell("state cell " + std::to_string(x.value) + " out of range");
    if (!grid_u_.valid(u)) throw InvalidCell("input cell " + std::to_string(u.value) + " out of range");
}

std::span<const CellId> Abstraction::post(CellId x, CellId u) const
{
    check(x, u);
    return post_pair(static_cast<std::size_t>(x.value) * num_inputs() + u.value);
}

bool Abstraction::blocked(CellId x, CellId u) const
{
    check(x, u);
    return blocked_[static_cast<std::size_t>(x.value) * num_inputs() + u.value];
}

AbstractionStats Abstraction::stats() const
{
    AbstractionStats s;
    s.states = num_states();
    s.inputs = num_inputs();
    s.blocked_pairs = static_cast<std::size_t>(std::count(blocked_.begin(), blocked_.end(), true));
    s.transitions = targets_.size();
    s.memory_bytes = offsets_.size() * sizeof(std::uint64_t) + targets_.size() * sizeof(CellId) +
                     blocked_.size() / 8 + pred_offsets_.size() * sizeof(std::uint64_t) +
                     pred_pairs_.size() * sizeof(std::uint32_t);
    return s;
}

bool operator==(const Abstraction& a, const Abstraction& b)
{
    return a.grid_x_ == b.grid_x_ && a.grid_u_ == b.grid_u_ && a.tau_ == b.tau_ && a.offsets_ == b.offsets_ &&
           a.targets_ == b.targets_ && a.blocked_ == b.blocked_;
}

void Abstraction::save(const std::filesystem::path& path) const
{
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.pod<std::uint32_t>(kCacheVersion);
    write_grid(w, grid_x_);
    write_grid(w, grid_u_);
    w.pod<double>(tau_);
    const std::size_t pairs = offsets_.size() - 1;
    w.pod<std::uint64_t>(pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
        const auto list = post_pair(p);
        w.varint(blocked_[p] ? 0 : list.size() + 1);
        std::uint32_t prev = 0;
        for (std::size_t k = 0; k < list.size(); ++k) {
            w.varint(k == 0 ? list[k].value : list[k].value - prev);
            prev = list[k].value;
        }
    }
    w.pod<std::uint64_t>(targets_.size());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Abstraction Abstraction::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open abstraction cache '" + path.string() + "'");
    Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));

    char magic[4];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw CacheError("not an abstraction cache (bad magic)");
    const auto version = r.pod<std::uint32_t>();
    if (version != kCacheVersion)
        throw CacheError("abstraction cache version " + std::to_string(version) + " unsupported (expected " +
                         std::to_string(kCacheVersion) + ")");
    Grid gx = read_grid(r);
    Grid gu = read_grid(r);
    const auto tau = r.pod<double>();
    const auto pairs = r.pod<std::uint64_t>();
    if (pairs != gx.size() * gu.size()) throw CacheError("abstraction cache pair count mismatch");

    std::vector<std::uint64_t> offsets;
    offsets.reserve(pairs + 1);
    offsets.push_back(0);
    std::vector<CellId> targets;
    std::vector<bool> blocked(pairs, false);
    for (std::uint64_t p = 0; p < pairs; ++p) {
        const auto tag = r.varint();
        if (tag == 0) {
            blocked[p] = true;
        } else {
            std::uint64_t value = 0;
            for (std::uint64_t k = 0; k + 1 < tag; ++k) {
                const auto v = r.varint();
                value = k == 0 ? v : value + v;
                if (value >= gx.size()) throw CacheError("successor index out of range in cache");
                targets.push_back(CellId{static_cast<std::uint32_t>(value)});
            }
        }
        offsets.push_back(targets.size());
    }
    if (r.pod<std::uint64_t>() != targets.size()) throw CacheError("abstraction cache transition count mismatch");
    if (!r.done()) throw CacheError("trailing bytes in abstraction cache");
    try {
        return Abstraction(std::move(gx), std::move(gu), tau, std::move(offsets), std::move(targets),
                           std::move(blocked));
    } catch (const ValidationError& e) {
        throw CacheError(std::string("corrupt abstraction cache: ") + e.what());
    }
}

unsigned worker_count(unsigned requested)
{
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("KAW_THREADS")) {
        const long v = std::strtol(cap, nullptr, 10);
        if (v > 0) n = std::min(n, static_cast<unsigned>(v));
    }
    return std::max(1u, n);
}

Abstraction build_abstraction(const ContinuousSystem& sys, const Grid& grid_x, const Grid& grid_u,
                              const BuildOptions& options)
{
    if (grid_x.dim() != sys.state_dim() || grid_u.dim() != sys.input_dim())
        throw ValidationError("grid dimensions do not match the system");

    const std::size_t n = sys.state_dim();
    const std::size_t nx = grid_x.size();
    const std::size_t nu = grid_u.size();

    if (!(options.integration_margin >= 0)) throw ValidationError("integration margin must be non-negative");
    Vec input_radius;
    if (options.cover_input_cells)
        for (double e : grid_u.eta()) input_radius.push_back(e / 2);
    auto padded = [&](std::span<const double> r0) {
        Vec r = growth_radius(sys, r0, input_radius);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] += options.integration_margin;
            if (grid_x.periodic()[i]) r[i] = std::min(r[i], std::numbers::pi);
        }
        return r;
    };
    Vec half_eta(n);
    for (std::size_t i = 0; i < n; ++i) half_eta[i] = grid_x.eta()[i] / 2;
    // With uniform cells the radius is shared by every cell inside the domain;
    // cells on the border only represent their part inside it.
    const Vec radius = padded(half_eta);

    std::vector<Vec> inputs(nu);
    for (std::size_t u = 0; u < nu; ++u) inputs[u] = grid_u.center(CellId{static_cast<std::uint32_t>(u)});

    struct Chunk {
        std::vector<std::uint32_t> counts;
        std::vector<CellId> targets;
        std::vector<bool> blocked;
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(options.threads), nx));
    std::vector<Chunk> chunks(workers);

    auto work = [&](unsigned w) {
        const std::size_t begin = nx * w / workers;
        const std::size_t end = nx * (w + 1) / workers;
        Chunk& chunk = chunks[w];
        chunk.counts.reserve((end - begin) * nu);
        chunk.blocked.reserve((end - begin) * nu);
        std::vector<CellId> buf;
        HyperRect rect;
        rect.lower.resize(n);
        rect.upper.resize(n);
        std::array<double, kMaxStateDim> x{};
        for (std::size_t cell = begin; cell < end; ++cell) {
            const CellId id{static_cast<std::uint32_t>(cell)};
            Vec c = grid_x.center(id);
            const auto k = grid_x.multi_index(id);
            Vec r0 = half_eta;
            bool clipped = false;
            // Source region: the states that quantize to this cell.
            for (std::size_t i = 0; i < n; ++i) {
                if (grid_x.periodic()[i]) continue;
                const double lo = k[i] == 0 ? grid_x.bounds().lower[i] : c[i] - half_eta[i];
                const double hi = k[i] + 1 == grid_x.counts()[i] ? grid_x.bounds().upper[i] : c[i] + half_eta[i];
                if (lo != c[i] - half_eta[i] || hi != c[i] + half_eta[i]) {
                    clipped = true;
                    c[i] = 0.5 * (lo + hi);
                    r0[i] = 0.5 * (hi - lo);
                }
            }
            const Vec cell_radius = clipped ? padded(r0) : radius;
            for (std::size_t u = 0; u < nu; ++u) {
                std::copy(c.begin(), c.end(), x.begin());
                flow_inplace(sys, std::span<double>(x.data(), n), inputs[u], sys.tau());
                bool out = false;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!grid_x.periodic()[i] && (x[i] - cell_radius[i] < grid_x.bounds().lower[i] ||
                                                  x[i] + cell_radius[i] > grid_x.bounds().upper[i]))
                        out = true;
                    const double shrink = std::min(kFaceTolerance, cell_radius[i]);
                    rect.lower[i] = x[i] - cell_radius[i] + shrink;
                    rect.upper[i] = x[i] + cell_radius[i] - shrink;
                }
                if (out) {
                    chunk.counts.push_back(0);
                    chunk.blocked.push_back(true);
                    continue;
                }
                grid_x.cells_intersecting(rect, buf);
                chunk.counts.push_back(static_cast<std::uint32_t>(buf.size()));
                chunk.blocked.push_back(false);
                chunk.targets.insert(chunk.targets.end(), buf.begin(), buf.end());
            }
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    // Deterministic merge in chunk order.
    std::vector<std::uint64_t> offsets;
    offsets.reserve(nx * nu + 1);
    offsets.push_back(0);
    std::vector<CellId> targets;
    std::size_t total = 0;
    for (const auto& ch : chunks) total += ch.targets.size();
    targets.reserve(total);
    std::vector<bool> blocked;
    blocked.reserve(nx * nu);
    for (auto& ch : chunks) {
        for (auto cnt : ch.counts) offsets.push_back(offsets.back() + cnt);
        targets.insert(targets.end(), ch.targets.begin(), ch.targets.end());
        blocked.insert(blocked.end(), ch.blocked.begin(), ch.blocked.end());
        ch = Chunk{};
    }
    return Abstraction(grid_x, grid_u, sys.tau(), std::move(offsets), std::move(targets), std::move(blocked));
}

} // namespace kaw
