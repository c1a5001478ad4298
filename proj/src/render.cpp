#include "kaw/render.hpp"

#include "kaw/error.hpp"

#include <cstdio>
#include <set>

namespace kaw {

namespace {

constexpr double kScale = 60.0;
constexpr double kMargin = 20.0;

struct Canvas {
    std::ostream& out;
    double x0, y1;

    [[nodiscard]] double px(double x) const { return kMargin + (x - x0) * kScale; }
    [[nodiscard]] double py(double y) const { return kMargin + (y1 - y) * kScale; }

    void rect(double lx, double ly, double ux, double uy, const char* style)
    {
        char buf[256];
        std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" style=\"%s\"/>\n",
                      px(lx), py(uy), (ux - lx) * kScale, (uy - ly) * kScale, style);
        out << buf;
    }
};

} // namespace

void render_svg(std::ostream& out, const World& world, const Trace& trace)
{
    const Grid& gx = world.grid_x;
    const HyperRect& b = gx.bounds();
    if (b.dim() < 2) throw ValidationError("rendering needs a planar state space");
    const double w = (b.upper[0] - b.lower[0]) * kScale + 2 * kMargin;
    const double h = (b.upper[1] - b.lower[1]) * kScale + 2 * kMargin;
    Canvas c{out, b.lower[0], b.upper[1]};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    c.rect(b.lower[0], b.lower[1], b.upper[0], b.upper[1], "fill:#ffffff;stroke:#000000;stroke-width:1");

    // Detection zones: cells related to a detected sign cell, projected to the plane.
    CellSet detected(gx.size());
    for (const auto& s : trace.steps)
        for (auto d : s.detected)
            if (gx.valid(d)) detected.set(d.value);
    std::set<std::pair<std::size_t, std::size_t>> zone;
    std::vector<CellId> preds;
    for (const auto& rule : detection_rules(world.kb)) {
        const Role& role = world.interp.role(rule.role);
        for_each_member(detected, [&](CellId s) {
            role.predecessors(s, preds);
            for (auto x : preds) {
                const auto k = gx.multi_index(x);
                zone.emplace(k[0], k[1]);
            }
        });
    }
    for (const auto& [i, j] : zone) {
        const double cx = b.lower[0] + static_cast<double>(i) * gx.eta()[0];
        const double cy = b.lower[1] + static_cast<double>(j) * gx.eta()[1];
        c.rect(cx - gx.eta()[0] / 2, cy - gx.eta()[1] / 2, cx + gx.eta()[0] / 2, cy + gx.eta()[1] / 2,
               "fill:#ffd54f;fill-opacity:0.35;stroke:none");
    }

    auto style_for = [](const std::string& concept_name) {
        if (concept_name == "Target") return "fill:#66bb6a;fill-opacity:0.7;stroke:#2e7d32";
        if (concept_name == "Obstacle") return "fill:#9e9e9e;stroke:#424242";
        return "fill:#90caf9;fill-opacity:0.5;stroke:#1565c0";
    };
    for (const auto& [name, boxes] : world.scenario.regions.regions)
        for (const auto& r : boxes) c.rect(r.lower[0], r.lower[1], r.upper[0], r.upper[1], style_for(name));
    for (const auto& inst : world.scenario.regions.instances) {
        for (const auto& r : inst.scope)
            c.rect(r.lower[0], r.lower[1], r.upper[0], r.upper[1],
                   "fill:#ef9a9a;fill-opacity:0.25;stroke:#c62828;stroke-dasharray:4,3");
        for (const auto& r : inst.boxes)
            c.rect(r.lower[0], r.lower[1], r.upper[0], r.upper[1], "fill:#e53935;stroke:#b71c1c");
    }

    if (!trace.steps.empty()) {
        out << "<polyline style=\"fill:none;stroke:#1a237e;stroke-width:2\" points=\"";
        char buf[64];
        for (const auto& s : trace.steps) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", c.px(s.state[0]), c.py(s.state[1]));
            out << buf;
        }
        out << "\"/>\n";
        const auto& s0 = trace.steps.front().state;
        std::snprintf(buf, sizeof buf, "%.2f", c.px(s0[0]));
        out << "<circle cx=\"" << buf;
        std::snprintf(buf, sizeof buf, "%.2f", c.py(s0[1]));
        out << "\" cy=\"" << buf << "\" r=\"5\" style=\"fill:#1a237e\"/>\n";
        for (const auto& s : trace.steps) {
            if (s.detected.empty()) continue;
            std::snprintf(buf, sizeof buf, "%.2f", c.px(s.state[0]));
            out << "<circle cx=\"" << buf;
            std::snprintf(buf, sizeof buf, "%.2f", c.py(s.state[1]));
            out << "\" cy=\"" << buf << "\" r=\"6\" style=\"fill:none;stroke:#d50000;stroke-width:2\"/>\n";
        }
    }
    out << "</svg>\n";
    if (!out) throw IoError("failed to write SVG");
}

} // namespace kaw
