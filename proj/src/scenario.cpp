#include "kaw/scenario.hpp"

#include "kaw/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

namespace kaw {

namespace {

using nlohmann::json;

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    [[noreturn]] void parse_error_at(std::size_t offset, const std::string& what) const
    {
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(what, line, col);
    }

    // Offset of the first character of a string value as written in the file.
    [[nodiscard]] std::size_t locate(const std::string& value) const
    {
        const auto at = text_.find('"' + value + '"');
        return at == std::string_view::npos ? 0 : at + 1;
    }

private:
    std::string_view text_;
};

[[noreturn]] void invalid(const std::string& field, const std::string& what)
{
    throw ValidationError(field + ": " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& field)
{
    if (!obj.is_object()) invalid(field, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) invalid(field + "." + key, "missing");
    return *it;
}

double number(const json& j, const std::string& field)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        static const std::regex pi_re(R"(^\s*([+-]?)\s*(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$)");
        const auto s = j.get<std::string>();
        std::smatch m;
        if (std::regex_match(s, m, pi_re)) {
            double v = std::numbers::pi;
            if (m[2].matched) v *= std::stod(m[2].str());
            if (m[3].matched) v /= std::stod(m[3].str());
            return m[1].str() == "-" ? -v : v;
        }
    }
    invalid(field, "expected a number or a multiple of pi");
}

Vec vector_of(const json& j, const std::string& field)
{
    if (!j.is_array() || j.empty()) invalid(field, "expected a nonempty array");
    Vec out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

HyperRect rect_of(const json& j, const std::string& field)
{
    Vec lo = vector_of(member(j, "lower", field), field + ".lower");
    Vec hi = vector_of(member(j, "upper", field), field + ".upper");
    try {
        return HyperRect(std::move(lo), std::move(hi));
    } catch (const Error& e) {
        invalid(field, e.what());
    }
}

std::string string_of(const json& j, const std::string& field)
{
    if (!j.is_string()) invalid(field, "expected a string");
    return j.get<std::string>();
}

double positive(double v, const std::string& field)
{
    if (!(v > 0) || !std::isfinite(v)) invalid(field, "must be positive");
    return v;
}

// Planar boxes are lifted to the full state space by spanning the other axes.
HyperRect map_box(const json& j, const std::string& field, const HyperRect& bounds)
{
    HyperRect r = rect_of(j, field);
    if (r.dim() == 2 && bounds.dim() > 2) {
        for (std::size_t i = 2; i < bounds.dim(); ++i) {
            r.lower.push_back(bounds.lower[i]);
            r.upper.push_back(bounds.upper[i]);
        }
    }
    if (r.dim() != bounds.dim()) invalid(field, "box dimension does not match the state space");
    for (std::size_t i = 0; i < r.dim(); ++i)
        if (r.upper[i] < bounds.lower[i] || r.lower[i] > bounds.upper[i])
            invalid(field, "box does not intersect the state bounds");
    return r;
}

std::vector<HyperRect> box_list(const json& j, const std::string& field, const HyperRect& bounds)
{
    if (!j.is_array()) invalid(field, "expected an array of boxes");
    std::vector<HyperRect> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(map_box(j[i], field + "[" + std::to_string(i) + "]", bounds));
    return out;
}

} // namespace

Scenario parse_scenario(std::string_view text, const std::string& name)
{
    const Reader reader(text);
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        reader.parse_error_at(e.byte > 0 ? e.byte - 1 : 0, "malformed JSON");
    }

    Scenario s;
    s.name = root.is_object() && root.contains("name") ? string_of(root["name"], "name") : name;

    const json& sys = member(root, "system", "scenario");
    s.model = string_of(member(sys, "model", "system"), "system.model");
    s.tau = positive(number(member(sys, "tau", "system"), "system.tau"), "system.tau");
    s.state_bounds = rect_of(member(sys, "state_bounds", "system"), "system.state_bounds");
    s.input_bounds = rect_of(member(sys, "input_bounds", "system"), "system.input_bounds");
    s.disturbance = rect_of(member(sys, "disturbance", "system"), "system.disturbance");
    s.eta_x = vector_of(member(sys, "eta_x", "system"), "system.eta_x");
    s.eta_u = vector_of(member(sys, "eta_u", "system"), "system.eta_u");
    const std::size_t n = s.state_bounds.dim();
    if (s.eta_x.size() != n) invalid("system.eta_x", "needs one entry per state dimension");
    if (s.eta_u.size() != s.input_bounds.dim()) invalid("system.eta_u", "needs one entry per input dimension");
    if (s.disturbance.dim() != n) invalid("system.disturbance", "needs one entry per state dimension");
    for (std::size_t i = 0; i < n; ++i) positive(s.eta_x[i], "system.eta_x[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < s.eta_u.size(); ++i) positive(s.eta_u[i], "system.eta_u[" + std::to_string(i) + "]");
    s.periodic.assign(n, false);
    if (sys.contains("periodic")) {
        const json& p = sys["periodic"];
        if (!p.is_array() || p.size() != n) invalid("system.periodic", "needs one boolean per state dimension");
        for (std::size_t i = 0; i < n; ++i) {
            if (!p[i].is_boolean()) invalid("system.periodic[" + std::to_string(i) + "]", "expected a boolean");
            s.periodic[i] = p[i].get<bool>();
        }
    }

    const json& kb = member(root, "knowledge", "scenario");
    const json& concepts = member(kb, "concepts", "knowledge");
    if (!concepts.is_array()) invalid("knowledge.concepts", "expected an array of names");
    for (std::size_t i = 0; i < concepts.size(); ++i)
        s.concepts.push_back(string_of(concepts[i], "knowledge.concepts[" + std::to_string(i) + "]"));
    if (kb.contains("roles")) {
        const json& roles = kb["roles"];
        if (!roles.is_array()) invalid("knowledge.roles", "expected an array");
        for (std::size_t i = 0; i < roles.size(); ++i) {
            const std::string f = "knowledge.roles[" + std::to_string(i) + "]";
            RoleSpec r;
            r.name = string_of(member(roles[i], "name", f), f + ".name");
            if (roles[i].contains("range")) r.range = positive(number(roles[i]["range"], f + ".range"), f + ".range");
            s.roles.push_back(r);
        }
    }
    if (kb.contains("tbox")) {
        const json& tbox = kb["tbox"];
        if (!tbox.is_array()) invalid("knowledge.tbox", "expected an array of axioms");
        for (std::size_t i = 0; i < tbox.size(); ++i) {
            const std::string ax = string_of(tbox[i], "knowledge.tbox[" + std::to_string(i) + "]");
            try {
                (void)parse_axiom(ax);
            } catch (const SyntaxError& e) {
                reader.parse_error_at(reader.locate(ax) + e.position(), e.what());
            }
            s.tbox.push_back(ax);
        }
    }

    const auto declared = [&](const std::string& c) {
        return std::find(s.concepts.begin(), s.concepts.end(), c) != s.concepts.end();
    };
    const json& map = member(root, "map", "scenario");
    if (map.contains("regions")) {
        const json& regions = map["regions"];
        if (!regions.is_object()) invalid("map.regions", "expected an object of concept name to boxes");
        for (const auto& [concept_name, boxes] : regions.items()) {
            const std::string f = "map.regions." + concept_name;
            if (!declared(concept_name)) invalid(f, "concept is not declared");
            s.regions.regions[concept_name] = box_list(boxes, f, s.state_bounds);
        }
    }
    if (map.contains("signs")) {
        const json& signs = map["signs"];
        if (!signs.is_array()) invalid("map.signs", "expected an array");
        for (std::size_t i = 0; i < signs.size(); ++i) {
            const std::string f = "map.signs[" + std::to_string(i) + "]";
            ScopedRegion r;
            r.id = string_of(member(signs[i], "id", f), f + ".id");
            r.concept_name = string_of(member(signs[i], "concept", f), f + ".concept");
            if (!declared(r.concept_name)) invalid(f + ".concept", "concept is not declared");
            for (const auto& other : s.regions.instances)
                if (other.id == r.id) invalid(f + ".id", "duplicate instance id '" + r.id + "'");
            r.boxes = box_list(member(signs[i], "boxes", f), f + ".boxes", s.state_bounds);
            if (r.boxes.empty()) invalid(f + ".boxes", "needs at least one box");
            const json& street = member(signs[i], "street", f);
            if (!street.is_object()) invalid(f + ".street", "expected exactly one box");
            r.scope.push_back(map_box(street, f + ".street", s.state_bounds));
            s.regions.instances.push_back(std::move(r));
        }
    }

    s.objective_text = string_of(member(root, "objective", "scenario"), "objective");
    try {
        s.objective = parse_ltl(s.objective_text);
    } catch (const SyntaxError& e) {
        reader.parse_error_at(reader.locate(s.objective_text) + e.position(), e.what());
    }
    for (const auto& p : s.objective.propositions())
        if (!declared(p)) invalid("objective", "concept '" + p + "' is not declared");

    s.initial_state = vector_of(member(root, "initial_state", "scenario"), "initial_state");
    if (s.initial_state.size() != n) invalid("initial_state", "needs one entry per state dimension");
    const json& seed = member(root, "seed", "scenario");
    if (!seed.is_number_unsigned()) invalid("seed", "expected a non-negative integer");
    s.seed = seed.get<std::uint64_t>();
    const json& steps = member(root, "max_steps", "scenario");
    if (!steps.is_number_unsigned() || steps.get<std::uint64_t>() == 0) invalid("max_steps", "expected a positive integer");
    s.max_steps = steps.get<std::size_t>();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.stem().stem().string());
}

void scale_state_eta(Scenario& scn, double factor)
{
    positive(factor, "eta scale");
    for (auto& e : scn.eta_x) e *= factor;
}

World build_world(Scenario scn)
{
    ContinuousSystem sys = make_system(scn.model, scn.tau, scn.disturbance);
    if (sys.state_dim() != scn.state_bounds.dim()) invalid("system.state_bounds", "dimension does not match the model");
    if (sys.input_dim() != scn.input_bounds.dim()) invalid("system.input_bounds", "dimension does not match the model");
    Grid gx(scn.state_bounds, scn.eta_x, scn.periodic);
    Grid gu(scn.input_bounds, scn.eta_u, std::vector<bool>(scn.input_bounds.dim(), false));

    KnowledgeBase kb;
    for (const auto& c : scn.concepts) kb.declare_concept(c);
    for (const auto& r : scn.roles) {
        RoleDecl decl{r.name, std::nullopt};
        if (r.range > 0) decl.proximity_range = r.range;
        kb.declare_role(decl);
    }
    for (const auto& ax : scn.tbox) kb.add_axiom(parse_axiom(ax));
    Interpretation interp = assemble_interpretation(kb, scn.regions, gx);
    return World{std::move(scn), std::move(sys), std::move(gx), std::move(gu), std::move(kb), std::move(interp)};
}

} // namespace kaw
