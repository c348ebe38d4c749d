#include <map>
#include <sstream>

#include "core/diagram.hpp"
#include "core/text.hpp"

namespace kirby {

std::string serialize(const Diagram& d) {
    std::ostringstream os;
    os << "link " << d.name << "\n";
    for (auto& c : d.components) {
        os << "comp " << c.name << " " << c.framing << " :";
        for (EdgeId e : c.cycle) os << " e" << e;
        os << "\n";
    }
    for (auto& l : d.loops) os << "loop " << l.name << " " << l.framing << " in " << l.face << "\n";
    for (auto& [cid, cr] : d.crossings) {
        os << "x";
        for (int s = 0; s < 4; ++s) os << " e" << cr.slot[s];
        os << "\n";
    }
    return os.str();
}

Diagram parse_diagram(const std::string& text) {
    Diagram d;
    std::map<std::string, EdgeId> names;
    auto edge = [&](const std::string& tok) {
        auto it = names.find(tok);
        if (it != names.end()) return it->second;
        EdgeId id = d.fresh_edge();
        names.emplace(tok, id);
        return id;
    };

    bool have_header = false;
    int lineno = 0;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = strip_comment(raw);
        auto tok = tokenize(line);
        if (tok.empty()) continue;
        if (tok[0] == "link") {
            if (have_header) fail(ErrorKind::Syntax, "duplicate link header", lineno);
            if (tok.size() != 2) fail(ErrorKind::Syntax, "link header wants a name", lineno);
            d.name = tok[1];
            have_header = true;
        } else if (tok[0] == "comp") {
            // comp <name> <framing> : <edges...>
            if (tok.size() < 4 || tok[3] != ":")
                fail(ErrorKind::Syntax, "comp line: comp <name> <framing> : <edges>", lineno);
            Component c;
            c.name = tok[1];
            c.framing = parse_int(tok[2], lineno);
            for (size_t i = 4; i < tok.size(); ++i) c.cycle.push_back(edge(tok[i]));
            if (c.cycle.empty())
                fail(ErrorKind::Syntax, "comp line without edges (use a loop line)", lineno);
            d.components.push_back(std::move(c));
        } else if (tok[0] == "loop") {
            // loop <name> <framing> in <face-index>
            if (tok.size() != 5 || tok[3] != "in")
                fail(ErrorKind::Syntax, "loop line: loop <name> <framing> in <face>", lineno);
            FreeLoop l;
            l.name = tok[1];
            l.framing = parse_int(tok[2], lineno);
            l.face = (int)parse_int(tok[4], lineno);
            d.loops.push_back(std::move(l));
        } else if (tok[0] == "x") {
            if (tok.size() != 5) fail(ErrorKind::Syntax, "x line wants 4 edges", lineno);
            d.add_crossing(edge(tok[1]), edge(tok[2]), edge(tok[3]), edge(tok[4]));
        } else {
            fail(ErrorKind::Syntax, "unknown directive '" + tok[0] + "'", lineno);
        }
    }
    if (!have_header) fail(ErrorKind::Syntax, "missing 'link' header", lineno);

    auto report = validate(d);
    if (!report.ok())
        fail(ErrorKind::Validation, "invalid diagram:\n" + report.to_string());
    return d;
}

} // namespace kirby
