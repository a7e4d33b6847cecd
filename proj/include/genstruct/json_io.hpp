#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "structure.hpp"

namespace genstruct {

// Output always uses insertion-ordered JSON so serialized bytes are stable:
// {"arity": ..., "vertices": [...], "edges": [[...]]} with vertices sorted
// ascending, each edge sorted ascending, edges sorted lexicographically.
using Json = nlohmann::ordered_json;

inline Json structure_to_json(const Structure& s) {
    Json j;
    j["arity"] = s.arity();
    j["vertices"] = Json::array();
    for (const Vertex& v : s.vertex_set()) j["vertices"].push_back(v);
    j["edges"] = Json::array();
    for (const Edge& e : s.edge_set()) {
        Json je = Json::array();
        for (const Vertex& v : e) je.push_back(v);
        j["edges"].push_back(je);
    }
    return j;
}

inline Structure structure_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("structure JSON must be an object");
    if (!j.contains("arity") || !j["arity"].is_number_integer())
        throw InputError("structure JSON needs integer field \"arity\"");
    int arity = j["arity"].get<int>();
    Structure s(arity);
    if (!j.contains("vertices") || !j["vertices"].is_array())
        throw InputError("structure JSON needs array field \"vertices\"");
    for (const auto& v : j["vertices"]) {
        if (!v.is_string()) throw InputError("vertex ids must be strings");
        Vertex id = v.get<Vertex>();
        if (s.has_vertex(id)) throw InputError("duplicate vertex id: " + id);
        s.add_vertex(id);
    }
    if (!j.contains("edges") || !j["edges"].is_array())
        throw InputError("structure JSON needs array field \"edges\"");
    for (const auto& je : j["edges"]) {
        if (!je.is_array()) throw InputError("each edge must be an array");
        Edge e;
        for (const auto& v : je) {
            if (!v.is_string()) throw InputError("edge members must be strings");
            e.push_back(v.get<Vertex>());
        }
        Edge sorted_e = e;
        std::sort(sorted_e.begin(), sorted_e.end());
        if (s.has_edge(sorted_e)) throw InputError("duplicate edge in structure JSON");
        s.add_edge(e);
    }
    return s;
}

inline std::string structure_to_json_text(const Structure& s) {
    return structure_to_json(s).dump(2) + "\n";
}

inline Structure parse_structure_json_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid JSON: ") + e.what());
    }
    return structure_from_json(j);
}

// Edge-list shorthand: one item per line, members joined by '-'; a bare id is
// an isolated vertex. Blank lines and lines starting with '#' are skipped.
// Arity is taken from the first edge line (2 or 3 tokens); a file with no
// edge lines needs an explicit default.
inline Structure parse_edge_list_text(const std::string& text, int default_arity = 2) {
    std::vector<std::vector<std::string>> items;
    std::istringstream in(text);
    std::string line;
    int arity = 0;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        std::size_t start = line.find_first_not_of(' ');
        if (start == std::string::npos) continue;
        line = line.substr(start);
        if (line[0] == '#') continue;
        std::vector<std::string> toks;
        std::string tok;
        std::istringstream ls(line);
        while (std::getline(ls, tok, '-')) {
            if (tok.empty()) throw InputError("empty token in edge-list line: " + line);
            toks.push_back(tok);
        }
        if (toks.size() > 3) throw InputError("too many members in edge-list line: " + line);
        if (toks.size() >= 2) {
            if (arity == 0) arity = static_cast<int>(toks.size());
            else if (arity != static_cast<int>(toks.size()))
                throw InputError("mixed edge sizes in edge list");
        }
        items.push_back(std::move(toks));
    }
    if (arity == 0) arity = default_arity;
    Structure s(arity);
    for (const auto& toks : items)
        for (const std::string& v : toks) s.add_vertex(v);
    for (const auto& toks : items)
        if (toks.size() >= 2) s.add_edge(Edge(toks.begin(), toks.end()));
    return s;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write file: " + path);
    out << text;
}

// Loads a structure from .json (the canonical format) or an edge-list file.
inline Structure load_structure_file(const std::string& path, int default_arity = 2) {
    std::string text = read_text_file(path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        return parse_structure_json_text(text);
    std::size_t p = text.find_first_not_of(" \t\r\n");
    if (p != std::string::npos && text[p] == '{') return parse_structure_json_text(text);
    return parse_edge_list_text(text, default_arity);
}

inline std::string quote_dot(const std::string& id) {
    std::string out = "\"";
    for (char c : id) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += "\"";
    return out;
}

// Binary structures export as plain undirected graphs; ternary structures as
// bipartite incidence graphs with one square node per hyperedge.
inline std::string structure_to_dot(const Structure& s) {
    std::ostringstream out;
    out << "graph G {\n";
    for (const Vertex& v : s.vertex_set()) out << "  " << quote_dot(v) << ";\n";
    if (s.arity() == 2) {
        for (const Edge& e : s.edge_set())
            out << "  " << quote_dot(e[0]) << " -- " << quote_dot(e[1]) << ";\n";
    } else {
        int i = 0;
        for (const Edge& e : s.edge_set()) {
            std::string en = "e" + std::to_string(i++);
            out << "  " << quote_dot(en) << " [shape=box,label=\"\"];\n";
            for (const Vertex& v : e)
                out << "  " << quote_dot(v) << " -- " << quote_dot(en) << ";\n";
        }
    }
    out << "}\n";
    return out.str();
}

}  // namespace genstruct
