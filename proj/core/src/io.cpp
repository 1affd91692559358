#include "argmerge/io.hpp"

#include "argmerge/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace argmerge {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

const json& field(const json& obj, const char* name, const std::string& where) {
    auto it = obj.find(name);
    if (it == obj.end()) {
        throw SchemaError(where + ": missing field '" + name + "'");
    }
    return *it;
}

std::string string_field(const json& obj, const char* name, const std::string& where) {
    const json& v = field(obj, name, where);
    if (!v.is_string()) {
        throw SchemaError(where + "." + name + ": expected a string");
    }
    return v.get<std::string>();
}

void read_edges(const json& doc, const char* name, Relation kind, const std::set<std::string>& declared,
                QbafBuilder& b, const std::string& origin) {
    auto it = doc.find(name);
    if (it == doc.end()) {
        return;
    }
    if (!it->is_array()) {
        throw SchemaError(origin + ": field '" + name + "' must be a list of [from, to] pairs");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
        const json& e = (*it)[i];
        const std::string where = origin + ": " + name + "[" + std::to_string(i) + "]";
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
            throw SchemaError(where + ": expected [from, to] with string ids");
        }
        for (const auto& end : e) {
            if (!declared.contains(end.get<std::string>())) {
                throw SchemaError(where + ": edge names undeclared argument '" + end.get<std::string>() + "'");
            }
        }
        try {
            b.add_edge(ArgumentId(e[0].get<std::string>()), ArgumentId(e[1].get<std::string>()), kind);
        } catch (const InvalidFramework& ex) {
            throw SchemaError(where + ": " + ex.what());
        }
    }
}

json edge_list(const Qbaf& q, Relation kind) {
    json out = json::array();
    for (const auto& l : q.links()) {
        if (l.kind == kind) {
            out.push_back({q.arguments()[l.from].id.str(), q.arguments()[l.to].id.str()});
        }
    }
    return out;
}

} // namespace

QbafDocument parse_qbaf(std::string_view text, std::string_view origin_view) {
    const std::string origin(origin_view);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw SchemaError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": malformed JSON");
    }
    if (!doc.is_object()) {
        throw SchemaError(origin + ": top level must be an object");
    }
    const std::string claim = string_field(doc, "claim", origin);
    const json& args = field(doc, "arguments", origin);
    if (!args.is_array()) {
        throw SchemaError(origin + ": field 'arguments' must be a list");
    }

    QbafBuilder b;
    std::set<std::string> declared;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string where = origin + ": arguments[" + std::to_string(i) + "]";
        const json& a = args[i];
        if (!a.is_object()) {
            throw SchemaError(where + ": expected an object");
        }
        const std::string id = string_field(a, "id", where);
        if (id.empty()) {
            throw SchemaError(where + ".id: empty id");
        }
        std::string body;
        if (auto t = a.find("text"); t != a.end()) {
            if (!t->is_string()) {
                throw SchemaError(where + ".text: expected a string");
            }
            body = t->get<std::string>();
        }
        const json& score = field(a, "base_score", where);
        if (!score.is_number()) {
            throw SchemaError(where + ".base_score: expected a number");
        }
        try {
            b.add_argument(ArgumentId(id), std::move(body), score.get<double>());
        } catch (const Error& ex) {
            throw SchemaError(where + " ('" + id + "'): " + ex.what());
        }
        declared.insert(id);
    }
    if (!declared.contains(claim)) {
        throw SchemaError(origin + ": claim '" + claim + "' is not a declared argument");
    }
    read_edges(doc, "attacks", Relation::Attack, declared, b, origin);
    read_edges(doc, "supports", Relation::Support, declared, b, origin);
    return QbafDocument{b.build(), ArgumentId(claim)};
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw Error("failed writing " + path.string());
    }
}

QbafDocument read_qbaf_document(const std::filesystem::path& path) {
    return parse_qbaf(read_text_file(path), path.string());
}

TreeQbaf load_qbaf(const std::filesystem::path& path) {
    auto doc = read_qbaf_document(path);
    return TreeQbaf::make(std::move(doc.qbaf), doc.claim);
}

TreeQbaf qbaf_from_json(std::string_view text) {
    auto doc = parse_qbaf(text);
    return TreeQbaf::make(std::move(doc.qbaf), doc.claim);
}

std::string qbaf_to_json(const TreeQbaf& t, bool pretty) {
    const Qbaf& q = t.qbaf();
    ordered_json args = ordered_json::array();
    for (std::size_t i = 0; i < q.size(); ++i) {
        args.push_back({{"id", q.arguments()[i].id.str()},
                        {"text", q.arguments()[i].text},
                        {"base_score", q.base_score(i)}});
    }
    ordered_json doc;
    doc["claim"] = t.claim().str();
    doc["arguments"] = std::move(args);
    doc["attacks"] = edge_list(q, Relation::Attack);
    doc["supports"] = edge_list(q, Relation::Support);
    return doc.dump(pretty ? 2 : -1) + "\n";
}

void save_qbaf(const TreeQbaf& q, const std::filesystem::path& path) {
    write_text_file(path, qbaf_to_json(q));
}

bool structurally_equal(const TreeQbaf& a, const TreeQbaf& b, double tolerance) {
    if (a.claim() != b.claim() || a.size() != b.size() || a.qbaf().links().size() != b.qbaf().links().size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Argument& x = a.qbaf().arguments()[i];
        auto j = b.qbaf().baf().find(x.id);
        if (!j || b.qbaf().arguments()[*j].text != x.text ||
            std::abs(a.qbaf().base_score(i) - b.qbaf().base_score(*j)) > tolerance) {
            return false;
        }
    }
    for (const Edge& e : a.qbaf().baf().edges()) {
        if (b.qbaf().baf().relation(e.from, e.to) != e.kind) {
            return false;
        }
    }
    return true;
}

std::string combined_to_json(const CombinedQbaf& c, const CombinedReport* report) {
    ordered_json args = ordered_json::array();
    ordered_json clusters = ordered_json::array();
    for (const auto& cl : c.clusters) {
        args.push_back({{"id", cl.id.str()},
                        {"text", cl.representative_text},
                        {"base_score", cl.aggregated_base_score}});
        ordered_json members = ordered_json::array();
        for (const auto& m : cl.members) {
            members.push_back({{"source", m.source_index},
                               {"id", m.id.str()},
                               {"text", m.text},
                               {"base_score", m.base_score}});
        }
        clusters.push_back({{"id", cl.id.str()}, {"members", std::move(members)}});
    }
    const auto edges = [&](const std::vector<ClusterEdge>& list) {
        ordered_json out = ordered_json::array();
        for (const auto& e : list) {
            out.push_back({c.clusters[e.from].id.str(), c.clusters[e.to].id.str()});
        }
        return out;
    };
    ordered_json doc;
    doc["claim"] = c.claim().id.str();
    doc["arguments"] = std::move(args);
    doc["attacks"] = edges(c.attacks);
    doc["supports"] = edges(c.supports);
    doc["clusters"] = std::move(clusters);
    doc["provenance"] = {{"n", c.provenance.input_count},
                         {"delta", c.provenance.threshold},
                         {"aggregator", c.provenance.aggregator},
                         {"provider", c.provenance.provider}};
    doc["stats"] = {{"similarity_comparisons", c.stats.similarity_comparisons},
                    {"layers", c.stats.layers},
                    {"merges", c.stats.merges}};
    if (report) {
        ordered_json findings = ordered_json::array();
        for (const auto& f : report->findings) {
            findings.push_back({{"check", f.check},
                                {"severity", f.severity == Severity::Failure ? "failure" : "warning"},
                                {"message", f.message}});
        }
        doc["validation"] = {{"ok", report->ok()}, {"findings", std::move(findings)}};
    }
    return doc.dump(2) + "\n";
}

void save_combined(const CombinedQbaf& c, const std::filesystem::path& path, const CombinedReport* report) {
    write_text_file(path, combined_to_json(c, report));
}

} // namespace argmerge
