#pragma once

// JSON file formats.
//
// QBAF:
//   {"claim": "a",
//    "arguments": [{"id": "a", "text": "...", "base_score": 0.5}, ...],
//    "attacks": [["b", "a"]], "supports": [["c", "a"]]}

#include "argmerge/combinator.hpp"
#include "argmerge/tree_qbaf.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace argmerge {

/// A parsed QBAF file whose tree shape has not been checked yet.
struct QbafDocument {
    Qbaf qbaf;
    ArgumentId claim;
};

/// Throws SchemaError naming the offending field, line, or undeclared node.
QbafDocument parse_qbaf(std::string_view json_text, std::string_view origin = "<input>");
QbafDocument read_qbaf_document(const std::filesystem::path& path);

/// Parses and checks the tree shape. Throws SchemaError or InvalidTree.
TreeQbaf load_qbaf(const std::filesystem::path& path);
TreeQbaf qbaf_from_json(std::string_view json_text);

std::string qbaf_to_json(const TreeQbaf& q, bool pretty = true);
void save_qbaf(const TreeQbaf& q, const std::filesystem::path& path);

/// Structural equality: same claim, arguments (id and text), edges and base
/// scores, the latter within `tolerance`. Argument order is ignored.
bool structurally_equal(const TreeQbaf& a, const TreeQbaf& b, double tolerance = 0.0);

/// The combined framework in QBAF form plus "clusters" (members with their
/// provenance) and "provenance"; a report, if given, is embedded as "validation".
std::string combined_to_json(const CombinedQbaf& c, const CombinedReport* report = nullptr);
void save_combined(const CombinedQbaf& c, const std::filesystem::path& path,
                   const CombinedReport* report = nullptr);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace argmerge
