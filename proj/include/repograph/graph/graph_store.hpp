#pragma once

#include <filesystem>
#include <iosfwd>

#include "repograph/graph/code_graph.hpp"

namespace repograph {

inline constexpr int kGraphFormatVersion = 1;

/// Writes the line-delimited JSON graph store. Output is canonical, so identical
/// graphs produce byte-identical files.
void save_graph(const CodeGraph& graph, const std::filesystem::path& path);
void write_graph(const CodeGraph& graph, std::ostream& out);

/// Throws DecodeError on version mismatch, corrupt records or truncation; never
/// returns a partial graph.
CodeGraph load_graph(const std::filesystem::path& path);
CodeGraph read_graph(std::istream& in);

}  // namespace repograph
