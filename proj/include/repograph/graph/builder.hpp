#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "repograph/frontend/frontend.hpp"
#include "repograph/graph/code_graph.hpp"
#include "repograph/graph/diagnostics.hpp"

namespace repograph {

struct BuildOptions {
    bool parallel = true;
    /// Keep only the syntactic skeleton: folders, files, functions and their ASTs.
    bool ast_only = false;
};

struct ParsedFile {
    std::string rel_path;  // '/'-separated, relative to the repository root
    std::string module;    // dotted module name
    NodeId file_id;
    std::optional<syntax::SyntaxTree> tree;  // empty when the file failed to parse
};

/// Folder/File nodes, Contains and Imports edges, plus the parsed sources.
struct RepoLevel {
    std::string repo_name;
    CodeGraph fragment;
    std::vector<ParsedFile> files;
    Diagnostics diagnostics;
};

struct FunctionInfo {
    NodeId id;
    std::size_t file_index = 0;
    syntax::NodeIndex def = syntax::kNone;
    std::string qualname;
    std::optional<std::size_t> owner_class;  // index into ModuleLevel::classes
};

struct ClassInfo {
    NodeId id;
    NodeId typedef_id;
    std::size_t file_index = 0;
    syntax::NodeIndex def = syntax::kNone;
    std::string qualname;
    std::map<std::string, std::size_t> methods;  // name -> function index
    std::vector<std::size_t> bases;              // resolved repository base classes
    bool is_interface = false;
};

struct ImportBinding {
    std::string module;
    std::string symbol;  // empty: the name is bound to the module itself
};

struct ModuleSymbols {
    std::map<std::string, std::size_t> functions;  // top-level functions
    std::map<std::string, std::size_t> classes;    // top-level classes
    std::map<std::string, NodeId> aliases;         // module-level type aliases
    std::map<std::string, ImportBinding> imports;
};

struct CallStats {
    std::size_t call_sites = 0;
    std::size_t resolved_sites = 0;
    std::size_t unresolved_sites = 0;
};

/// Function/Class/TypeDef/Variable nodes with Calls, TypeUses, Inherits and
/// Implements edges, plus the symbol tables used by later stages.
struct ModuleLevel {
    CodeGraph fragment;
    std::vector<FunctionInfo> functions;
    std::vector<ClassInfo> classes;
    std::vector<ModuleSymbols> symbols;  // parallel to RepoLevel::files
    std::map<std::string, std::size_t> module_to_file;
    /// Cross-file type usages discovered at module level, emitted by the weave step.
    std::vector<GraphEdge> pending_cross_edges;
    CallStats calls;
    Diagnostics diagnostics;
};

/// AST, CFG and DFG of one function (or of a query snippet).
struct FunctionFragment {
    NodeId function_id;
    NodeId ast_root;
    NodeId cfg_entry;
    NodeId cfg_exit;
    CodeGraph graph;
    /// AstToCfg, CfgToDfg and TypeAlignsDataflow edges, added by the weave step.
    std::vector<GraphEdge> cross_edges;
    /// Variable node -> dotted type names referenced by its annotation or constructor.
    std::vector<std::pair<NodeId, std::vector<std::string>>> variable_type_refs;
    StructuralFeatures features;
};

struct FunctionLevelOptions {
    bool emit_cfg = true;
    bool emit_dfg = true;
    bool emit_variables = true;
};

/// Scans `repo_root`, parses every accepted file and builds the repository level.
/// Throws IoError when the root is unreadable and EmptyCorpusError when no file is accepted.
RepoLevel build_repo_level(const std::filesystem::path& repo_root,
                           const LanguageFrontend& frontend = default_frontend(),
                           const BuildOptions& options = {});

ModuleLevel build_module_level(const RepoLevel& repo, const BuildOptions& options = {});

/// Builds the function-level graphs rooted at `root` (a FunctionDef or a Module).
/// `id_namespace` is hashed into every NodeId; `file_path` is stored on the nodes.
FunctionFragment build_function_level(const syntax::SyntaxTree& tree, syntax::NodeIndex root,
                                      const std::string& id_namespace,
                                      const std::string& file_path, NodeId function_id,
                                      const FunctionLevelOptions& options = {});

FunctionFragment build_function_level(const RepoLevel& repo, const FunctionInfo& fn,
                                      const BuildOptions& options = {});

struct BuildResult {
    CodeGraph graph;
    Diagnostics diagnostics;
    CallStats calls;
};

/// Adds every cross-level edge and merges the fragments into one canonical graph.
BuildResult weave_cross_level(RepoLevel repo, ModuleLevel module,
                              std::vector<FunctionFragment> functions);

/// Runs all stages. The result is identical regardless of `options.parallel`.
BuildResult build_code_graph(const std::filesystem::path& repo_root,
                             const BuildOptions& options = {},
                             const LanguageFrontend& frontend = default_frontend());

/// Signature text such as "def area(self, scale: float) -> float".
std::string function_signature(const syntax::SyntaxTree& tree, syntax::NodeIndex def);

}  // namespace repograph
