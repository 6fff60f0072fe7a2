#include "repograph/graph/builder.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <system_error>

#include <spdlog/spdlog.h>

#include "repograph/core/errors.hpp"
#include "syntax_util.hpp"

namespace repograph {

using syntax::kNone;
using syntax::NodeIndex;
using syntax::SyntaxKind;
using syntax::SyntaxTree;

namespace {

namespace fs = std::filesystem;

constexpr std::size_t kOverrideFanOut = 8;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint32_t line_count(std::string_view text) {
    auto n = static_cast<std::uint32_t>(std::count(text.begin(), text.end(), '\n'));
    if (!text.empty() && text.back() != '\n') ++n;
    return std::max<std::uint32_t>(n, 1);
}

std::string parent_dir(const std::string& rel) {
    const auto pos = rel.rfind('/');
    return pos == std::string::npos ? "" : rel.substr(0, pos);
}

std::string base_name(const std::string& rel) {
    const auto pos = rel.rfind('/');
    return pos == std::string::npos ? rel : rel.substr(pos + 1);
}

bool is_package_init(const std::string& rel) { return base_name(rel) == "__init__.py"; }

/// Package that relative imports in `rel` are resolved against.
std::string package_of(const std::string& module, const std::string& rel) {
    if (is_package_init(rel)) return module;
    const auto pos = module.rfind('.');
    return pos == std::string::npos ? "" : module.substr(0, pos);
}

/// Absolute module named by `from <name> import ...` (name may carry leading dots).
std::string absolute_module(const std::string& from, const std::string& package) {
    std::size_t dots = 0;
    while (dots < from.size() && from[dots] == '.') ++dots;
    const std::string rest = from.substr(dots);
    if (dots == 0) return rest;
    std::string base = package;
    for (std::size_t i = 1; i < dots; ++i) {
        const auto pos = base.rfind('.');
        base = pos == std::string::npos ? "" : base.substr(0, pos);
    }
    if (rest.empty()) return base;
    return base.empty() ? rest : base + "." + rest;
}

std::map<std::string, std::size_t> module_map(const std::vector<ParsedFile>& files) {
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < files.size(); ++i) out.emplace(files[i].module, i);
    return out;
}

/// Visits statements outside function and class bodies.
template <class F>
void for_each_module_statement(const SyntaxTree& t, const std::vector<NodeIndex>& stmts, F&& f) {
    for (auto s : stmts) {
        f(s);
        const auto& n = t.at(s);
        if (n.kind == SyntaxKind::FunctionDef || n.kind == SyntaxKind::ClassDef) continue;
        for_each_module_statement(t, n.body, f);
        for (auto h : n.handlers) for_each_module_statement(t, t.at(h).body, f);
        for_each_module_statement(t, n.orelse, f);
        for_each_module_statement(t, n.finalbody, f);
    }
}

/// Visits the statements of a function body, not descending into nested definitions.
template <class F>
void for_each_body_statement(const SyntaxTree& t, const std::vector<NodeIndex>& stmts, F&& f) {
    for_each_module_statement(t, stmts, f);
}

void add_import_bindings(const SyntaxTree& t, NodeIndex s, const std::string& package,
                         std::map<std::string, ImportBinding>& out) {
    const auto& n = t.at(s);
    if (n.kind == SyntaxKind::Import) {
        for (auto a : n.args) {
            const auto& alias = t.at(a);
            if (alias.text.empty()) {
                const auto head = alias.name.substr(0, alias.name.find('.'));
                out.emplace(head, ImportBinding{head, ""});
            } else {
                out.emplace(alias.text, ImportBinding{alias.name, ""});
            }
        }
    } else if (n.kind == SyntaxKind::ImportFrom) {
        const auto module = absolute_module(n.name, package);
        for (auto a : n.args) {
            const auto& alias = t.at(a);
            if (alias.name == "*") continue;
            out.emplace(alias.text.empty() ? alias.name : alias.text,
                        ImportBinding{module, alias.name});
        }
    }
}

}  // namespace

// -----------------------------------------------------------------------------------------
// Repository level

RepoLevel build_repo_level(const fs::path& repo_root, const LanguageFrontend& frontend,
                           const BuildOptions& options) {
    std::error_code ec;
    if (!fs::is_directory(repo_root, ec)) throw IoError("not a readable directory: " + repo_root.string());
    const auto root = fs::canonical(repo_root, ec);
    if (ec) throw IoError("cannot resolve " + repo_root.string() + ": " + ec.message());

    std::vector<std::string> rel_paths;
    try {
        for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
             it != fs::recursive_directory_iterator(); ++it) {
            const auto name = it->path().filename().string();
            if (it->is_directory() && (name.starts_with('.') || name == "__pycache__")) {
                it.disable_recursion_pending();
                continue;
            }
            if (it->is_regular_file() && frontend.accepts(it->path())) {
                rel_paths.push_back(fs::relative(it->path(), root).generic_string());
            }
        }
    } catch (const fs::filesystem_error& e) {
        throw IoError(e.what());
    }
    if (rel_paths.empty()) {
        throw EmptyCorpusError("no " + std::string(frontend.language()) + " sources under " +
                               repo_root.string());
    }
    std::sort(rel_paths.begin(), rel_paths.end());

    RepoLevel repo;
    repo.repo_name = root.filename().string();
    repo.fragment.repo_name = repo.repo_name;
    repo.files.resize(rel_paths.size());
    std::vector<std::string> sources(rel_paths.size());
    std::vector<std::optional<Diagnostic>> file_diags(rel_paths.size());

#pragma omp parallel for schedule(dynamic) if (options.parallel)
    for (std::size_t i = 0; i < rel_paths.size(); ++i) {
        auto& pf = repo.files[i];
        pf.rel_path = rel_paths[i];
        pf.module = frontend.module_name(pf.rel_path);
        try {
            sources[i] = read_file(root / pf.rel_path);
        } catch (const IoError& e) {
            file_diags[i] = Diagnostic{pf.rel_path, 0, "io_error", e.what()};
            continue;
        }
        pf.file_id = NodeId::derive(pf.rel_path, "file", 0, sources[i].size());
        try {
            pf.tree = frontend.parse(sources[i]);
        } catch (const syntax::SyntaxError& e) {
            file_diags[i] = Diagnostic{pf.rel_path, e.line, "syntax_error", e.what()};
        }
    }
    for (auto& d : file_diags) {
        if (d) repo.diagnostics.push_back(std::move(*d));
    }

    // Folders on the path to every source file, then files.
    std::map<std::string, NodeId> folders;
    auto folder_id = [&](const std::string& dir) {
        if (auto it = folders.find(dir); it != folders.end()) return it->second;
        GraphNode g;
        g.id = NodeId::derive(dir, "folder", 0, 0);
        g.node_type = NodeType::Folder;
        g.graph_type = GraphType::FolderStructure;
        g.kind = "folder";
        g.name = dir.empty() ? repo.repo_name : base_name(dir);
        g.code_text = dir.empty() ? repo.repo_name : dir;
        g.file_path = dir;
        folders.emplace(dir, g.id);
        const auto id = g.id;
        repo.fragment.add_node(std::move(g));
        return id;
    };
    std::function<NodeId(const std::string&)> ensure_folder = [&](const std::string& dir) {
        const bool existed = folders.count(dir) != 0;
        const auto id = folder_id(dir);
        if (!existed && !dir.empty()) {
            repo.fragment.add_edge({ensure_folder(parent_dir(dir)), id, EdgeType::Contains, 1.0, std::nullopt});
        }
        return id;
    };
    for (std::size_t i = 0; i < repo.files.size(); ++i) {
        auto& pf = repo.files[i];
        if (pf.file_id == NodeId{}) pf.file_id = NodeId::derive(pf.rel_path, "file", 0, 0);
        GraphNode g;
        g.id = pf.file_id;
        g.node_type = NodeType::File;
        g.graph_type = GraphType::FolderStructure;
        g.kind = "file";
        g.name = pf.rel_path;
        g.code_text = sources[i];
        g.file_path = pf.rel_path;
        g.line_span = {1, line_count(sources[i])};
        repo.fragment.add_node(std::move(g));
        repo.fragment.add_edge({ensure_folder(parent_dir(pf.rel_path)), pf.file_id,
                                EdgeType::Contains, 1.0, std::nullopt});
    }

    if (options.ast_only) {
        repo.fragment.canonicalize();
        return repo;
    }

    // Imports resolved within the repository; anything else is external and ignored.
    const auto modules = module_map(repo.files);
    auto resolve_module = [&](std::string name) -> std::optional<std::size_t> {
        while (true) {
            if (auto it = modules.find(name); it != modules.end()) return it->second;
            const auto pos = name.rfind('.');
            if (pos == std::string::npos) return std::nullopt;
            name.resize(pos);
        }
    };
    for (std::size_t i = 0; i < repo.files.size(); ++i) {
        const auto& pf = repo.files[i];
        if (!pf.tree) continue;
        const auto& t = *pf.tree;
        const auto package = package_of(pf.module, pf.rel_path);
        std::map<std::size_t, std::uint32_t> counts;
        std::vector<NodeIndex> imports;
        for (std::size_t k = 0; k < t.size(); ++k) {
            const auto kind = t.at(static_cast<NodeIndex>(k)).kind;
            if (kind == SyntaxKind::Import || kind == SyntaxKind::ImportFrom) {
                imports.push_back(static_cast<NodeIndex>(k));
            }
        }
        for (auto s : imports) {
            const auto& n = t.at(s);
            std::vector<std::optional<std::size_t>> targets;
            if (n.kind == SyntaxKind::Import) {
                for (auto a : n.args) targets.push_back(resolve_module(t.at(a).name));
            } else {
                const auto base = absolute_module(n.name, package);
                for (auto a : n.args) {
                    const auto& alias = t.at(a);
                    std::optional<std::size_t> target;
                    if (alias.name != "*") {
                        const auto sub = base.empty() ? alias.name : base + "." + alias.name;
                        if (auto it = modules.find(sub); it != modules.end()) target = it->second;
                    }
                    if (!target && !base.empty()) target = resolve_module(base);
                    if (!target && base.empty() && modules.count("")) target = modules.at("");
                    targets.push_back(target);
                }
            }
            for (auto tgt : targets) {
                if (tgt && *tgt != i) ++counts[*tgt];
            }
        }
        for (const auto& [tgt, count] : counts) {
            repo.fragment.add_edge({pf.file_id, repo.files[tgt].file_id, EdgeType::Imports,
                                    static_cast<double>(count), std::nullopt});
        }
    }
    repo.fragment.canonicalize();
    return repo;
}

// -----------------------------------------------------------------------------------------
// Module level

namespace {

struct Resolved {
    enum class Kind { None, Function, Class, Module } kind = Kind::None;
    std::size_t index = 0;
};

/// Static name resolution over the symbol tables of a ModuleLevel.
class Resolver {
public:
    Resolver(const RepoLevel& repo, const ModuleLevel& mod) : repo_(repo), mod_(mod) {
        for (std::size_t c = 0; c < mod.classes.size(); ++c) {
            const auto& ci = mod.classes[c];
            class_by_qualname_.emplace(std::make_pair(ci.file_index, ci.qualname), c);
            for (auto b : ci.bases) subclasses_[b].push_back(c);
        }
    }

    Resolved global(std::size_t file, const std::string& name, int depth = 0) const {
        if (depth > 4) return {};
        const auto& sym = mod_.symbols[file];
        if (auto it = sym.functions.find(name); it != sym.functions.end()) {
            return {Resolved::Kind::Function, it->second};
        }
        if (auto it = sym.classes.find(name); it != sym.classes.end()) {
            return {Resolved::Kind::Class, it->second};
        }
        if (auto it = sym.imports.find(name); it != sym.imports.end()) {
            return follow(it->second, depth + 1);
        }
        return {};
    }

    Resolved follow(const ImportBinding& b, int depth = 0) const {
        if (b.symbol.empty()) return module(b.module);
        if (auto it = mod_.module_to_file.find(b.module); it != mod_.module_to_file.end()) {
            auto r = global(it->second, b.symbol, depth);
            if (r.kind != Resolved::Kind::None) return r;
        }
        return module(b.module.empty() ? b.symbol : b.module + "." + b.symbol);
    }

    Resolved module(const std::string& name) const {
        if (auto it = mod_.module_to_file.find(name); it != mod_.module_to_file.end()) {
            return {Resolved::Kind::Module, it->second};
        }
        return {};
    }

    /// Continues resolution of `rest` (dot-separated) from an already resolved head.
    Resolved member(Resolved r, const std::string& rest) const {
        std::size_t pos = 0;
        while (pos < rest.size() && r.kind != Resolved::Kind::None) {
            auto next = rest.find('.', pos);
            if (next == std::string::npos) next = rest.size();
            const auto comp = rest.substr(pos, next - pos);
            pos = next + 1;
            switch (r.kind) {
                case Resolved::Kind::Module: {
                    auto g = global(r.index, comp);
                    if (g.kind == Resolved::Kind::None) {
                        g = module(repo_.files[r.index].module + "." + comp);
                    }
                    r = g;
                    break;
                }
                case Resolved::Kind::Class: {
                    const auto& ci = mod_.classes[r.index];
                    if (auto m = find_method(r.index, comp, false)) {
                        r = {Resolved::Kind::Function, *m};
                    } else if (auto it = class_by_qualname_.find({ci.file_index, ci.qualname + "." + comp});
                               it != class_by_qualname_.end()) {
                        r = {Resolved::Kind::Class, it->second};
                    } else {
                        r = {};
                    }
                    break;
                }
                default:
                    r = {};
                    break;
            }
        }
        return r;
    }

    /// Resolves a dotted name in a file, consulting `locals` (name -> binding) first.
    Resolved dotted(std::size_t file, const std::string& name,
                    const std::map<std::string, Resolved>* locals = nullptr) const {
        const auto dot = name.find('.');
        const auto head = name.substr(0, dot);
        Resolved r;
        if (locals) {
            if (auto it = locals->find(head); it != locals->end()) r = it->second;
        }
        if (r.kind == Resolved::Kind::None) r = global(file, head);
        if (r.kind == Resolved::Kind::None) {
            // `import a.b` binds `a` even when `a` itself has no module file
            const auto& imports = mod_.symbols[file].imports;
            if (auto it = imports.find(head); it != imports.end() && it->second.symbol.empty()) {
                std::string full = it->second.module;
                if (dot != std::string::npos) full += name.substr(dot);
                for (auto cut = full.size(); cut != std::string::npos && cut > 0;
                     cut = full.rfind('.', cut - 1)) {
                    auto m = module(full.substr(0, cut));
                    if (m.kind == Resolved::Kind::None) continue;
                    return cut == full.size() ? m : member(m, full.substr(cut + 1));
                }
            }
            return r;
        }
        if (dot == std::string::npos) return r;
        return member(r, name.substr(dot + 1));
    }

    std::optional<std::size_t> resolve_class(std::size_t file, const std::string& name,
                                             const std::map<std::string, Resolved>* locals = nullptr) const {
        auto r = dotted(file, name, locals);
        if (r.kind == Resolved::Kind::Class) return r.index;
        return std::nullopt;
    }

    /// Method resolution order: depth-first, left to right, first occurrence kept.
    std::vector<std::size_t> mro(std::size_t cls) const {
        std::vector<std::size_t> out;
        std::set<std::size_t> seen;
        std::vector<std::size_t> stack{cls};
        while (!stack.empty()) {
            const auto c = stack.back();
            stack.pop_back();
            if (!seen.insert(c).second) continue;
            out.push_back(c);
            const auto& bases = mod_.classes[c].bases;
            for (auto it = bases.rbegin(); it != bases.rend(); ++it) stack.push_back(*it);
        }
        return out;
    }

    std::optional<std::size_t> find_method(std::size_t cls, const std::string& name,
                                           bool skip_self) const {
        for (auto c : mro(cls)) {
            if (skip_self && c == cls) continue;
            const auto& methods = mod_.classes[c].methods;
            if (auto it = methods.find(name); it != methods.end()) return it->second;
        }
        return std::nullopt;
    }

    /// Statically known implementations of `name` for a receiver of class `cls`.
    std::vector<std::size_t> dispatch(std::size_t cls, const std::string& name) const {
        std::vector<std::size_t> out;
        if (auto m = find_method(cls, name, false)) out.push_back(*m);
        std::vector<std::size_t> queue{cls};
        std::set<std::size_t> seen{cls};
        for (std::size_t q = 0; q < queue.size() && out.size() < kOverrideFanOut; ++q) {
            auto it = subclasses_.find(queue[q]);
            if (it == subclasses_.end()) continue;
            for (auto sub : it->second) {
                if (!seen.insert(sub).second) continue;
                queue.push_back(sub);
                const auto& methods = mod_.classes[sub].methods;
                if (auto m = methods.find(name); m != methods.end() && out.size() < kOverrideFanOut) {
                    out.push_back(m->second);
                }
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::optional<NodeId> typedef_for(std::size_t file, const std::string& name) const {
        if (auto c = resolve_class(file, name)) return mod_.classes[*c].typedef_id;
        // aliases, possibly imported
        const auto dot = name.rfind('.');
        if (dot == std::string::npos) {
            const auto& sym = mod_.symbols[file];
            if (auto it = sym.aliases.find(name); it != sym.aliases.end()) return it->second;
            if (auto it = sym.imports.find(name); it != sym.imports.end() && !it->second.symbol.empty()) {
                if (auto f = mod_.module_to_file.find(it->second.module); f != mod_.module_to_file.end()) {
                    const auto& target = mod_.symbols[f->second];
                    if (auto a = target.aliases.find(it->second.symbol); a != target.aliases.end()) {
                        return a->second;
                    }
                }
            }
            return std::nullopt;
        }
        auto owner = dotted(file, name.substr(0, dot));
        if (owner.kind == Resolved::Kind::Module) {
            const auto& sym = mod_.symbols[owner.index];
            if (auto it = sym.aliases.find(name.substr(dot + 1)); it != sym.aliases.end()) return it->second;
        }
        return std::nullopt;
    }

    /// File in which a TypeDef node is declared.
    std::optional<std::size_t> typedef_file(const NodeId& id) const {
        for (const auto& ci : mod_.classes) {
            if (ci.typedef_id == id) return ci.file_index;
        }
        for (std::size_t f = 0; f < mod_.symbols.size(); ++f) {
            for (const auto& [_, a] : mod_.symbols[f].aliases) {
                if (a == id) return f;
            }
        }
        return std::nullopt;
    }

private:
    const RepoLevel& repo_;
    const ModuleLevel& mod_;
    std::map<std::pair<std::size_t, std::string>, std::size_t> class_by_qualname_;
    std::map<std::size_t, std::vector<std::size_t>> subclasses_;
};

bool is_typing_alias_value(const SyntaxTree& t, NodeIndex value) {
    if (value == kNone) return false;
    const auto& v = t.at(value);
    static const std::set<std::string> generics = {
        "Union", "Optional", "List", "Dict", "Tuple", "Set", "FrozenSet", "Callable",
        "Literal", "Type", "Iterable", "Iterator", "Sequence", "Mapping", "Annotated"};
    if (v.kind == SyntaxKind::Call) {
        const auto callee = detail::dotted_name(t, v.value).value_or("");
        const auto last = callee.substr(callee.rfind('.') + 1);
        return last == "NewType" || last == "TypeVar";
    }
    if (v.kind == SyntaxKind::Subscript) {
        const auto base = detail::dotted_name(t, v.value).value_or("");
        return generics.count(base.substr(base.rfind('.') + 1)) != 0;
    }
    return false;
}

std::string first_line(std::string_view text) {
    return std::string(text.substr(0, text.find('\n')));
}

std::string class_header(const SyntaxTree& t, NodeIndex c) {
    const auto& n = t.at(c);
    std::string h = "class " + n.name;
    if (!n.args.empty()) {
        h += "(";
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) h += ", ";
            h += std::string(t.text_of(n.args[i]));
        }
        h += ")";
    }
    return h;
}

struct DefWalk {
    const SyntaxTree& t;
    std::size_t file;
    ModuleLevel& mod;
    std::vector<std::optional<std::size_t>>& enclosing_fn;  // per function
    std::map<std::pair<std::size_t, NodeIndex>, std::size_t>& fn_by_def;

    void walk(const std::vector<NodeIndex>& stmts, const std::string& prefix,
              std::optional<std::size_t> cls, std::optional<std::size_t> fn) {
        for (auto s : stmts) {
            const auto& n = t.at(s);
            if (n.kind == SyntaxKind::FunctionDef) {
                FunctionInfo fi;
                fi.file_index = file;
                fi.def = s;
                fi.qualname = prefix + n.name;
                fi.owner_class = cls;
                const auto idx = mod.functions.size();
                mod.functions.push_back(std::move(fi));
                enclosing_fn.push_back(fn);
                fn_by_def.emplace(std::make_pair(file, s), idx);
                if (cls) mod.classes[*cls].methods.emplace(n.name, idx);
                if (!cls && !fn) mod.symbols[file].functions.emplace(n.name, idx);
                walk(n.body, prefix + n.name + ".", std::nullopt, idx);
                continue;
            }
            if (n.kind == SyntaxKind::ClassDef) {
                ClassInfo ci;
                ci.file_index = file;
                ci.def = s;
                ci.qualname = prefix + n.name;
                const auto idx = mod.classes.size();
                mod.classes.push_back(std::move(ci));
                if (!cls && !fn) mod.symbols[file].classes.emplace(n.name, idx);
                walk(n.body, prefix + n.name + ".", idx, fn);
                continue;
            }
            walk(n.body, prefix, cls, fn);
            for (auto h : n.handlers) walk(t.at(h).body, prefix, cls, fn);
            walk(n.orelse, prefix, cls, fn);
            walk(n.finalbody, prefix, cls, fn);
        }
    }
};

std::vector<NodeIndex> call_sites(const SyntaxTree& t, const std::vector<NodeIndex>& body) {
    std::vector<NodeIndex> out;
    std::vector<NodeIndex> stack(body.rbegin(), body.rend());
    while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        const auto& n = t.at(i);
        if (n.kind == SyntaxKind::FunctionDef || n.kind == SyntaxKind::ClassDef) continue;
        if (n.kind == SyntaxKind::Call) out.push_back(i);
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
    }
    std::sort(out.begin(), out.end(), [&](NodeIndex a, NodeIndex b) {
        return t.at(a).span.begin < t.at(b).span.begin;
    });
    return out;
}

}  // namespace

ModuleLevel build_module_level(const RepoLevel& repo, const BuildOptions& options) {
    ModuleLevel mod;
    mod.fragment.repo_name = repo.repo_name;
    mod.symbols.resize(repo.files.size());
    mod.module_to_file = module_map(repo.files);

    // Definitions, in file order then source order.
    std::vector<std::optional<std::size_t>> enclosing_fn;
    std::map<std::pair<std::size_t, NodeIndex>, std::size_t> fn_by_def;
    for (std::size_t f = 0; f < repo.files.size(); ++f) {
        const auto& pf = repo.files[f];
        if (!pf.tree) continue;
        const auto& t = *pf.tree;
        DefWalk{t, f, mod, enclosing_fn, fn_by_def}.walk(t.at(t.root()).body, "", std::nullopt, std::nullopt);
        const auto package = package_of(pf.module, pf.rel_path);
        for_each_module_statement(t, t.at(t.root()).body, [&](NodeIndex s) {
            add_import_bindings(t, s, package, mod.symbols[f].imports);
        });
    }

    // Function nodes.
    for (auto& fi : mod.functions) {
        const auto& pf = repo.files[fi.file_index];
        const auto& t = *pf.tree;
        const auto& n = t.at(fi.def);
        fi.id = NodeId::derive(pf.rel_path, "function", n.span.begin, n.span.end);
        GraphNode g;
        g.id = fi.id;
        g.node_type = NodeType::Function;
        g.graph_type = GraphType::CallGraph;
        g.kind = fi.owner_class ? "method" : "function";
        g.name = fi.qualname;
        g.code_text = std::string(t.text_of(fi.def));
        g.file_path = pf.rel_path;
        g.line_span = {n.span.line_begin, n.span.line_end};
        g.semantic_type = function_signature(t, fi.def);
        mod.fragment.add_node(std::move(g));
    }
    if (options.ast_only) return mod;

    // Class and TypeDef nodes.
    for (auto& ci : mod.classes) {
        const auto& pf = repo.files[ci.file_index];
        const auto& t = *pf.tree;
        const auto& n = t.at(ci.def);
        ci.id = NodeId::derive(pf.rel_path, "class", n.span.begin, n.span.end);
        ci.typedef_id = NodeId::derive(pf.rel_path, "typedef", n.span.begin, n.span.end);
        GraphNode c;
        c.id = ci.id;
        c.node_type = NodeType::Class;
        c.graph_type = GraphType::ClassInheritance;
        c.kind = "class";
        c.name = ci.qualname;
        c.code_text = std::string(t.text_of(ci.def));
        c.file_path = pf.rel_path;
        c.line_span = {n.span.line_begin, n.span.line_end};
        c.semantic_type = class_header(t, ci.def);
        GraphNode td;
        td.id = ci.typedef_id;
        td.node_type = NodeType::TypeDef;
        td.graph_type = GraphType::TypeDep;
        td.kind = "typedef.class";
        td.name = ci.qualname;
        td.code_text = first_line(t.text_of(ci.def));
        td.file_path = pf.rel_path;
        td.line_span = {n.span.line_begin, n.span.line_begin};
        td.semantic_type = "class " + ci.qualname;
        mod.fragment.add_node(std::move(c));
        mod.fragment.add_node(std::move(td));
    }

    // Module-level type aliases.
    struct PendingTypeUse {
        NodeId src;
        std::size_t file;
        std::vector<std::string> names;
    };
    std::vector<PendingTypeUse> type_uses;
    for (std::size_t f = 0; f < repo.files.size(); ++f) {
        const auto& pf = repo.files[f];
        if (!pf.tree) continue;
        const auto& t = *pf.tree;
        for (auto s : t.at(t.root()).body) {
            const auto& n = t.at(s);
            NodeIndex target = kNone;
            NodeIndex value = kNone;
            if (n.kind == SyntaxKind::AnnAssign &&
                detail::dotted_name(t, n.annotation).value_or("").ends_with("TypeAlias")) {
                target = n.targets.front();
                value = n.value;
            } else if (n.kind == SyntaxKind::Assign && n.targets.size() == 1 &&
                       is_typing_alias_value(t, n.value)) {
                target = n.targets.front();
                value = n.value;
            }
            if (target == kNone || t.at(target).kind != SyntaxKind::Name) continue;
            const auto& name = t.at(target).name;
            if (mod.symbols[f].aliases.count(name)) continue;
            GraphNode td;
            td.id = NodeId::derive(pf.rel_path, "typedef", n.span.begin, n.span.end);
            td.node_type = NodeType::TypeDef;
            td.graph_type = GraphType::TypeDep;
            td.kind = "typedef.alias";
            td.name = name;
            td.code_text = std::string(t.text_of(s));
            td.file_path = pf.rel_path;
            td.line_span = {n.span.line_begin, n.span.line_end};
            td.semantic_type = value != kNone ? std::string(t.text_of(value)) : name;
            mod.symbols[f].aliases.emplace(name, td.id);
            std::vector<std::string> refs;
            if (value != kNone && t.at(value).kind == SyntaxKind::Subscript) {
                for (auto a : t.at(value).args) detail::type_names(t, a, refs);
            }
            type_uses.push_back({td.id, f, std::move(refs)});
            mod.fragment.add_node(std::move(td));
        }
    }

    // Base classes need the symbol tables, so they are resolved after all definitions.
    const Resolver early(repo, mod);
    for (std::size_t c = 0; c < mod.classes.size(); ++c) {
        auto& ci = mod.classes[c];
        const auto& t = *repo.files[ci.file_index].tree;
        const auto& n = t.at(ci.def);
        for (auto b : n.args) {
            const auto& bn = t.at(b);
            if (bn.kind == SyntaxKind::Keyword) {
                if (bn.name == "metaclass" &&
                    detail::dotted_name(t, bn.value).value_or("").ends_with("ABCMeta")) {
                    ci.is_interface = true;
                }
                continue;
            }
            const auto name = detail::dotted_name(t, b);
            if (!name) continue;
            const auto last = name->substr(name->rfind('.') + 1);
            if (last == "ABC" || last == "Protocol") ci.is_interface = true;
            if (auto base = early.resolve_class(ci.file_index, *name); base && *base != c) {
                ci.bases.push_back(*base);
            }
        }
    }
    const Resolver resolver(repo, mod);

    for (std::size_t c = 0; c < mod.classes.size(); ++c) {
        const auto& ci = mod.classes[c];
        for (auto b : ci.bases) {
            const auto& base = mod.classes[b];
            mod.fragment.add_edge({ci.id, base.id,
                                   base.is_interface ? EdgeType::Implements : EdgeType::Inherits,
                                   1.0, std::nullopt});
            if (base.file_index != ci.file_index) {
                mod.pending_cross_edges.push_back(
                    {ci.id, base.typedef_id, EdgeType::InterfaceInheritance, 1.0, std::nullopt});
            }
        }
    }

    // Module- and class-level variables.
    for (std::size_t f = 0; f < repo.files.size(); ++f) {
        const auto& pf = repo.files[f];
        if (!pf.tree) continue;
        const auto& t = *pf.tree;
        auto scan = [&](const std::vector<NodeIndex>& stmts, const std::string& kind) {
            std::set<std::string> seen;
            for (auto s : stmts) {
                const auto& n = t.at(s);
                if (n.kind != SyntaxKind::Assign && n.kind != SyntaxKind::AnnAssign) continue;
                if (n.targets.size() != 1 || t.at(n.targets.front()).kind != SyntaxKind::Name) continue;
                const auto target = n.targets.front();
                const auto& name = t.at(target).name;
                if (mod.symbols[f].aliases.count(name) && kind == "var.module") continue;
                if (!seen.insert(name).second) continue;
                std::optional<std::string> type;
                std::vector<std::string> refs;
                if (n.kind == SyntaxKind::AnnAssign) {
                    type = std::string(t.text_of(n.annotation));
                    detail::type_names(t, n.annotation, refs);
                } else if (detail::is_capitalized_callee(t, n.value)) {
                    type = std::string(t.text_of(t.at(n.value).value));
                    detail::type_names(t, t.at(n.value).value, refs);
                }
                const auto& ts = t.at(target).span;
                GraphNode v;
                v.id = NodeId::derive(pf.rel_path, "var:" + name, ts.begin, ts.end);
                v.node_type = NodeType::Variable;
                v.graph_type = GraphType::TypeDep;
                v.kind = kind;
                v.name = name;
                v.code_text = std::string(t.text_of(s));
                v.file_path = pf.rel_path;
                v.line_span = {n.span.line_begin, n.span.line_end};
                v.semantic_type = type;
                type_uses.push_back({v.id, f, std::move(refs)});
                mod.fragment.add_node(std::move(v));
            }
        };
        scan(t.at(t.root()).body, "var.module");
        for (const auto& ci : mod.classes) {
            if (ci.file_index == f) scan(t.at(ci.def).body, "var.class");
        }
    }
    for (const auto& use : type_uses) {
        std::set<NodeId> targets;
        for (const auto& name : use.names) {
            if (auto td = resolver.typedef_for(use.file, name); td && *td != use.src) targets.insert(*td);
        }
        for (const auto& td : targets) {
            mod.fragment.add_edge({use.src, td, EdgeType::TypeUses, 1.0, std::nullopt});
        }
    }

    // Cross-file type references from signatures.
    for (const auto& fi : mod.functions) {
        const auto& t = *repo.files[fi.file_index].tree;
        const auto& n = t.at(fi.def);
        std::vector<std::string> refs;
        for (auto p : n.args) detail::type_names(t, t.at(p).annotation, refs);
        detail::type_names(t, n.annotation, refs);
        std::map<NodeId, std::uint32_t> counts;
        for (const auto& name : refs) {
            auto td = resolver.typedef_for(fi.file_index, name);
            if (!td) continue;
            if (resolver.typedef_file(*td) != fi.file_index) ++counts[*td];
        }
        for (const auto& [td, count] : counts) {
            mod.pending_cross_edges.push_back(
                {fi.id, td, EdgeType::TypeReference, static_cast<double>(count), std::nullopt});
        }
    }

    // Calls.
    for (std::size_t fidx = 0; fidx < mod.functions.size(); ++fidx) {
        const auto& fi = mod.functions[fidx];
        const auto& pf = repo.files[fi.file_index];
        const auto& t = *pf.tree;
        const auto& def = t.at(fi.def);

        // Local scope: nested definitions of this and enclosing functions, local imports
        // and typed locals.
        std::map<std::string, Resolved> locals;
        for (auto e = std::optional<std::size_t>(fidx); e; e = enclosing_fn[*e]) {
            const auto& enc = mod.functions[*e];
            for_each_body_statement(t, t.at(enc.def).body, [&](NodeIndex s) {
                const auto& n = t.at(s);
                if (n.kind == SyntaxKind::FunctionDef) {
                    if (auto it = fn_by_def.find({fi.file_index, s}); it != fn_by_def.end()) {
                        locals.emplace(n.name, Resolved{Resolved::Kind::Function, it->second});
                    }
                }
            });
        }
        std::map<std::string, ImportBinding> local_imports;
        const auto package = package_of(pf.module, pf.rel_path);
        for_each_body_statement(t, def.body, [&](NodeIndex s) {
            add_import_bindings(t, s, package, local_imports);
        });
        for (const auto& [name, binding] : local_imports) {
            auto r = resolver.follow(binding);
            if (r.kind != Resolved::Kind::None) locals.emplace(name, r);
        }
        std::map<std::string, std::size_t> typed;
        auto note_type = [&](const std::string& var, NodeIndex type_expr) {
            std::vector<std::string> names;
            detail::type_names(t, type_expr, names);
            for (const auto& name : names) {
                if (auto c = resolver.resolve_class(fi.file_index, name, &locals)) {
                    typed.emplace(var, *c);
                    return;
                }
            }
        };
        for (auto p : def.args) {
            if (t.at(p).annotation != kNone) note_type(detail::param_name(t, p), t.at(p).annotation);
        }
        for_each_body_statement(t, def.body, [&](NodeIndex s) {
            const auto& n = t.at(s);
            if (n.targets.size() != 1 || t.at(n.targets.front()).kind != SyntaxKind::Name) return;
            const auto& var = t.at(n.targets.front()).name;
            if (n.kind == SyntaxKind::AnnAssign) note_type(var, n.annotation);
            if (n.kind == SyntaxKind::Assign && t.at(n.value).kind == SyntaxKind::Call) {
                note_type(var, t.at(n.value).value);
            }
        });

        std::map<std::size_t, std::pair<std::uint32_t, std::string>> edges;
        for (auto site : call_sites(t, def.body)) {
            ++mod.calls.call_sites;
            const auto& call = t.at(site);
            const auto& callee = t.at(call.value);
            std::vector<std::size_t> targets;
            std::string why;
            bool dynamic = false;
            auto add_function_or_ctor = [&](Resolved r, const std::string& shown) {
                if (r.kind == Resolved::Kind::Function) {
                    targets.push_back(r.index);
                } else if (r.kind == Resolved::Kind::Class) {
                    if (auto init = resolver.find_method(r.index, "__init__", false)) {
                        targets.push_back(*init);
                    } else {
                        why = "class `" + shown + "` has no __init__ in the repository";
                    }
                }
            };
            if (callee.kind == SyntaxKind::Name) {
                add_function_or_ctor(resolver.dotted(fi.file_index, callee.name, &locals), callee.name);
            } else if (callee.kind == SyntaxKind::Attribute) {
                const auto& attr = callee.name;
                const auto& recv = t.at(callee.value);
                if (recv.kind == SyntaxKind::Name && (recv.name == "self" || recv.name == "cls") &&
                    fi.owner_class) {
                    targets = resolver.dispatch(*fi.owner_class, attr);
                } else if (recv.kind == SyntaxKind::Call && t.at(recv.value).kind == SyntaxKind::Name &&
                           t.at(recv.value).name == "super" && fi.owner_class) {
                    if (auto m = resolver.find_method(*fi.owner_class, attr, true)) targets.push_back(*m);
                } else if (recv.kind == SyntaxKind::Name && typed.count(recv.name)) {
                    targets = resolver.dispatch(typed.at(recv.name), attr);
                } else if (auto d = detail::dotted_name(t, call.value)) {
                    add_function_or_ctor(resolver.dotted(fi.file_index, *d, &locals), *d);
                } else {
                    dynamic = true;
                }
            } else {
                dynamic = true;
            }
            if (!targets.empty()) {
                ++mod.calls.resolved_sites;
                const auto args = std::string(t.source().substr(callee.span.end, call.span.end - callee.span.end));
                for (auto target : targets) {
                    auto [it, inserted] = edges.emplace(target, std::make_pair(0u, args));
                    ++it->second.first;
                }
                continue;
            }
            ++mod.calls.unresolved_sites;
            const auto text = std::string(t.text_of(call.value));
            Diagnostic d;
            d.file_path = pf.rel_path;
            d.line = call.span.line_begin;
            d.kind = dynamic ? "dynamic_call" : "unresolved_call";
            d.message = why.empty() ? (dynamic ? "dynamically computed callee `" + first_line(text) + "`"
                                               : "cannot resolve callee `" + first_line(text) + "`")
                                    : why;
            mod.diagnostics.push_back(std::move(d));
        }
        for (const auto& [target, info] : edges) {
            mod.fragment.add_edge({fi.id, mod.functions[target].id, EdgeType::Calls,
                                   static_cast<double>(info.first), info.second});
        }
    }
    mod.fragment.canonicalize();
    return mod;
}

FunctionFragment build_function_level(const RepoLevel& repo, const FunctionInfo& fn,
                                      const BuildOptions& options) {
    const auto& pf = repo.files[fn.file_index];
    FunctionLevelOptions opts;
    opts.emit_cfg = !options.ast_only;
    opts.emit_dfg = !options.ast_only;
    opts.emit_variables = !options.ast_only;
    return build_function_level(*pf.tree, fn.def, pf.rel_path, pf.rel_path, fn.id, opts);
}

// -----------------------------------------------------------------------------------------
// Weave

BuildResult weave_cross_level(RepoLevel repo, ModuleLevel module,
                              std::vector<FunctionFragment> functions) {
    BuildResult out;
    out.graph = std::move(repo.fragment);
    out.graph.merge(module.fragment);

    std::map<NodeId, std::size_t> fn_index;
    for (std::size_t i = 0; i < module.functions.size(); ++i) fn_index.emplace(module.functions[i].id, i);
    const Resolver resolver(repo, module);

    for (const auto& fi : module.functions) {
        out.graph.add_edge({repo.files[fi.file_index].file_id, fi.id, EdgeType::DeclaresFunction,
                            1.0, std::nullopt});
    }
    for (auto& frag : functions) {
        out.graph.merge(frag.graph);
        out.graph.add_edge({frag.function_id, frag.ast_root, EdgeType::AnchorsAst, 1.0, std::nullopt});
        for (auto& e : frag.cross_edges) out.graph.add_edge(std::move(e));
        if (auto* node = out.graph.find(frag.function_id)) node->structural_features = frag.features;
        const auto it = fn_index.find(frag.function_id);
        if (it == fn_index.end()) continue;
        const auto file = module.functions[it->second].file_index;
        for (const auto& [var, names] : frag.variable_type_refs) {
            std::set<NodeId> targets;
            for (const auto& name : names) {
                if (auto td = resolver.typedef_for(file, name)) targets.insert(*td);
            }
            for (const auto& td : targets) {
                out.graph.add_edge({var, td, EdgeType::TypeUses, 1.0, std::nullopt});
            }
        }
    }
    for (auto& e : module.pending_cross_edges) out.graph.add_edge(std::move(e));
    out.graph.canonicalize();

    out.diagnostics = std::move(repo.diagnostics);
    for (auto& d : module.diagnostics) out.diagnostics.push_back(std::move(d));
    sort_diagnostics(out.diagnostics);
    out.calls = module.calls;
    return out;
}

BuildResult build_code_graph(const fs::path& repo_root, const BuildOptions& options,
                             const LanguageFrontend& frontend) {
    auto repo = build_repo_level(repo_root, frontend, options);
    auto module = build_module_level(repo, options);
    std::vector<FunctionFragment> fragments(module.functions.size());
#pragma omp parallel for schedule(dynamic) if (options.parallel)
    for (std::size_t i = 0; i < module.functions.size(); ++i) {
        fragments[i] = build_function_level(repo, module.functions[i], options);
    }
    spdlog::debug("built {} files, {} functions, {} classes", repo.files.size(),
                  module.functions.size(), module.classes.size());
    return weave_cross_level(std::move(repo), std::move(module), std::move(fragments));
}

}  // namespace repograph
