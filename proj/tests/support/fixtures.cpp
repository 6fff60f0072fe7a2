#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;

namespace fixtures {

namespace {

std::atomic<int> counter{0};

std::uint64_t splitmix(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Tasks for every non-blank line after the first function header of a file.
void line_tasks(const fs::path& repo, const std::string& rel, const std::string& text, std::size_t limit,
                std::vector<repograph::EvalRecord>& out) {
    std::size_t pos = 0;
    std::size_t taken = 0;
    bool in_function = false;
    while (pos < text.size() && taken < limit) {
        const auto nl = text.find('\n', pos);
        const auto end = nl == std::string::npos ? text.size() : nl;
        const auto line = text.substr(pos, end - pos);
        if (in_function && line.find_first_not_of(' ') != std::string::npos) {
            repograph::EvalRecord r;
            r.task_id = repo.filename().string() + "/" + rel + ":" + std::to_string(out.size());
            r.repo_path = repo.string();
            r.file_path = rel;
            r.prefix = text.substr(0, pos);
            r.groundtruth = line;
            out.push_back(std::move(r));
            ++taken;
        }
        if (line.rfind("def ", 0) == 0 || line.find("    def ") == 0) in_function = true;
        pos = end + 1;
    }
}

}  // namespace

TempDir::TempDir() {
    path_ = fs::temp_directory_path() /
            ("repograph-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void write_file(const fs::path& root, const std::string& rel, const std::string& text) {
    const auto p = root / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void two_file_repo(const fs::path& root) {
    write_file(root, "a.py", "import pkg.b\n\n\ndef main():\n    return pkg.b.value()\n");
    write_file(root, "pkg/b.py", "def value():\n    return 1\n");
}

void ten_file_repo(const fs::path& root) {
    write_file(root, "main.py", "from app.service import run\n\n\ndef main():\n    return run(1)\n");
    write_file(root, "app/__init__.py", "");
    write_file(root, "app/base.py", "from abc import ABC\n\n\nclass Store(ABC):\n    def get(self):\n        pass\n");
    write_file(root, "app/memory.py",
               "from app.base import Store\n\n\nclass MemoryStore(Store):\n    def get(self):\n        return 1\n");
    write_file(root, "app/service.py",
               "from app.memory import MemoryStore\nfrom app.util import helper\n\n\n"
               "def run(n):\n    return helper(n)\n\n\n"
               "def build(store: MemoryStore) -> MemoryStore:\n    return store\n");
    write_file(root, "app/util.py", "def helper(x):\n    return x\n");
    write_file(root, "app/extra.py", "import os\n\n\ndef noop():\n    pass\n");
    write_file(root, "tools/__init__.py", "");
    write_file(root, "tools/cli.py", "import app.util\n\n\ndef go(x):\n    return app.util.helper(x)\n");
    write_file(root, "tools/dyn.py", "def pick(table, key):\n    return table[key]()\n");
}

void synthetic_repo(const fs::path& root, std::size_t functions) {
    const std::size_t per_file = 10;
    for (std::size_t f = 0; f * per_file < functions; ++f) {
        std::ostringstream src;
        if (f > 0) src << "from mod" << (f - 1) << " import fn" << (f * per_file - 1) << "\n\n\n";
        for (std::size_t i = f * per_file; i < std::min(functions, (f + 1) * per_file); ++i) {
            src << "def fn" << i << "(a, b):\n";
            src << "    total = a + b\n";
            src << "    for k in range(b):\n";
            src << "        if k % 2 == 0:\n";
            src << "            total = total + k\n";
            src << "        else:\n";
            src << "            total = total - " << i << "\n";
            if (i > 0) src << "    total = fn" << (i - 1) << "(total, a)\n";
            src << "    return total\n\n\n";
        }
        write_file(root, "mod" + std::to_string(f) + ".py", src.str());
    }
}

std::vector<repograph::EvalRecord> echo_task_set(const fs::path& root) {
    const auto shop = root / "shop";
    const std::map<std::string, std::string> shop_files = {
        {"shop/cart.py",
         "from shop.pricing import price_of\n\n\n"
         "class Cart:\n"
         "    def __init__(self):\n"
         "        self.items = []\n\n"
         "    def add(self, sku, qty):\n"
         "        self.items.append((sku, qty))\n"
         "        return len(self.items)\n\n"
         "    def total(self):\n"
         "        amount = 0\n"
         "        for sku, qty in self.items:\n"
         "            amount += price_of(sku) * qty\n"
         "        return amount\n"},
        {"shop/pricing.py",
         "PRICES = {\"apple\": 3, \"pear\": 4}\n\n\n"
         "def price_of(sku):\n"
         "    if sku in PRICES:\n"
         "        return PRICES[sku]\n"
         "    return 0\n\n\n"
         "def discount(amount, rate):\n"
         "    cut = amount * rate\n"
         "    return amount - cut\n"},
        {"main.py",
         "from shop.cart import Cart\nfrom shop.pricing import discount\n\n\n"
         "def checkout(skus):\n"
         "    cart = Cart()\n"
         "    for sku in skus:\n"
         "        cart.add(sku, 1)\n"
         "    return discount(cart.total(), 0.1)\n"},
    };
    const auto geo = root / "geo";
    const std::map<std::string, std::string> geo_files = {
        {"geo/shapes.py",
         "import math\n\n\n"
         "class Circle:\n"
         "    def __init__(self, r):\n"
         "        self.r = r\n\n"
         "    def area(self):\n"
         "        return math.pi * self.r ** 2\n\n\n"
         "def scale(c, k):\n"
         "    return Circle(c.r * k)\n"},
        {"report.py",
         "from geo.shapes import Circle, scale\n\n\n"
         "def summary(radii):\n"
         "    rows = []\n"
         "    for r in radii:\n"
         "        big = scale(Circle(r), 2)\n"
         "        rows.append(big.area())\n"
         "    return rows\n"},
    };
    for (const auto& [rel, text] : shop_files) write_file(shop, rel, text);
    for (const auto& [rel, text] : geo_files) write_file(geo, rel, text);

    std::vector<repograph::EvalRecord> tasks;
    for (const auto& [rel, text] : shop_files) line_tasks(shop, rel, text, 6, tasks);
    for (const auto& [rel, text] : geo_files) line_tasks(geo, rel, text, 6, tasks);
    tasks.resize(std::min<std::size_t>(tasks.size(), 25));
    for (std::size_t i = 0; i < tasks.size(); ++i) tasks[i].task_kind = i % 5 == 0 ? repograph::TaskKind::Api : repograph::TaskKind::Line;
    repograph::save_tasks(tasks, root / "tasks.jsonl");
    return tasks;
}

std::vector<AblationTask> ablation_task_set(const fs::path& root) {
    const auto repo = root / "ablate";
    write_file(repo, "lib/__init__.py", "");
    write_file(repo, "lib/shapes.py",
               "class Widget:\n"
               "    def __init__(self, size):\n"
               "        self.size = size\n");
    const std::vector<std::string> callees = {"assemble_frame", "render_panel", "compute_offset", "merge_layers",
                                              "resolve_anchor"};
    std::vector<AblationTask> tasks;
    for (std::size_t i = 0; i < callees.size(); ++i) {
        const auto& c = callees[i];
        const auto n = std::to_string(i);
        const auto rare_a = "quux" + n;
        const auto rare_b = "zork" + n;
        write_file(repo, "lib/ops" + n + ".py",
                   "from lib.shapes import Widget\n\n\n"
                   "def " + c + "(\n"
                   "    left: int,\n"
                   "    right: str,\n"
                   ") -> Widget:\n"
                   "    return Widget(left)\n");
        write_file(repo, "lib/use" + n + ".py",
                   "from lib.ops" + n + " import " + c + "\n\n\n"
                   "def call_" + c + "(left, right):\n"
                   "    return " + c + "(left, right)\n");
        std::string decoys;
        for (int d = 0; d < 3; ++d) {
            const auto name = "decoy" + n + "_" + std::to_string(d);
            decoys += "def " + name + "(" + rare_a + ", " + rare_b + "):\n"
                      "    " + rare_a + " = " + rare_a + " + " + rare_b + "\n"
                      "    return registry." + c + "(" + rare_a + ", " + rare_b + ", " + rare_a + ")\n\n\n";
        }
        write_file(repo, "lib/decoy" + n + ".py", decoys);
        const std::string prefix =
            "from lib.ops" + n + " import " + c + "\n"
            "from lib.shapes import Widget\n\n\n"
            "def handler" + n + "(" + rare_a + ", " + rare_b + ") -> Widget:\n"
            "    left = int(" + rare_a + ")\n"
            "    right = str(" + rare_b + ")\n";
        const std::string truth = "    return " + c + "(left, right)";

        AblationTask t;
        t.record.task_id = "ablate-" + n;
        t.record.repo_path = repo.string();
        t.record.file_path = "app/task" + n + ".py";
        t.record.prefix = prefix;
        t.record.groundtruth = truth;
        t.record.task_kind = repograph::TaskKind::Api;
        t.needle = "def " + c + "(left: int, right: str) -> Widget";
        t.fallback = "    return None";
        tasks.push_back(std::move(t));
    }
    return tasks;
}

std::vector<std::string> function_invariant_failures(const repograph::CodeGraph& g) {
    using namespace repograph;
    std::map<NodeId, std::vector<NodeId>> ast_children, cfg_next;
    std::map<NodeId, int> ast_in, cfg_in;
    std::map<NodeId, NodeId> anchor, entry_of;
    for (const auto& e : g.edges()) {
        switch (e.edge_type) {
            case EdgeType::AstChild:
                ast_children[e.src].push_back(e.dst);
                ++ast_in[e.dst];
                break;
            case EdgeType::ControlFlow:
                cfg_next[e.src].push_back(e.dst);
                ++cfg_in[e.dst];
                break;
            case EdgeType::AnchorsAst:
                anchor[e.src] = e.dst;
                break;
            case EdgeType::AstToCfg:
                if (g.find(e.dst) && g.find(e.dst)->kind == "cfg.entry") entry_of[e.src] = e.dst;
                break;
            default:
                break;
        }
    }
    std::vector<std::string> failures;
    for (const auto& [id, n] : g.nodes()) {
        if (n.node_type != NodeType::Function) continue;
        const auto a = anchor.find(id);
        if (a == anchor.end()) {
            failures.push_back(n.name + ": no AST anchor");
            continue;
        }
        const auto root = a->second;
        std::set<NodeId> seen{root};
        std::vector<NodeId> stack{root};
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (const auto& c : ast_children[v]) {
                if (ast_in[c] != 1) failures.push_back(n.name + ": AST node with several parents");
                if (!seen.insert(c).second) {
                    failures.push_back(n.name + ": AST cycle or shared node");
                    continue;
                }
                stack.push_back(c);
            }
        }
        const auto en = entry_of.find(root);
        if (en == entry_of.end()) continue;  // no CFG in ast-only graphs
        std::set<NodeId> blocks{en->second};
        stack = {en->second};
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (const auto& c : cfg_next[v]) {
                if (blocks.insert(c).second) stack.push_back(c);
            }
        }
        int sources = 0, sinks = 0;
        for (const auto& b : blocks) {
            sources += cfg_in[b] == 0;
            sinks += cfg_next[b].empty();
        }
        if (sources != 1 || sinks != 1) {
            failures.push_back(n.name + ": CFG has " + std::to_string(sources) + " entries and " +
                               std::to_string(sinks) + " exits");
        }
    }
    return failures;
}

std::size_t dp_levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
        }
    }
    return d[a.size()][b.size()];
}

std::size_t brute_overlap(const std::vector<std::string>& pred, const std::vector<std::string>& ref) {
    std::vector<bool> used(ref.size(), false);
    std::size_t n = 0;
    for (const auto& p : pred) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (!used[j] && ref[j] == p) {
                used[j] = true;
                ++n;
                break;
            }
        }
    }
    return n;
}

double brute_cosine(const std::vector<float>& a, const std::vector<float>& b) {
    long double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += static_cast<long double>(a[i]) * b[i];
        aa += static_cast<long double>(a[i]) * a[i];
        bb += static_cast<long double>(b[i]) * b[i];
    }
    if (aa == 0 || bb == 0) return 0.0;
    return static_cast<double>(ab / std::sqrt(aa * bb));
}

std::vector<std::pair<std::size_t, double>> brute_ranking(const std::vector<std::vector<float>>& rows,
                                                          const std::vector<float>& q) {
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t i = 0; i < rows.size(); ++i) out.emplace_back(i, brute_cosine(rows[i], q));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return out;
}

std::vector<float> random_vector(std::size_t dim, std::uint64_t& state) {
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53 * 2.0 - 1.0);
    return v;
}

}  // namespace fixtures
