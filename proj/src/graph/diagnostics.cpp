#include "repograph/graph/diagnostics.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

#include "repograph/core/errors.hpp"

namespace repograph {

void to_json(nlohmann::json& j, const Diagnostic& d) {
    j = nlohmann::json{{"file_path", d.file_path},
                       {"line", d.line},
                       {"kind", d.kind},
                       {"message", d.message}};
}

void from_json(const nlohmann::json& j, Diagnostic& d) {
    j.at("file_path").get_to(d.file_path);
    j.at("line").get_to(d.line);
    j.at("kind").get_to(d.kind);
    j.at("message").get_to(d.message);
}

void sort_diagnostics(Diagnostics& diags) {
    std::sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return std::tie(a.file_path, a.line, a.kind, a.message) <
               std::tie(b.file_path, b.line, b.kind, b.message);
    });
}

void write_diagnostics(const std::filesystem::path& path, const Diagnostics& diags) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& d : diags) out << nlohmann::json(d).dump() << '\n';
}

Diagnostics read_diagnostics(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    Diagnostics out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line).get<Diagnostic>());
        } catch (const nlohmann::json::exception& e) {
            throw DecodeError(path.string() + ": " + e.what());
        }
    }
    return out;
}

}  // namespace repograph
