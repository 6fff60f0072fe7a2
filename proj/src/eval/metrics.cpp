#include <algorithm>
#include <cctype>
#include <map>

#include "repograph/eval/eval.hpp"

namespace repograph {

std::string_view trim_trailing(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool exact_match(std::string_view pred, std::string_view ref) { return trim_trailing(pred) == trim_trailing(ref); }

std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const auto up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

double edit_similarity(std::string_view pred, std::string_view ref) {
    pred = trim_trailing(pred);
    ref = trim_trailing(ref);
    const auto longest = std::max(pred.size(), ref.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(pred, ref)) / static_cast<double>(longest);
}

Prf multiset_prf(const std::vector<std::string>& pred, const std::vector<std::string>& ref) {
    if (pred.empty() && ref.empty()) return {1.0, 1.0, 1.0};
    std::map<std::string_view, long> counts;
    for (const auto& t : ref) ++counts[t];
    std::size_t overlap = 0;
    for (const auto& t : pred) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    Prf r;
    if (!pred.empty()) r.precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
    if (!ref.empty()) r.recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
    if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

Prf token_prf(std::string_view pred, std::string_view ref, const LanguageFrontend& frontend) {
    return multiset_prf(frontend.lex_fragment(trim_trailing(pred)), frontend.lex_fragment(trim_trailing(ref)));
}

Prf identifier_prf(std::string_view pred, std::string_view ref, const LanguageFrontend& frontend) {
    auto names = [&](std::string_view s) {
        auto toks = word_tokens(frontend, trim_trailing(s));
        std::erase_if(toks, [&](const std::string& t) { return frontend.is_keyword(t); });
        return toks;
    };
    return multiset_prf(names(pred), names(ref));
}

}  // namespace repograph
