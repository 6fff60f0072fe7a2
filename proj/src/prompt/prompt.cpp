#include <cctype>
#include <cstdio>

#include "repograph/prompt/prompt.hpp"

namespace repograph {

namespace {

constexpr std::string_view kRole =
    "1. [Role]\n"
    "You are a world-class AI code completion expert. Your purpose is to help developers write code "
    "faster and more accurately. You will be given the user's current code context and a relevant code "
    "knowledge subgraph retrieved from the entire codebase. Your task is to predict the single most likely "
    "line of code to complete at the cursor position.";

constexpr std::string_view kTask =
    "3. [Task Instruction]\n"
    "Analyze the user's current code context to understand their immediate goal. Examine the provided code "
    "knowledge subgraph, focusing on class definitions, function signatures, and usage patterns. Synthesize "
    "this information to infer the most logical next line of code. Output exactly one line of code for "
    "insertion and a concise explanation referencing specific nodes from the subgraph.";

constexpr std::string_view kFormat =
    "4. [Output Format]\n"
    "Return a single valid JSON object:\n"
    "{\n"
    "  \"completed_code\": \"The suggested code.\",\n"
    "  \"explanation\": \"Brief rationale referencing subgraph nodes.\",\n"
    "  \"confidence_score\": 0.87,\n"
    "  \"referenced_nodes\": [\n"
    "    \"node_id_of_relevant_function\",\n"
    "    \"node_id_of_relevant_class\"\n"
    "  ]\n"
    "}";

constexpr std::string_view kConstraints =
    "5. [Constraints and Rules]\n"
    "- The completed_code must contain exactly one line.\n"
    "- Explanations must remain concise and grounded in the subgraph.\n"
    "- If uncertain, lower the confidence_score; if impossible, return an empty code line with confidence 0.0.";

/// Start of the longest suffix of `text` holding at most `max_words` words.
std::size_t suffix_start(std::string_view text, std::size_t max_words) {
    if (TokenCounter::words(text) <= max_words) return 0;
    auto space = [&](std::size_t i) { return std::isspace(static_cast<unsigned char>(text[i])) != 0; };
    std::size_t start = text.size();
    for (std::size_t n = 0; n < max_words; ++n) {
        while (start > 0 && space(start - 1)) --start;
        while (start > 0 && !space(start - 1)) --start;
    }
    return start;
}

/// Whole leading lines of `text` within `max_words`.
std::string head_lines(std::string_view text, std::size_t max_words) {
    std::string out;
    std::size_t words = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        const auto end = nl == std::string_view::npos ? text.size() : nl + 1;
        const auto line = text.substr(pos, end - pos);
        const auto w = TokenCounter::words(line);
        if (words + w > max_words) break;
        words += w;
        out.append(line);
        pos = end;
    }
    return out;
}

std::string snippet_header(const RetrievedSnippet& s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", s.score);
    return "# " + s.file_path + " :: " + s.name + " (score=" + buf + ")\n";
}

std::string fenced(std::string_view header, std::string_view body) {
    std::string s(header);
    s += "\n```\n";
    s += body;
    if (!body.empty() && body.back() != '\n') s += '\n';
    s += "```";
    return s;
}

}  // namespace

Prompt build_prompt(const PromptInput& input, const PromptBudget& budget, const TokenCounter& counter) {
    Prompt p;
    const std::string context_head = "2. [Context Information]\n2.1 User's Current Code Context";
    const std::string location = "repo name: " + input.repo_name + "\nFile Path: " + input.file_path + "\n";

    // local half: everything but the retrieved sections
    const double fixed_local = counter.count(kRole) + counter.count(fenced(context_head, location)) +
                               counter.count(kTask) + counter.count(kFormat) + counter.count(kConstraints);
    const auto code_words = counter.max_words(budget.local - fixed_local);
    const std::string_view code = input.code_before_cursor;
    p.local_code = std::string(code.substr(suffix_start(code, code_words)));
    const auto context_section = fenced(context_head, location + p.local_code);

    // retrieved half
    const double code_budget = budget.retrieved * budget.code_share;
    const double graph_budget = budget.retrieved - code_budget;
    std::string code_body;
    if (input.snippets.empty()) {
        code_body = std::string(kNoneRetrieved);
    } else {
        auto left = counter.max_words(code_budget - counter.count(fenced(kCodeSectionHeader, "")));
        for (const auto& s : input.snippets) {
            const auto header = snippet_header(s);
            const auto hw = TokenCounter::words(header);
            if (hw >= left) break;
            auto body = head_lines(s.code, left - hw);
            const bool truncated = body.size() < s.code.size();
            if (body.empty() && truncated) break;
            if (!body.empty() && body.back() != '\n') body += '\n';
            code_body += header + body;
            left -= hw + TokenCounter::words(body);
            ++p.snippets_kept;
            if (truncated) break;
        }
        if (p.snippets_kept == 0) code_body = std::string(kNoneRetrieved);
    }
    const auto code_section = fenced(kCodeSectionHeader, code_body);

    std::string graph_section;
    if (input.include_graph_section) {
        std::string body;
        if (input.graph && input.graph->edge_count() > 0) {
            const auto ser = serialize_graph(*input.graph, graph_budget - counter.count(fenced(kGraphSectionHeader, "")),
                                             counter);
            p.triples_kept = ser.triples.size();
            for (const auto& line : ser.lines()) body += line + "\n";
        }
        if (p.triples_kept == 0) body = std::string(kNoneRetrieved);
        graph_section = fenced(kGraphSectionHeader, body);
    }

    p.sections = {std::string(kRole), context_section, code_section, graph_section,
                  std::string(kTask), std::string(kFormat), std::string(kConstraints)};
    for (const auto& s : p.sections) {
        if (s.empty()) continue;
        if (!p.text.empty()) p.text += "\n\n";
        p.text += s;
    }
    p.text += '\n';
    p.local_tokens = counter.count(kRole) + counter.count(context_section) + counter.count(kTask) +
                     counter.count(kFormat) + counter.count(kConstraints);
    p.retrieved_tokens = counter.count(code_section) + counter.count(graph_section);
    p.tokens = counter.count(p.text);
    return p;
}

}  // namespace repograph
