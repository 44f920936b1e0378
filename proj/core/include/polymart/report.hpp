#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace polymart {

enum class Verdict { pass, fail, degenerate, not_applicable };

std::string_view verdict_name(Verdict v);
Verdict verdict_from_name(std::string_view name);

// Outcome of one structural check, serializable as
// {"check","verdict","constants","residuals","notes"}. Constants and
// residuals map names to exact values in canonical text form; insertion
// order is preserved in the JSON output.
struct CheckReport {
    std::string check;
    Verdict verdict = Verdict::pass;
    std::vector<std::pair<std::string, std::string>> constants;
    std::vector<std::pair<std::string, std::string>> residuals;
    std::vector<std::string> notes;

    void constant(std::string name, std::string value);
    void residual(std::string name, std::string value);
    void note(std::string text);

    // nullptr when absent.
    const std::string* find_constant(std::string_view name) const;
    const std::string* find_residual(std::string_view name) const;

    std::string to_json_string(int indent = 2) const;
    static CheckReport from_json_string(const std::string& text);
};

} // namespace polymart
