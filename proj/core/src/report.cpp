#include "polymart/report.hpp"

#include <json.hpp>

#include "polymart/errors.hpp"

namespace polymart {

using ordered_json = nlohmann::ordered_json;

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::degenerate: return "degenerate";
        case Verdict::not_applicable: return "not-applicable";
    }
    throw std::logic_error("bad verdict");
}

Verdict verdict_from_name(std::string_view name) {
    if (name == "pass") return Verdict::pass;
    if (name == "fail") return Verdict::fail;
    if (name == "degenerate") return Verdict::degenerate;
    if (name == "not-applicable") return Verdict::not_applicable;
    throw InvalidParameter("unknown verdict: " + std::string(name));
}

void CheckReport::constant(std::string name, std::string value) {
    constants.emplace_back(std::move(name), std::move(value));
}

void CheckReport::residual(std::string name, std::string value) {
    residuals.emplace_back(std::move(name), std::move(value));
}

void CheckReport::note(std::string text) { notes.push_back(std::move(text)); }

namespace {

const std::string* find_in(const std::vector<std::pair<std::string, std::string>>& v,
                           std::string_view name) {
    for (const auto& [k, val] : v)
        if (k == name) return &val;
    return nullptr;
}

} // namespace

const std::string* CheckReport::find_constant(std::string_view name) const {
    return find_in(constants, name);
}

const std::string* CheckReport::find_residual(std::string_view name) const {
    return find_in(residuals, name);
}

std::string CheckReport::to_json_string(int indent) const {
    ordered_json j;
    j["check"] = check;
    j["verdict"] = std::string(verdict_name(verdict));
    ordered_json c = ordered_json::object();
    for (const auto& [k, v] : constants) c[k] = v;
    j["constants"] = std::move(c);
    ordered_json r = ordered_json::object();
    for (const auto& [k, v] : residuals) r[k] = v;
    j["residuals"] = std::move(r);
    j["notes"] = notes;
    return j.dump(indent);
}

CheckReport CheckReport::from_json_string(const std::string& text) {
    const auto j = ordered_json::parse(text);
    CheckReport r;
    r.check = j.at("check").get<std::string>();
    r.verdict = verdict_from_name(j.at("verdict").get<std::string>());
    for (const auto& [k, v] : j.at("constants").items()) r.constant(k, v.get<std::string>());
    for (const auto& [k, v] : j.at("residuals").items()) r.residual(k, v.get<std::string>());
    for (const auto& n : j.at("notes")) r.notes.push_back(n.get<std::string>());
    return r;
}

} // namespace polymart
