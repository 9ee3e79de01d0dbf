#include <fstream>
#include <sstream>

#include <json.hpp>

#include "parametrix/coefficient_field.hpp"
#include "parametrix/errors.hpp"

namespace parametrix {

CoefficientSpec parse_coefficient_spec(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text.begin(), json_text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("coefficient spec: malformed JSON (") + e.what() + ")",
                         e.byte > 0 ? e.byte - 1 : 0);
    }
    if (!j.is_object()) throw ParseError("coefficient spec: top level must be an object", 0);
    CoefficientSpec spec;
    if (!j.contains("kind") || !j["kind"].is_string()) throw DomainError("coefficient spec: missing string 'kind'");
    spec.kind = coefficient_kind_from_string(j["kind"].get<std::string>());
    if (j.contains("parameters")) {
        if (!j["parameters"].is_object()) throw DomainError("coefficient spec: 'parameters' must be an object");
        for (const auto& [k, v] : j["parameters"].items()) {
            if (!v.is_number()) throw DomainError("coefficient spec: parameter '" + k + "' must be a number");
            spec.parameters[k] = v.get<double>();
        }
    }
    if (j.contains("expression") && !j["expression"].is_null()) {
        if (!j["expression"].is_string()) throw DomainError("coefficient spec: 'expression' must be a string");
        spec.expression = j["expression"].get<std::string>();
    }
    if (j.contains("drift_expression") && !j["drift_expression"].is_null()) {
        if (!j["drift_expression"].is_string()) throw DomainError("coefficient spec: 'drift_expression' must be a string");
        spec.drift_expression = j["drift_expression"].get<std::string>();
    }
    return spec;
}

CoefficientSpec load_coefficient_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open coefficient file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_coefficient_spec(ss.str());
}

std::string to_json(const CoefficientSpec& spec) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(spec.kind));
    j["parameters"] = nlohmann::json::object();
    for (const auto& [k, v] : spec.parameters) j["parameters"][k] = v;
    if (spec.expression) j["expression"] = *spec.expression;
    if (spec.drift_expression) j["drift_expression"] = *spec.drift_expression;
    return j.dump();
}

}  // namespace parametrix
