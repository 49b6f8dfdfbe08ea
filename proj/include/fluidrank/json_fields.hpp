#pragma once

#include "fluidrank/error.hpp"

#include <json.hpp>

#include <string>

namespace fluidrank::json_fields {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& field, const std::string& message) {
    throw FieldError(ErrorCode::ParseError, {{field, message}});
}

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

inline const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path.empty() ? "$" : path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(join(path, key), "missing required field");
    return *it;
}

inline double number(const json& j, const std::string& key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_number()) fail(join(path, key), "expected a number");
    return v.get<double>();
}

inline double number_or(const json& j, const std::string& key, const std::string& path, double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return number(j, key, path);
}

inline std::string string(const json& j, const std::string& key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
}

inline bool boolean_or(const json& j, const std::string& key, const std::string& path, bool fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_boolean()) fail(join(path, key), "expected a boolean");
    return v.get<bool>();
}

inline long long integer(const json& j, const std::string& key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    return v.get<long long>();
}

inline const json& array(const json& j, const std::string& key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_array()) fail(join(path, key), "expected an array");
    return v;
}

} // namespace fluidrank::json_fields
