#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaugeqm/error.hpp"

namespace gaugeqm {

/// Reads one JSON object, remembering which keys were consumed so that
/// unknown fields can be rejected. Error messages carry the dotted path.
class StrictObject {
public:
    StrictObject(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        require(j_.is_object(), ErrorKind::config, where() + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key) {
        const auto& v = fetch(key);
        require(v.is_number(), ErrorKind::config, field(key) + " must be a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) {
        return has(key) ? number(key) : (used_.insert(key), fallback);
    }

    long long integer(const std::string& key) {
        const auto& v = fetch(key);
        require(v.is_number_integer(), ErrorKind::config, field(key) + " must be an integer");
        return v.get<long long>();
    }
    long long integer(const std::string& key, long long fallback) {
        return has(key) ? integer(key) : (used_.insert(key), fallback);
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const auto& v = fetch(key);
        require(v.is_number_unsigned(), ErrorKind::config,
                field(key) + " must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string string(const std::string& key) {
        const auto& v = fetch(key);
        require(v.is_string(), ErrorKind::config, field(key) + " must be a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : (used_.insert(key), fallback);
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = fetch(key);
        require(v.is_boolean(), ErrorKind::config, field(key) + " must be a boolean");
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& key) {
        const auto& v = fetch(key);
        require(v.is_array(), ErrorKind::config, field(key) + " must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            require(e.is_number(), ErrorKind::config, field(key) + " must contain only numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    const nlohmann::json& raw(const std::string& key) { return fetch(key); }

    StrictObject object(const std::string& key) { return StrictObject(fetch(key), field(key)); }

    std::optional<StrictObject> optional_object(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return object(key);
    }

    /// Throws naming the first unconsumed key.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            require(used_.count(it.key()) > 0, ErrorKind::config,
                    "unknown field " + field(it.key()));
    }

    std::string field(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const nlohmann::json& fetch(const std::string& key) {
        require(j_.contains(key), ErrorKind::config, "missing field " + field(key));
        used_.insert(key);
        return j_.at(key);
    }
    std::string where() const { return path_.empty() ? "document" : path_; }

    nlohmann::json j_;
    std::string path_;
    std::set<std::string> used_;
};

inline void require_positive(double v, const std::string& field) {
    require(v > 0, ErrorKind::config, field + " must be > 0 (got " + std::to_string(v) + ")");
}

} // namespace gaugeqm
