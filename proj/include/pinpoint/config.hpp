// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pinpoint {

/// Flat `key = value` document. Blank lines and `#` comments are ignored; later
/// assignments win, which is how command-line overrides are layered on a file.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text, const std::string& origin = "<config>");
    static KeyValueConfig load(const std::filesystem::path& path);

    /// Applies a single "key=value" override. Throws ParseError on a missing '='.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value) { m_values[key] = value; }

    bool contains(const std::string& key) const { return m_values.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    const std::map<std::string, std::string>& values() const { return m_values; }

    std::string to_string() const;

private:
    std::map<std::string, std::string> m_values;
};

double parse_double(const std::string& key, const std::string& value);
std::size_t parse_size(const std::string& key, const std::string& value);
std::uint64_t parse_u64(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);
std::string format_double(double v);

}  // namespace pinpoint
