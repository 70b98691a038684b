#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "spaces.hpp"

namespace ifs {

//---------------------------------------------------------------------------//
/*!
 * Sectioned key = value text.
 *
 *   config  := { blank | comment | section | entry }
 *   comment := ('#' | ';') any-text
 *   section := '[' name ']'
 *   entry   := key '=' value          (value runs to end of line; a '#'
 *                                       with whitespace on both sides starts
 *                                       a comment, so "#3" stays a value)
 *
 * Keys are unique within a section and sections appear at most once.
 */
//---------------------------------------------------------------------------//
struct ConfigEntry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

struct ConfigSection {
    std::string name;
    std::size_t line = 0;
    std::vector<ConfigEntry> entries;

    const ConfigEntry* find(std::string_view key) const
    {
        for (const auto& e : entries) {
            if (e.key == key) {
                return &e;
            }
        }
        return nullptr;
    }
};

class RawConfig {
public:
    std::string source = "<config>";
    std::vector<ConfigSection> sections;

    const ConfigSection* section(std::string_view name) const
    {
        for (const auto& s : sections) {
            if (s.name == name) {
                return &s;
            }
        }
        return nullptr;
    }

    /// Insert or replace a value (used for command-line overrides).
    void set(const std::string& sec, const std::string& key, const std::string& value)
    {
        auto it = std::find_if(sections.begin(), sections.end(),
                               [&](const ConfigSection& s) { return s.name == sec; });
        if (it == sections.end()) {
            sections.push_back(ConfigSection{sec, 0, {}});
            it = sections.end() - 1;
        }
        for (auto& e : it->entries) {
            if (e.key == key) {
                e.value = value;
                return;
            }
        }
        it->entries.push_back(ConfigEntry{key, value, 0});
    }

    /// Canonical text form; parses back to the same sections and entries.
    std::string to_text() const
    {
        std::string out;
        for (std::size_t i = 0; i < sections.size(); ++i) {
            if (i > 0) {
                out += '\n';
            }
            out += '[' + sections[i].name + "]\n";
            for (const auto& e : sections[i].entries) {
                out += e.key + " = " + e.value + '\n';
            }
        }
        return out;
    }
};

namespace detail {
inline bool is_key_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

inline std::string location(const std::string& source, std::size_t line)
{
    return line == 0 ? source : source + ":" + std::to_string(line);
}
}  // namespace detail

inline RawConfig parse_config_text(std::string_view text, std::string source = "<config>")
{
    RawConfig cfg;
    cfg.source = std::move(source);
    auto fail = [&](std::size_t line, const std::string& msg) {
        throw Error(ErrorKind::Parse, detail::location(cfg.source, line) + ": " + msg);
    };

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++line_no;
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        line = detail::trim(line);
        if (line.empty() || line.front() == '#' || line.front() == ';') {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                fail(line_no, "section header must end with ']'");
            }
            std::string name(detail::trim(line.substr(1, line.size() - 2)));
            if (name.empty() || !std::all_of(name.begin(), name.end(), detail::is_key_char)) {
                fail(line_no, "invalid section name '" + name + "'");
            }
            if (cfg.section(name)) {
                fail(line_no, "duplicate section [" + name + "]");
            }
            cfg.sections.push_back(ConfigSection{name, line_no, {}});
        } else {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                fail(line_no, "expected 'key = value'");
            }
            if (cfg.sections.empty()) {
                fail(line_no, "entry outside of any [section]");
            }
            std::string key(detail::trim(line.substr(0, eq)));
            if (key.empty() || !std::all_of(key.begin(), key.end(), detail::is_key_char)) {
                fail(line_no, "invalid key '" + key + "'");
            }
            std::string_view value = detail::trim(line.substr(eq + 1));
            for (std::size_t i = 1; i < value.size(); ++i) {
                const bool ends = i + 1 == value.size() ||
                                  std::isspace(static_cast<unsigned char>(value[i + 1]));
                if (value[i] == '#' && ends &&
                    std::isspace(static_cast<unsigned char>(value[i - 1]))) {
                    value = detail::trim(value.substr(0, i));
                    break;
                }
            }
            if (value.empty()) {
                fail(line_no, "missing value for key '" + key + "'");
            }
            auto& sec = cfg.sections.back();
            if (sec.find(key)) {
                fail(line_no, "duplicate key '" + key + "' in [" + sec.name + "]");
            }
            sec.entries.push_back(ConfigEntry{key, std::string(value), line_no});
        }
        if (end == text.size()) {
            break;
        }
    }
    return cfg;
}

inline RawConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

//---------------------------------------------------------------------------//
/*!
 * Typed access to one section. Every key read is recorded so that
 * leftover (misspelled) keys can be reported.
 */
//---------------------------------------------------------------------------//
class SectionReader {
public:
    SectionReader(const RawConfig& cfg, std::string name)
        : cfg_(cfg), name_(std::move(name)), section_(cfg.section(name_))
    {
    }

    bool present() const noexcept { return section_ != nullptr; }
    const std::string& name() const noexcept { return name_; }

    bool has(std::string_view key) const { return section_ && section_->find(key); }

    std::optional<std::string> get(std::string_view key)
    {
        if (!section_) {
            return std::nullopt;
        }
        const auto* e = section_->find(key);
        if (!e) {
            return std::nullopt;
        }
        used_.emplace_back(key);
        return e->value;
    }

    std::string require(std::string_view key)
    {
        if (auto v = get(key)) {
            return *v;
        }
        throw invalid(std::string("missing required key '") + std::string(key) + "'");
    }

    std::string text(std::string_view key, std::string fallback)
    {
        return get(key).value_or(std::move(fallback));
    }

    double number(std::string_view key, std::optional<double> fallback = std::nullopt)
    {
        auto v = get(key);
        if (!v) {
            if (fallback) {
                return *fallback;
            }
            throw invalid(std::string("missing required key '") + std::string(key) + "'");
        }
        try {
            return detail::parse_number(*v);
        } catch (const Error&) {
            throw invalid_at(key, "'" + *v + "' is not a number");
        }
    }

    std::uint64_t unsigned_integer(std::string_view key,
                                   std::optional<std::uint64_t> fallback = std::nullopt)
    {
        auto v = get(key);
        if (!v) {
            if (fallback) {
                return *fallback;
            }
            throw invalid(std::string("missing required key '") + std::string(key) + "'");
        }
        return parse_unsigned(key, *v);
    }

    bool boolean(std::string_view key, bool fallback)
    {
        auto v = get(key);
        if (!v) {
            return fallback;
        }
        if (*v == "true" || *v == "yes" || *v == "1") {
            return true;
        }
        if (*v == "false" || *v == "no" || *v == "0") {
            return false;
        }
        throw invalid_at(key, "'" + *v + "' is not a boolean");
    }

    std::uint64_t parse_unsigned(std::string_view key, std::string_view text) const
    {
        text = detail::trim(text);
        std::uint64_t out = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            throw invalid_at(key, "'" + std::string(text) + "' is not a non-negative integer");
        }
        return out;
    }

    /// Validation error pointing at the key's line.
    Error invalid_at(std::string_view key, const std::string& msg) const
    {
        std::size_t line = 0;
        if (section_) {
            if (const auto* e = section_->find(key)) {
                line = e->line;
            }
        }
        return Error(ErrorKind::Validation, detail::location(cfg_.source, line) + ": [" + name_ +
                                                "] " + std::string(key) + ": " + msg);
    }

    Error invalid(const std::string& msg) const
    {
        return Error(ErrorKind::Validation,
                     detail::location(cfg_.source, section_ ? section_->line : 0) + ": [" +
                         name_ + "] " + msg);
    }

    /// Throws if the section holds keys that were never read.
    void finish() const
    {
        if (!section_) {
            return;
        }
        for (const auto& e : section_->entries) {
            if (std::find(used_.begin(), used_.end(), e.key) == used_.end()) {
                throw Error(ErrorKind::Validation, detail::location(cfg_.source, e.line) +
                                                       ": unknown key '" + e.key + "' in [" +
                                                       name_ + "]");
            }
        }
    }

private:
    const RawConfig& cfg_;
    std::string name_;
    const ConfigSection* section_;
    std::vector<std::string> used_;
};

//---------------------------------------------------------------------------//
// Value mini-syntax: name{key=value, key=value}
//---------------------------------------------------------------------------//
struct CallValue {
    std::string name;
    std::vector<std::pair<std::string, std::string>> args;

    const std::string* arg(std::string_view key) const
    {
        for (const auto& [k, v] : args) {
            if (k == key) {
                return &v;
            }
        }
        return nullptr;
    }
};

/// Split on `sep` at bracket depth zero; ( ) [ ] { } all nest.
inline std::vector<std::string> split_top_level(std::string_view text, char sep)
{
    std::vector<std::string> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '(' || c == '[' || c == '{') {
            ++depth;
        } else if (c == ')' || c == ']' || c == '}') {
            --depth;
        } else if (c == sep && depth == 0) {
            out.emplace_back(detail::trim(text.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.emplace_back(detail::trim(text.substr(start)));
    return out;
}

inline CallValue parse_call(std::string_view text)
{
    text = detail::trim(text);
    CallValue call;
    const auto open = text.find('{');
    if (open == std::string_view::npos) {
        call.name = std::string(text);
        return call;
    }
    if (text.back() != '}') {
        throw Error(ErrorKind::Parse, "'" + std::string(text) + "': missing closing '}'");
    }
    call.name = std::string(detail::trim(text.substr(0, open)));
    auto inner = detail::trim(text.substr(open + 1, text.size() - open - 2));
    if (inner.empty()) {
        return call;
    }
    for (const auto& part : split_top_level(inner, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Parse,
                        "'" + std::string(text) + "': argument '" + part + "' lacks '='");
        }
        std::string key(detail::trim(std::string_view(part).substr(0, eq)));
        std::string value(detail::trim(std::string_view(part).substr(eq + 1)));
        if (call.arg(key)) {
            throw Error(ErrorKind::Parse,
                        "'" + std::string(text) + "': duplicate argument '" + key + "'");
        }
        call.args.emplace_back(std::move(key), std::move(value));
    }
    return call;
}

/// Comma list of numbers, or start:stop:step (inclusive stop).
inline std::vector<double> parse_number_list(std::string_view text)
{
    text = detail::trim(text);
    std::vector<double> out;
    if (text.find(':') != std::string_view::npos) {
        auto parts = split_top_level(text, ':');
        if (parts.size() != 3) {
            throw Error(ErrorKind::Parse, "range must be start:stop:step");
        }
        const double a = detail::parse_number(parts[0]);
        const double b = detail::parse_number(parts[1]);
        const double s = detail::parse_number(parts[2]);
        if (!(s > 0.0) || b < a) {
            throw Error(ErrorKind::Parse, "range needs step > 0 and stop >= start");
        }
        const auto count = static_cast<std::size_t>(std::floor((b - a) / s + 1e-9));
        if (count > 1'000'000) {
            throw Error(ErrorKind::Parse, "range has too many entries");
        }
        for (std::size_t i = 0; i <= count; ++i) {
            out.push_back(a + s * static_cast<double>(i));
        }
        return out;
    }
    for (const auto& part : split_top_level(text, ',')) {
        out.push_back(detail::parse_number(part));
    }
    return out;
}

}  // namespace ifs
