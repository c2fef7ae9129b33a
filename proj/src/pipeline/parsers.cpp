#include "aou/pipeline/parsers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "aou/errors.hpp"
#include "aou/util.hpp"

namespace aou::pipeline {

namespace {

bool is_ws(char c) { return c == ' ' || c == '\t'; }

// Consumes one separator at `pos`: ':' '.' '-' or a UTF-8 en/em dash.
bool eat_separator(const std::string& s, std::size_t& pos) {
    if (pos < s.size() && (s[pos] == ':' || s[pos] == '.' || s[pos] == '-')) {
        ++pos;
        return true;
    }
    if (pos + 2 < s.size() && static_cast<unsigned char>(s[pos]) == 0xE2 &&
        static_cast<unsigned char>(s[pos + 1]) == 0x80 &&
        (static_cast<unsigned char>(s[pos + 2]) == 0x93 ||
         static_cast<unsigned char>(s[pos + 2]) == 0x94)) {
        pos += 3;
        return true;
    }
    return false;
}

void skip_ws(const std::string& s, std::size_t& pos) {
    while (pos < s.size() && is_ws(s[pos])) ++pos;
}

// Matches the shared "G<k> sep" prefix. Returns the index or nullopt.
std::optional<int> eat_prefix(const std::string& line, std::size_t& pos) {
    pos = 0;
    skip_ws(line, pos);
    if (pos >= line.size() || (line[pos] != 'G' && line[pos] != 'g')) return std::nullopt;
    ++pos;
    std::size_t digit_start = pos;
    long long index = 0;
    while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos])) != 0) {
        index = index * 10 + (line[pos] - '0');
        if (index > 1000000000LL) return std::nullopt;  // fuzz guard
        ++pos;
    }
    if (pos == digit_start) return std::nullopt;
    skip_ws(line, pos);
    if (!eat_separator(line, pos)) return std::nullopt;
    skip_ws(line, pos);
    if (index < 1) return std::nullopt;
    return static_cast<int>(index);
}

}  // namespace

ParsedAssumptions parse_assumptions(const std::string& raw) {
    ParsedAssumptions out;
    std::map<int, std::string> by_index;
    for (const auto& line : split_lines(raw)) {
        std::size_t pos = 0;
        auto index = eat_prefix(line, pos);
        if (!index) continue;
        std::string text = trim(line.substr(pos));
        if (text.empty()) continue;
        auto [it, inserted] = by_index.emplace(*index, text);
        if (!inserted) {
            out.warnings.push_back("duplicate assumption index G" + std::to_string(*index) +
                                   "; keeping the last occurrence");
            it->second = text;
        }
    }
    for (auto& [index, text] : by_index) out.lines.push_back({index, std::move(text)});
    return out;
}

ParsedAudit parse_audit(const std::string& raw, const std::vector<int>& known_indices) {
    if (known_indices.empty())
        throw InvalidArgumentError("parse_audit requires at least one known index");
    ParsedAudit out;
    std::map<int, AuditLine> by_index;
    int parsed_count = 0;
    for (const auto& line : split_lines(raw)) {
        std::size_t pos = 0;
        auto index = eat_prefix(line, pos);
        if (!index) continue;
        if (pos >= line.size() || line[pos] != '[') continue;
        ++pos;
        std::size_t close = line.find(']', pos);
        if (close == std::string::npos) continue;
        std::string token = trim(line.substr(pos, close - pos));
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        AuditVerdict verdict;
        if (token == "SUPPORTED") {
            verdict = AuditVerdict::Supported;
        } else if (token == "MISSING") {
            verdict = AuditVerdict::Missing;
        } else {
            continue;
        }
        pos = close + 1;
        if (pos < line.size() && line[pos] == ':') ++pos;
        std::string reason = trim(line.substr(std::min(pos, line.size())));

        if (std::find(known_indices.begin(), known_indices.end(), *index) ==
            known_indices.end()) {
            out.warnings.push_back("audit cites unknown index G" + std::to_string(*index) +
                                   "; dropped");
            continue;
        }
        ++parsed_count;
        auto [it, inserted] = by_index.emplace(*index, AuditLine{*index, verdict, reason});
        if (!inserted) {
            out.warnings.push_back("duplicate audit index G" + std::to_string(*index) +
                                   "; keeping the last occurrence");
            it->second = AuditLine{*index, verdict, reason};
        }
    }
    if (parsed_count == 0)
        out.warnings.push_back("no audit lines parsed; defaulting every assumption to MISSING");
    for (int index : known_indices) {
        if (by_index.count(index) != 0) continue;
        if (parsed_count != 0)
            out.warnings.push_back("assumption G" + std::to_string(index) +
                                   " unaudited; defaulting to MISSING");
        by_index.emplace(index, AuditLine{index, AuditVerdict::Missing, "unaudited"});
    }
    for (auto& [index, line] : by_index) out.lines.push_back(std::move(line));
    return out;
}

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Scans `text` for the last standalone numeric literal. Digits glued to a
// letter ("G2", "v1.5") are identifier fragments, not numerals.
std::optional<double> last_numeral(const std::string& text) {
    std::optional<double> found;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto digit = [&](std::size_t k) {
        return k < n && std::isdigit(static_cast<unsigned char>(text[k])) != 0;
    };
    while (i < n) {
        const bool starts_number = digit(i) || (text[i] == '.' && digit(i + 1));
        if (!starts_number) {
            ++i;
            continue;
        }
        const bool glued = i > 0 && (is_alnum(text[i - 1]) || text[i - 1] == '_');
        // Consume the whole literal either way.
        std::size_t start = i;
        std::string digits;
        bool seen_dot = false;
        while (i < n) {
            if (digit(i)) {
                digits.push_back(text[i]);
                ++i;
            } else if (text[i] == ',' && digit(i + 1) && digit(i + 2) && digit(i + 3) &&
                       !digit(i + 4)) {
                ++i;  // thousands separator
            } else if (text[i] == '.' && !seen_dot && digit(i + 1)) {
                seen_dot = true;
                digits.push_back('.');
                ++i;
            } else {
                break;
            }
        }
        if (glued || digits.empty()) continue;
        bool negative = false;
        if (start > 0 && text[start - 1] == '-') {
            const bool sign_glued = start >= 2 && (is_alnum(text[start - 2]) ||
                                                   text[start - 2] == '.' ||
                                                   text[start - 2] == '-');
            negative = !sign_glued;
        }
        errno = 0;
        char* end = nullptr;
        double value = std::strtod(digits.c_str(), &end);
        if (end == nullptr || *end != '\0' || !std::isfinite(value)) continue;
        found = negative ? -value : value;
    }
    return found;
}

}  // namespace

std::optional<double> extract_answer(const std::string& final_text) {
    // Prefer the last "Answer:"-prefixed line when it carries a numeral.
    const auto lines = split_lines(final_text);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        std::string t = trim(*it);
        std::size_t k = 0;
        while (k < t.size() && (t[k] == '#' || t[k] == '*' || t[k] == '>' || t[k] == ' ')) ++k;
        if (t.size() - k < 7) continue;
        std::string head = t.substr(k, 6);
        std::transform(head.begin(), head.end(), head.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (head != "answer") continue;
        std::size_t rest = k + 6;
        if (rest < t.size() && (t[rest] == ':' || t[rest] == '=')) {
            auto v = last_numeral(t.substr(rest + 1));
            if (v) return v;
        }
    }
    return last_numeral(final_text);
}

bool answers_equal(double a, double b) {
    return std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b));
}

const char* verdict_name(AuditVerdict v) {
    return v == AuditVerdict::Supported ? "SUPPORTED" : "MISSING";
}

}  // namespace aou::pipeline
