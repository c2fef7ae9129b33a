#include "aou/harness/parse_fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aou/errors.hpp"
#include "aou/pipeline/parsers.hpp"

namespace aou::harness {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aou::pipeline;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string check_warnings(const json& expect, std::size_t got) {
    if (expect.contains("warnings") &&
        expect.at("warnings").get<std::size_t>() != got)
        return "expected " + expect.at("warnings").dump() + " warnings, got " +
               std::to_string(got);
    if (expect.contains("min_warnings") &&
        got < expect.at("min_warnings").get<std::size_t>())
        return "expected at least " + expect.at("min_warnings").dump() + " warnings, got " +
               std::to_string(got);
    return {};
}

std::string run_one(const json& expect, const std::string& raw) {
    const std::string type = expect.value("type", "");
    if (type == "assumptions") {
        auto parsed = parse_assumptions(raw);
        const auto& want = expect.at("expect");
        if (parsed.lines.size() != want.size())
            return "expected " + std::to_string(want.size()) + " lines, got " +
                   std::to_string(parsed.lines.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            if (parsed.lines[i].index != want[i].at("index").get<int>())
                return "line " + std::to_string(i) + ": wrong index";
            if (parsed.lines[i].text != want[i].at("text").get<std::string>())
                return "line " + std::to_string(i) + ": text mismatch, got \"" +
                       parsed.lines[i].text + "\"";
        }
        return check_warnings(expect, parsed.warnings.size());
    }
    if (type == "audit") {
        std::vector<int> known;
        for (const auto& k : expect.at("known")) known.push_back(k.get<int>());
        auto parsed = parse_audit(raw, known);
        const auto& want = expect.at("expect");
        if (parsed.lines.size() != want.size())
            return "expected " + std::to_string(want.size()) + " verdicts, got " +
                   std::to_string(parsed.lines.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            if (parsed.lines[i].index != want[i].at("index").get<int>())
                return "verdict " + std::to_string(i) + ": wrong index";
            const std::string verdict = want[i].at("verdict").get<std::string>();
            if (verdict != verdict_name(parsed.lines[i].verdict))
                return "verdict " + std::to_string(i) + ": got " +
                       verdict_name(parsed.lines[i].verdict);
            if (want[i].contains("reason") &&
                parsed.lines[i].reason != want[i].at("reason").get<std::string>())
                return "verdict " + std::to_string(i) + ": reason mismatch, got \"" +
                       parsed.lines[i].reason + "\"";
        }
        return check_warnings(expect, parsed.warnings.size());
    }
    if (type == "answer") {
        auto got = extract_answer(raw);
        const auto& want = expect.at("expect");
        if (want.is_null()) {
            if (got) return "expected no answer, got " + std::to_string(*got);
            return {};
        }
        if (!got) return "expected " + want.dump() + ", got none";
        if (std::abs(*got - want.get<double>()) > 1e-9)
            return "expected " + want.dump() + ", got " + std::to_string(*got);
        return {};
    }
    return "unknown fixture type \"" + type + "\"";
}

}  // namespace

std::vector<FixtureResult> run_parse_fixtures(const std::string& dir) {
    std::vector<fs::path> specs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") specs.push_back(entry.path());
    }
    std::sort(specs.begin(), specs.end());
    if (specs.empty()) throw LoadError("no fixture expectations (*.json) in " + dir);

    std::vector<FixtureResult> out;
    for (const auto& spec_path : specs) {
        FixtureResult result;
        result.name = spec_path.stem().string();
        try {
            const json expect = json::parse(read_file(spec_path));
            fs::path input = spec_path;
            input.replace_extension(".in");
            const std::string raw = read_file(input);
            result.message = run_one(expect, raw);
            result.pass = result.message.empty();
        } catch (const std::exception& e) {
            result.pass = false;
            result.message = e.what();
        }
        out.push_back(std::move(result));
    }
    return out;
}

}  // namespace aou::harness
