#include "aou/harness/dataset.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "aou/errors.hpp"
#include "aou/util.hpp"

namespace aou::harness {

using nlohmann::json;

std::optional<DatasetFormat> dataset_format_from_name(const std::string& name) {
    if (name == "gsm8k") return DatasetFormat::Gsm8k;
    if (name == "svamp") return DatasetFormat::Svamp;
    if (name == "multiarith") return DatasetFormat::MultiArith;
    if (name == "generic_jsonl") return DatasetFormat::GenericJsonl;
    return std::nullopt;
}

const char* dataset_format_name(DatasetFormat format) {
    switch (format) {
        case DatasetFormat::Gsm8k: return "gsm8k";
        case DatasetFormat::Svamp: return "svamp";
        case DatasetFormat::MultiArith: return "multiarith";
        case DatasetFormat::GenericJsonl: return "generic_jsonl";
    }
    return "unknown";
}

std::optional<double> normalize_gold(const std::string& text) {
    std::string s = trim(text);
    std::string cleaned;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '$' || c == '%' || c == ' ') continue;
        if (c == ',' && i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1])) != 0 &&
            i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])) != 0)
            continue;  // thousands separator
        cleaned.push_back(c);
    }
    while (!cleaned.empty() && cleaned.back() == '.') cleaned.pop_back();
    if (cleaned.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cleaned.c_str(), &end);
    if (end == nullptr || *end != '\0' || !std::isfinite(v)) return std::nullopt;
    return v;
}

namespace {

std::optional<double> gold_from_json(const json& value) {
    if (value.is_number()) {
        const double v = value.get<double>();
        return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
    }
    if (value.is_string()) return normalize_gold(value.get<std::string>());
    return std::nullopt;
}

std::string field(const json& obj, std::initializer_list<const char*> names) {
    for (const char* n : names)
        if (obj.contains(n) && obj.at(n).is_string()) return obj.at(n).get<std::string>();
    return {};
}

const json* field_json(const json& obj, std::initializer_list<const char*> names) {
    for (const char* n : names)
        if (obj.contains(n)) return &obj.at(n);
    return nullptr;
}

// Files may be a JSON array or JSONL; both appear in the wild.
std::vector<json> read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open dataset " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string body = trim(content);
    if (body.empty()) throw LoadError("dataset " + path + " is empty");

    std::vector<json> records;
    if (body.front() == '[') {
        json doc;
        try {
            doc = json::parse(body);
        } catch (const std::exception& e) {
            throw LoadError("dataset " + path + " is not valid JSON: " + e.what());
        }
        for (auto& r : doc) records.push_back(std::move(r));
        return records;
    }
    int line_no = 0;
    for (const auto& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const std::exception& e) {
            throw LoadError("dataset " + path + " line " + std::to_string(line_no) +
                            " is not valid JSON: " + e.what());
        }
    }
    return records;
}

}  // namespace

std::vector<DatasetRecord> load_dataset(const std::string& path, DatasetFormat format,
                                        std::vector<std::string>* skipped_ids) {
    std::vector<DatasetRecord> out;
    int index = 0;
    for (const auto& r : read_records(path)) {
        ++index;
        DatasetRecord rec;
        rec.raw = r.dump();
        std::optional<double> gold;
        switch (format) {
            case DatasetFormat::Gsm8k: {
                rec.id = field(r, {"id"});
                if (rec.id.empty()) rec.id = "gsm8k-" + std::to_string(index);
                rec.question = field(r, {"question"});
                const std::string answer = field(r, {"answer"});
                const auto marker = answer.rfind("####");
                if (marker != std::string::npos)
                    gold = normalize_gold(answer.substr(marker + 4));
                break;
            }
            case DatasetFormat::Svamp: {
                rec.id = field(r, {"ID", "id"});
                if (rec.id.empty()) rec.id = "svamp-" + std::to_string(index);
                const std::string body = trim(field(r, {"Body", "body"}));
                const std::string question = trim(field(r, {"Question", "question"}));
                rec.question = body.empty() ? question : body + " " + question;
                if (const json* a = field_json(r, {"Answer", "answer"})) gold = gold_from_json(*a);
                break;
            }
            case DatasetFormat::MultiArith: {
                if (const json* idx = field_json(r, {"iIndex", "id"})) {
                    rec.id = idx->is_string() ? idx->get<std::string>()
                                              : "multiarith-" + std::to_string(idx->get<long long>());
                } else {
                    rec.id = "multiarith-" + std::to_string(index);
                }
                rec.question = field(r, {"sQuestion", "question"});
                if (const json* sols = field_json(r, {"lSolutions"})) {
                    if (sols->is_array() && !sols->empty()) gold = gold_from_json((*sols)[0]);
                } else if (const json* a = field_json(r, {"answer"})) {
                    gold = gold_from_json(*a);
                }
                break;
            }
            case DatasetFormat::GenericJsonl: {
                rec.id = field(r, {"id"});
                if (rec.id.empty()) rec.id = "item-" + std::to_string(index);
                rec.question = field(r, {"question"});
                if (const json* a = field_json(r, {"answer"})) gold = gold_from_json(*a);
                break;
            }
        }
        if (rec.question.empty() || !gold) {
            if (skipped_ids != nullptr) skipped_ids->push_back(rec.id);
            continue;
        }
        rec.gold = *gold;
        out.push_back(std::move(rec));
    }
    return out;
}

const char* verdict_label(Verdict v) {
    switch (v) {
        case Verdict::Correct: return "correct";
        case Verdict::Incorrect: return "incorrect";
        case Verdict::Abstained: return "abstained";
    }
    return "unknown";
}

Verdict score(const std::optional<double>& predicted, double gold) {
    if (!predicted) return Verdict::Abstained;
    const double tol = 1e-6 * std::max(1.0, std::abs(gold));
    return std::abs(*predicted - gold) <= tol ? Verdict::Correct : Verdict::Incorrect;
}

}  // namespace aou::harness
