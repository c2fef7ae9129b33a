#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aou/errors.hpp"

namespace aou::harness {

struct DatasetRecord {
    std::string id;
    std::string question;
    double gold = 0.0;
    std::string raw;  // original record, verbatim
};

enum class DatasetFormat { Gsm8k, Svamp, MultiArith, GenericJsonl };

std::optional<DatasetFormat> dataset_format_from_name(const std::string& name);
const char* dataset_format_name(DatasetFormat format);

// gsm8k reads the gold from the text after the final "####" marker; svamp
// concatenates body and question; multiarith reads question/solution fields;
// generic_jsonl expects {id, question, answer}. Records whose gold does not
// normalize to a finite decimal are skipped and their ids reported.
std::vector<DatasetRecord> load_dataset(const std::string& path, DatasetFormat format,
                                        std::vector<std::string>* skipped_ids = nullptr);

// Trims, strips currency symbols and thousands separators, then parses.
std::optional<double> normalize_gold(const std::string& text);

enum class Verdict { Correct, Incorrect, Abstained };
const char* verdict_label(Verdict v);

// Abstained when no prediction; else correct iff |p - g| <= 1e-6 max(1, |g|).
Verdict score(const std::optional<double>& predicted, double gold);

}  // namespace aou::harness
