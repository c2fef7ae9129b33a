#pragma once

#include <string>
#include <vector>

namespace aou::harness {

struct FixtureResult {
    std::string name;
    bool pass = false;
    std::string message;  // empty on pass
};

// Runs every <name>.json expectation in the directory against its sibling
// <name>.in through the phase-output grammars and the answer extractor.
std::vector<FixtureResult> run_parse_fixtures(const std::string& dir);

}  // namespace aou::harness
