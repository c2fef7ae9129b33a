#pragma once

#include <string>

#include "aou/validation.hpp"
#include "aou/world.hpp"

namespace aou {

// World documents are JSON: key/value pairs plus nested lists, probabilities
// accepted as numbers or decimal strings. The loader rejects any document
// whose world fails validate_world.
WorldModel load_world(const std::string& path);
WorldModel world_from_json_text(const std::string& text);
std::string world_to_json_text(const WorldModel& world);
void save_world(const WorldModel& world, const std::string& path);

// Validator specs embed in experiment config documents with the same
// conventions ("perfect", or per-premise alpha/beta arrays).
ValidatorSpec validator_from_json_text(const std::string& text);
std::string validator_to_json_text(const ValidatorSpec& spec);

}  // namespace aou
