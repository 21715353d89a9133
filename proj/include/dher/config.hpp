#pragma once
#include <string>

#include "dher/harness.hpp"

namespace dher {

// JSON layout:
//   {"slots": [{"name": "genre", "values": 5, "informable": true,
//               "requestable": false}, ...],
//    "booking_slot": "ticket"}
// Exactly one slot must carry the booking_slot name; it is forced
// non-informable as the deal-closing marker.
SlotSchema load_schema_json(const std::string& text);
SlotSchema load_schema_file(const std::string& path);

// Flat keys plus nested "env"/"her"/"train"/"per" groups; every key optional,
// unknown keys rejected so typos fail loudly. Does not validate the result —
// callers do that once the schema is known.
ExperimentConfig load_experiment_json(const std::string& text);
ExperimentConfig load_experiment_file(const std::string& path);

std::string experiment_to_json(const ExperimentConfig& cfg);  // round-trippable

}  // namespace dher
