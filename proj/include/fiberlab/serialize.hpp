#pragma once

#include <json.hpp>
#include <string>

#include "fiberlab/transfer.hpp"

namespace fiberlab {

// Measures serialize as [[position, weight], ...].
nlohmann::json measure_to_json(const FiniteSignedMeasure& mu);
AtomList atoms_from_json(const nlohmann::json& j);

// {depth, words: [[s0, s1, ...], ...], entries: [[[position, weight], ...], ...]}
nlohmann::json leafwise_to_json(const LeafwiseMeasure& mu);

// Compact checkpoint, little-endian:
//   u32 depth | u32 word count | per entry: u32 atom count, then (f64, f64) pairs.
void write_checkpoint(const LeafwiseMeasure& mu, const std::string& path);
LeafwiseMeasure read_checkpoint(const SubshiftSpec& spec, const FiberSpace& space,
                                const std::string& path);

// Shortest round-trip decimal form; '.' decimal point, locale-independent.
std::string format_double(double v);

}  // namespace fiberlab
