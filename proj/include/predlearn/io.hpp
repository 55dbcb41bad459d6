#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "predlearn/codec.hpp"
#include "predlearn/mapping.hpp"
#include "predlearn/network.hpp"
#include "predlearn/oscillation.hpp"

namespace predlearn {

inline constexpr int kFormatVersion = 1;

// Network: structure, params and learned records. Transient state
// (activations, inhibitors, clock) is not persisted.
std::string network_to_json(const Network& network);
Network network_from_json(std::string_view text);
void save_network(const Network& network, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

// Trace CSV: header `t,unit_id,activation`, rows ordered by t then column.
void write_trace_csv(const FiringTrace& trace, std::ostream& out);
FiringTrace read_trace_csv(std::istream& in, double dt = 1.0);
void export_raster(const FiringTrace& trace, const std::filesystem::path& path);
FiringTrace load_trace_csv(const std::filesystem::path& path, double dt = 1.0);

std::string trace_to_json(const FiringTrace& trace);
FiringTrace trace_from_json(std::string_view text);

std::string schedule_to_json(const FiringSchedule& schedule);
FiringSchedule schedule_from_json(std::string_view text);

std::string mapping_to_json(const MappingTable& table);
std::string propositions_to_json(const std::vector<Proposition>& propositions);

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory, then renames.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace predlearn
