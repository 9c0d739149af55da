#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikesort/signal.hpp"
#include "spikesort/types.hpp"

namespace spikesort {

// Spikes CSV: one spike per row, d numeric columns, optional header line.
// Values are written with enough digits to round-trip doubles exactly.
void write_spikes_csv(const std::string& path, const Matrix& x);
Matrix read_spikes_csv(const std::string& path);  // returns d x n (columns = spikes)

// One 0-based integer label per line.
void write_labels_csv(const std::string& path, const std::vector<int>& labels);
std::vector<int> read_labels_csv(const std::string& path);

// One integer sample index per line.
void write_times_csv(const std::string& path, const std::vector<std::int64_t>& times);
std::vector<std::int64_t> read_times_csv(const std::string& path);

// Raw little-endian float64 samples plus a "<path>.json" sidecar {"fs_hz": ...}.
void write_trace_raw(const std::string& path, const Trace& t);
Trace read_trace_raw(const std::string& path);

// Single-column CSV of samples; the rate comes from the caller.
void write_trace_csv(const std::string& path, const Trace& t);
Trace read_trace_csv(const std::string& path, double fs_hz);

// FNV-1a 64-bit over the file bytes, as a hex string.
std::string file_checksum(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace spikesort
