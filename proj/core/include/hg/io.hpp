#pragma once

#include <string>
#include <vector>

#include "hg/measure.hpp"

namespace hg::io {

// Measures serialize to a JSON document: `dimension`, `body.kind`, family
// parameters by name.  Grid samples live in a binary sidecar referenced by
// relative path (header: magic "HGRD", u32 version, u32 N, u32 cells per
// axis; then little-endian f64 samples, row-major, first axis slowest).

std::string measure_to_json(const Measure& mu, const std::string& sidecar_hint);
Measure measure_from_json(const std::string& text, const std::string& base_dir);

// Convenience wrappers resolving the sidecar next to `path`.
void save_measure(const Measure& mu, const std::string& path);
Measure load_measure(const std::string& path);

void write_hgrd(const std::string& path, int dimension, int cells_per_axis,
                const std::vector<double>& samples);
std::vector<double> read_hgrd(const std::string& path, int* dimension,
                              int* cells_per_axis);

// Deterministic float formatting: 17 significant digits, round-trip exact.
std::string format_double(double v);

}  // namespace hg::io
