#pragma once

#include "possim/model.hpp"

#include <string>
#include <vector>

namespace possim {

/// CSV with a header row; lines starting with '#' are metadata and skipped.
Dataset read_csv(const std::string& path);

/// Writes a header row and numeric rows; meta lines (already '#'-prefixed)
/// go first so artifacts carry their provenance.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& meta = {});

/// FNV-1a hash of the canonical config text, for artifact stamping.
std::string config_hash_hex(const std::string& text);

} // namespace possim
