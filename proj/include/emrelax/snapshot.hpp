#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "emrelax/grid.hpp"

namespace emrelax {

/// Contents of one field snapshot file.
struct SnapshotData {
  PeriodicGrid grid;
  std::vector<ScalarField> components;
  std::string metadata;  ///< JSON text, "{}" when absent
};

/// Writes a snapshot (layout documented in docs/snapshot_format.md).
///
/// All components must share one grid. `metadata` is stored verbatim.
void write_snapshot(const std::filesystem::path& path, const std::vector<ScalarField>& components,
                    const std::string& metadata = "{}");

SnapshotData read_snapshot(const std::filesystem::path& path);

/// Flattens vector fields into the component list of a snapshot.
void append_components(std::vector<ScalarField>& out, const VectorField& v);

}  // namespace emrelax
