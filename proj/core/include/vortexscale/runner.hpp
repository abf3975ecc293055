#pragma once

#include <optional>
#include <string>

#include "vortexscale/scenario.hpp"

namespace vortexscale {

struct RunOptions {
    std::string cache_dir;  // empty: no cache
    int threads{0};         // 0: hardware concurrency
};

/// Immutable result of one scenario run. The content bytes are deterministic
/// for a given scenario and library version: reductions are fixed-order and
/// record timestamps are normalized to the epoch so repeated runs are
/// byte-identical.
struct RunRecord {
    std::string scenario_hash;
    std::string version;
    std::string content;  // canonical JSON bytes
    bool cache_hit{false};
};

RunRecord run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Writes the convergence table (CSV), the spectrum JSON of the smallest
/// epsilon, plot-data series in 1/|log eps|, and (format json) the record
/// itself. Returns the list of file paths written.
std::vector<std::string> write_report(const RunRecord& record, const std::string& out_dir,
                                      const std::string& format);

/// Cache location resolution: explicit option, else VORTEXSCALE_CACHE, else
/// a .vortexscale-cache directory under the working directory.
std::string resolve_cache_dir(const std::string& explicit_dir);

}  // namespace vortexscale
