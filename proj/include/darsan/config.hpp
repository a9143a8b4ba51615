#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "darsan/sim.hpp"

namespace darsan {

// Flat key=value config with [sim], [incentives] and [noise] sections.
// '#' starts a comment; a [manifest] section is ignored on load, so a run
// manifest is itself a loadable config. Unknown sections or keys are errors
// naming the offending token. Channel weights are derived from `slope`
// ("neg-inf" or a nonpositive number), never set directly.
SimConfig parse_config(std::istream& in, const std::string& origin);
SimConfig load_config(const std::string& path);
void save_config(const SimConfig& config, std::ostream& out);

// Resolved config plus a [manifest] section: timestamp, the invoking command,
// and a SHA-256 checksum per artifact file (paths relative to the output dir).
void write_manifest(const SimConfig& config, const std::string& command,
                    const std::string& out_dir, const std::vector<std::string>& artifacts,
                    const std::string& manifest_path);

}  // namespace darsan
