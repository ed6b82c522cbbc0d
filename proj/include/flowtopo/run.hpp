#pragma once

#include "flowtopo/config.hpp"

namespace flowtopo {

// Executes one mode (solve | optimize | continue | verify-gradient |
// verify-shape | gamma-check) and writes the run artifacts (config echo,
// history CSV, VTK fields, summary JSON) into outdir. Returns 0 on success
// and 1 on numerical failure (including failed verification gates).
int run_mode(const std::string& mode, const RunConfig& config, const std::string& outdir,
             bool verbose = false);

bool is_known_mode(const std::string& mode);

}  // namespace flowtopo
