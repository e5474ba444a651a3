#pragma once

#include <string>
#include <vector>

namespace sagr {

// Subcommand dispatcher for the sagr binary. Exit codes: 0 success /
// episode completed, 2 episode failed-incomplete, 1 config or usage error.
int cli_main(int argc, const char* const* argv);

// Shared by cmd_bench and cmd_ablate: runs every episode of a manifest file,
// writes per-episode JSONL records plus summary.csv under out_dir.
int run_manifest(const std::string& manifest_path, const std::string& out_dir, int jobs,
                 bool ablate_variants);

}  // namespace sagr
