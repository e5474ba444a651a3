#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sagr/sim.hpp"

namespace sagr {

// Effective configuration echoed into every result header.
nlohmann::json config_to_json(const EpisodeConfig& cfg);
nlohmann::json cycle_to_json(const CycleRecord& rec);
nlohmann::json result_summary_json(const EpisodeConfig& cfg, const EpisodeResult& result);

// Line-delimited episode record: one cycle record per line, summary last.
void write_episode_jsonl(const EpisodeConfig& cfg, const EpisodeResult& result,
                         const std::string& path);

// Canonical record text with volatile fields (latencies) zeroed; equal strings
// mean bit-identical episodes under the determinism contract.
std::string episode_fingerprint(const EpisodeResult& result);

// Observed-map snapshot as scene-format text plus a PGM image
// (<dir>/cycle_###.txt / .pgm).
void write_snapshot(const ObservedMap& observed, const LabelSet& labels, const std::string& dir,
                    int cycle);

std::string observed_to_text(const ObservedMap& observed, const LabelSet& labels);

// cmd_bench CSV schema.
std::string metrics_csv(const std::vector<MetricsRow>& rows);

}  // namespace sagr
