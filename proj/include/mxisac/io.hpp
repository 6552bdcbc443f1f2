// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mxisac/channel.hpp"
#include "mxisac/music.hpp"
#include "mxisac/opt_manifold.hpp"

namespace mxisac {

/// Config file format: a JSON object with unit-bearing keys, for example
///   { "desk_scale": true, "frequency_ghz": 38, "user": {"r_m": 40, "theta_deg": 15},
///     "noise_comm_dbm": -30, "scnr_threshold_db": 10 }
/// Keys left out take the defaults of the selected preset. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
ScenarioConfig config_from_json_text(const std::string& text, bool desk_scale = false);
ScenarioConfig load_config(const std::string& path, bool desk_scale = false);
std::string config_to_json_text(const ScenarioConfig& config);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Fixed-precision number formatting used by every CSV writer, so output is
/// byte-stable across runs.
std::string fmt_num(double v);

/// Channel and sensing responses as JSON: complex entries as [re, im] pairs,
/// matrices row-major.
std::string channel_dump_json(const CommChannel& comm, const SensingResponses& responses);

std::string trace_csv(const std::vector<TraceRow>& trace);

std::string spectrum_csv(const MusicResult& result);
/// Header: nx, ny as little-endian int64, then x0, y0, dx, dy as doubles,
/// then ny*nx doubles row-major (row j is y(j)).
void write_spectrum_binary(const std::string& path, const MusicResult& result);
MusicResult read_spectrum_binary(const std::string& path);

}  // namespace mxisac
