#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "hybridpv/metrics.hpp"
#include "hybridpv/sim_engine.hpp"

namespace hpv::io {

inline constexpr std::string_view kResultsHeader =
    "t,G,Tcell,Pmp,Pref,reserve_target,Pout,Ppv,Pbess,SOC_true,SOC_est,Pres,eps,u1,u2,status";
inline constexpr std::string_view kThermalHeader = "t,Pref_thermal,Pout_thermal";

/// Throws DataError on I/O failure.
void write_results_csv(const std::filesystem::path& path, const sim::ResultLog& log);

/// Reads the CSV columns back; fields outside the schema stay default.
/// Throws DataError on a header mismatch.
sim::ResultLog read_results_csv(const std::filesystem::path& path);

void write_thermal_csv(const std::filesystem::path& path, const std::vector<sim::ThermalRecord>& thermal);

/// Human-readable key = value summary.
void write_summary(const std::filesystem::path& path, const sim::RunMetadata& meta, const metrics::Metrics& m,
                   const std::vector<std::pair<std::string, std::string>>& extra = {});

std::string format_metrics(const metrics::Metrics& m);

}  // namespace hpv::io
