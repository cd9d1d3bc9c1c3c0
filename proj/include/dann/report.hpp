#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "dann/harness.hpp"

namespace dann {

inline constexpr std::string_view kRecordsHeader =
    "network,L,p,q,sigma,basis,validation_error,test_error,training_time_sec,n_params,seed,"
    "sample_id";
inline constexpr std::string_view kSelectionHeader =
    "sample_id,network,selection,L,p,q,sigma,basis,validation_error,test_error,"
    "training_time_sec,n_params";
inline constexpr std::string_view kSummaryHeader =
    "network,selection,avg_test_error,avg_n_params,samples";
inline constexpr std::string_view kPlotHeader = "network,basis,log10_n_params,validation_error";

/// Writes records.csv, selection.csv (one row per sample and selection, NA
/// when no cell qualifies), summary.csv (averages) and plotdata.csv into
/// `dir`, creating it if needed. Reals use 17 significant digits.
void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir);

/// Parses a records.csv written by emit_report. The spec's d is not stored
/// in the file and is taken from `d`. Throws DataError.
[[nodiscard]] std::vector<RunRecord> parse_records_csv(const std::filesystem::path& path, int d);

}  // namespace dann
