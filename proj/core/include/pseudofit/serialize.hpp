// serialize.hpp — JSON schemas and CSV writers for the file interfaces
//
// CoupledModel JSON is row-major with split re/im arrays and round-trips doubles
// exactly (shortest-representation decimals). CSV columns print with 17 significant
// digits.

#pragma once

#include <filesystem>
#include <string>

#include "pseudofit/bath.hpp"
#include "pseudofit/dynamics.hpp"
#include "pseudofit/expfit.hpp"
#include "pseudofit/gauge.hpp"
#include "pseudofit/realization.hpp"
#include "pseudofit/types.hpp"

namespace pseudofit {

std::string to_json(const CoupledModel& cm);
CoupledModel coupled_model_from_json(const std::string& text);

std::string to_json(const QuasiModel& m);
QuasiModel quasi_model_from_json(const std::string& text);

std::string to_json(const PoleResidue& pr);
PoleResidue pole_residue_from_json(const std::string& text);

// {"density": {"type": ...}, "beta": number | "inf", "statistics": ..., "mu": number}
BathSpec bath_spec_from_json(const std::string& text);
std::string to_json(const BathSpec& bath);

std::string format_double(double x);  // %.17g

void write_time_series_csv(const std::filesystem::path& path, const TimeSeries& ts,
                           const std::string& value_name = "C");
TimeSeries time_series_from_csv(const std::filesystem::path& path);

void write_freq_series_csv(const std::filesystem::path& path, const FreqSeries& fs,
                           const std::string& value_name = "S");

// header: t, n0, ..., <observables re/im>, trace_defect, min_eig_rhoS
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace pseudofit
