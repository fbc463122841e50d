#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "snls/diagnostics.hpp"
#include "snls/dynamics.hpp"
#include "snls/noise.hpp"

namespace snls {

// Binary layouts (all integers u64 little-endian, reals IEEE-754 LE doubles,
// complex values as interleaved re/im, snapshots row-major):
//
//   noise path:  "SNLSNSE1" dim n steps dt increments...
//   trajectory:  "SNLSTRJ1" dim n snapshots box_length dt scheme(u8) v... [psi...]
//
// The trajectory `dt` is the spacing between stored snapshots. Psi blocks
// follow each v block only for the dpd scheme.

inline constexpr std::array<char, 8> kNoiseMagic{'S', 'N', 'L', 'S', 'N', 'S', 'E', '1'};
inline constexpr std::array<char, 8> kTrajectoryMagic{'S', 'N', 'L', 'S', 'T', 'R', 'J', '1'};

void write_noise_path(const std::filesystem::path& path, const NoisePath& noise,
                      const GridSpec& grid);
/// Reads a noise path; dim and points per axis must match `grid`.
NoisePath read_noise_path(const std::filesystem::path& path, const GridPtr& grid);

void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory);
/// Rebuilds a trajectory (without noise path) from its binary form.
Trajectory read_trajectory(const std::filesystem::path& path);

/// Column names of the diagnostics CSV, in order.
inline constexpr std::array<const char*, 8> kDiagnosticsColumns{
    "time", "energy", "ham1", "ham2", "ham3", "residual", "x1_cum", "l6_cum"};

/// Shortest decimal that parses back to exactly `value`.
std::string format_double(double value);

void emit_csv(const DiagnosticsTable& table, const std::filesystem::path& path);
void emit_csv(const EnergyLedger& ledger, const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace snls
