#include "snls/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "snls/error.hpp"

namespace snls {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  }

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  void u64(std::uint64_t x) { bytes(&x, sizeof x); }
  void f64(double x) { bytes(&x, sizeof x); }
  void u8(std::uint8_t x) { bytes(&x, 1); }
  void field(const ComplexField& f) { bytes(f.values().data(), f.size() * sizeof(Complex)); }

  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failed for " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path.string() + " for reading");
  }

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in_) throw IoError("truncated file " + path_.string());
  }
  std::uint64_t u64() { std::uint64_t x; bytes(&x, sizeof x); return x; }
  double f64() { double x; bytes(&x, sizeof x); return x; }
  std::uint8_t u8() { std::uint8_t x; bytes(&x, 1); return x; }
  ComplexField field(const GridPtr& grid) {
    std::vector<Complex> v(grid->size());
    bytes(v.data(), v.size() * sizeof(Complex));
    return ComplexField(grid, std::move(v));
  }
  void magic(const std::array<char, 8>& expected) {
    std::array<char, 8> got{};
    bytes(got.data(), got.size());
    if (got != expected) throw IoError("bad magic in " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace

void write_noise_path(const std::filesystem::path& path, const NoisePath& noise,
                      const GridSpec& grid) {
  Writer w(path);
  w.bytes(kNoiseMagic.data(), kNoiseMagic.size());
  w.u64(static_cast<std::uint64_t>(grid.dim()));
  w.u64(grid.points_per_axis());
  w.u64(noise.steps());
  w.f64(noise.dt);
  for (const auto& inc : noise.increments) {
    if (inc.size() != grid.size()) throw UsageError("noise increment does not match grid");
    w.field(inc);
  }
  w.finish();
}

NoisePath read_noise_path(const std::filesystem::path& path, const GridPtr& grid) {
  Reader r(path);
  r.magic(kNoiseMagic);
  const auto dim = r.u64();
  const auto n = r.u64();
  const auto steps = r.u64();
  if (dim != static_cast<std::uint64_t>(grid->dim()) || n != grid->points_per_axis()) {
    throw UsageError("noise path " + path.string() + " was recorded on a different grid");
  }
  NoisePath noise;
  noise.dt = r.f64();
  noise.increments.reserve(steps);
  for (std::uint64_t s = 0; s < steps; ++s) noise.increments.push_back(r.field(grid));
  return noise;
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  const auto& grid = *traj.config.grid;
  Writer w(path);
  w.bytes(kTrajectoryMagic.data(), kTrajectoryMagic.size());
  w.u64(static_cast<std::uint64_t>(grid.dim()));
  w.u64(grid.points_per_axis());
  w.u64(traj.size());
  w.f64(grid.box_length());
  w.f64(traj.snapshot_dt());
  w.u8(static_cast<std::uint8_t>(traj.config.scheme));
  const bool with_psi = traj.config.scheme == Scheme::dpd;
  for (std::size_t j = 0; j < traj.size(); ++j) {
    w.field(traj.v[j]);
    if (with_psi) w.field(traj.psi[j]);
  }
  w.finish();
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  Reader r(path);
  r.magic(kTrajectoryMagic);
  const auto dim = r.u64();
  const auto n = r.u64();
  const auto count = r.u64();
  const double length = r.f64();
  const double dt = r.f64();
  const auto tag = r.u8();
  if (tag > static_cast<std::uint8_t>(Scheme::deterministic_cubic)) {
    throw IoError("unknown scheme tag in " + path.string());
  }
  if (count == 0) throw IoError("trajectory file " + path.string() + " has no snapshots");
  auto grid = make_grid(static_cast<int>(dim), n, length);

  Trajectory traj;
  traj.config.grid = grid;
  traj.config.scheme = static_cast<Scheme>(tag);
  traj.config.dt = dt;
  traj.config.t_final = dt * static_cast<double>(count - 1);
  traj.config.noise = NoiseSpec::zero(grid);
  traj.frame = traj.config.scheme == Scheme::deterministic_cubic ? Frame::cubic
                                                                 : Frame::gross_pitaevskii;
  const bool with_psi = traj.config.scheme == Scheme::dpd;
  for (std::uint64_t j = 0; j < count; ++j) {
    traj.times.push_back(dt * static_cast<double>(j));
    traj.v.push_back(r.field(grid));
    traj.psi.push_back(with_psi ? r.field(grid) : ComplexField(grid));
  }
  traj.config.initial_v = traj.v.front();
  return traj;
}

// ---------------------------------------------------------------------------

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

void write_rows(const std::filesystem::path& path,
                const std::vector<std::array<double, 8>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < kDiagnosticsColumns.size(); ++c) {
    out << (c ? "," : "") << kDiagnosticsColumns[c];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void emit_csv(const DiagnosticsTable& table, const std::filesystem::path& path) {
  const auto& l = table.ledger;
  std::vector<std::array<double, 8>> rows;
  for (std::size_t j = 0; j < l.size(); ++j) {
    rows.push_back({l.times[j], l.energy[j], l.ham1[j], l.ham2[j], l.ham3[j], l.residual[j],
                    j < table.x1_cum.size() ? table.x1_cum[j] : 0.0,
                    j < table.l6_cum.size() ? table.l6_cum[j] : 0.0});
  }
  write_rows(path, rows);
}

void emit_csv(const EnergyLedger& ledger, const std::filesystem::path& path) {
  DiagnosticsTable table;
  table.ledger = ledger;
  emit_csv(table, path);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing header row in " + path.string());
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double x = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (res.ec != std::errc{}) throw IoError("bad number '" + cell + "' in " + path.string());
      row.push_back(x);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace snls
