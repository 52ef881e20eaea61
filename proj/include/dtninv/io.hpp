#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dtninv/fem.hpp"
#include "dtninv/trainer.hpp"

namespace dtninv {

/// "epoch,mean_loss,rel_error,lr,clamps,seconds". Wall-clock seconds are
/// written only when `with_seconds` is set; otherwise the column holds 0 so
/// the file is reproducible byte for byte.
void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history,
                       bool with_seconds = false);
std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path);

/// "x,y,k_exact,k_recon,abs_err", one row per vertex.
void write_field_csv(const std::filesystem::path& path, const Mesh& mesh, const Vector& k_exact,
                     const Vector& k_recon);

struct FieldTable {
  std::vector<Point> points;
  Vector k_exact;
  Vector k_recon;
};
FieldTable read_field_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Shortest decimal that round-trips.
std::string format_double(double v);

} // namespace dtninv
