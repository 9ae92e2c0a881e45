#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tariffopt/experiments.hpp"

namespace tariffopt::report {

struct ProfitDistribution {
  std::string label;
  Eigen::VectorXd profits;
  Eigen::VectorXd probabilities;
};

struct ReportInputs {
  std::optional<experiments::FrontierResult> frontier;
  std::optional<experiments::GridResult> grid;
  std::vector<experiments::SweepResult> sweeps;
  std::vector<ProfitDistribution> profit_cdfs;
  // Raw and reduced deterministic objectives, drawn as two ECDFs.
  std::optional<ProfitDistribution> raw_objectives;
  std::optional<ProfitDistribution> reduced_objectives;
  std::optional<experiments::PriceBands> price_bands;
  // Canonical description of the run; hashed into the manifest.
  std::string config;
  std::uint64_t seed = 0;
};

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Writes CSV tables, SVG plots and manifest.json under `dir`, returning the
// written file names in order. Output depends only on the inputs.
std::vector<std::string> write_report(const std::filesystem::path& dir, const ReportInputs& inputs);

// Individual writers; each throws IoError instead of writing an empty table.
void write_frontier(const std::filesystem::path& dir, const experiments::FrontierResult& frontier,
                    std::vector<std::string>& written);
void write_grid(const std::filesystem::path& dir, const experiments::GridResult& grid,
                std::vector<std::string>& written);
void write_sweep(const std::filesystem::path& dir, const experiments::SweepResult& sweep,
                 std::vector<std::string>& written);
void write_manifest(const std::filesystem::path& dir, const ReportInputs& inputs,
                    const std::vector<std::string>& written);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  double number(std::size_t row, std::string_view column) const;
};

CsvTable read_csv_table(const std::filesystem::path& path);

}  // namespace tariffopt::report
