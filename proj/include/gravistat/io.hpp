#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gravistat/branch.hpp"
#include "gravistat/energetics.hpp"
#include "gravistat/validation.hpp"

namespace gravistat {

// CSV: header rho0,mass,m,sup_density,lambda,entropy,potential,free_energy
// then one row per sample, numbers at 17 significant digits.
std::string branch_to_csv(const Branch& branch);
std::vector<BranchSample> parse_branch_csv(std::string_view text);
std::string samples_to_csv(const std::vector<BranchSample>& samples);

/// "%.17g" formatting used by every text emitter.
std::string format_number(double value);

nlohmann::json to_json(const ModelSpec& model);
nlohmann::json to_json(const IntegratorConfig& cfg);
nlohmann::json to_json(const Branch& branch);
nlohmann::json to_json(const TurningPointSet& set);
nlohmann::json to_json(const CheckReport& report);
nlohmann::json to_json(const EnergyReport& report);
nlohmann::json to_json(const SolutionCount& count);
nlohmann::json to_json(const std::vector<MatrixEntry>& matrix);

ModelSpec model_from_json(const nlohmann::json& j);
Branch branch_from_json(const nlohmann::json& j);

enum class DiagramKind { Bifurcation, Entropy, Potential, FreeEnergy };

struct DiagramStyle {
  DiagramKind kind = DiagramKind::Bifurcation;
  bool log100 = false;  // energy ordinate as log(100 + value)
  int width = 640;
  int height = 480;
  std::string title;
};

/// Standalone SVG 1.1 document with one polyline per branch. Bifurcation
/// diagrams use (log(1 + m), log(1 + rho0)); energy diagrams use
/// (log(1 + M), value). The eta = 0 branch is drawn dashed.
std::string emit_diagram(const std::vector<Branch>& branches, const DiagramStyle& style = {});

}  // namespace gravistat
