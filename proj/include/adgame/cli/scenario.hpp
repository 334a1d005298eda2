#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adgame/market.hpp"
#include "adgame/nash.hpp"

namespace adgame::cli {

/// One sweep axis: `count` evenly spaced values from lo to hi inclusive.
struct Axis {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 2;

  std::vector<double> values() const;
};

/// "name=lo:hi:count[,name=lo:hi:count]". Throws InvalidInput.
std::vector<Axis> parse_grid_spec(std::string_view spec);

struct SimulateBlock {
  double t_end = 10.0;
  std::size_t samples = 501;
  bool emit_controls = false;
};

struct GameBlock {
  double r = 0.0;
  double T = 1.0;
  std::vector<double> x0;
  DeviationOptions deviations;
};

/// Named scalar parameters of an allocation or sweep.
using Params = std::map<std::string, double>;

struct AllocateBlock {
  std::string kind;  // instant, steady, lead, tiers
  Params params;
};

struct SweepBlock {
  std::string quantity;
  std::vector<Axis> axes;
  Params fixed;
};

struct Scenario {
  Model model = Model::nontargeted;
  double m = 1.0;
  std::vector<FirmParams> firms;
  std::optional<std::vector<double>> initial;  // sales at t = 0
  std::optional<ControlPolicy> controls;
  SimulateBlock simulate;
  std::optional<GameBlock> game;
  std::optional<AllocateBlock> allocate;
  std::optional<SweepBlock> sweep;
};

/// Parameter names accepted by each allocation kind.
const std::vector<std::string>& allocate_parameters(const std::string& kind);
/// Quantities and parameter names accepted by `sweep`.
const std::vector<std::string>& sweep_quantities();
const std::vector<std::string>& sweep_parameters();

/// Throws InvalidInput with a "line L, column C" or JSON-pointer diagnostic.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace adgame::cli
