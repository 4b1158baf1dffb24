#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "marchenko/direct.hpp"
#include "marchenko/fourier.hpp"
#include "marchenko/marchenko_solver.hpp"

namespace marchenko {

enum class Command { reflectionless, marchenko, direct, bridge, roundtrip, verify };
enum class OutputFormat { csv, json };

/// A triplet as written in the file: raw (A, B, C) matrices or a list of
/// bound states. The written form is kept so serialization round-trips.
struct TripletSpec {
  std::variant<MatrixTriplet, std::vector<BoundStateSpec>> form = MatrixTriplet::empty();
  bool operator==(const TripletSpec&) const = default;
};

MatrixTriplet resolve(const TripletSpec& t, Side side);

/// Uniform grid; count == 1 means the single point min (then max == min).
struct GridSpec {
  double min = 0, max = 0;
  int count = 0;
  std::vector<double> points() const;
  bool operator==(const GridSpec&) const = default;
};

/// q, r samples on x0 + k h (cubic interpolation).
struct FieldSamples {
  double x0 = 0, h = 0;
  std::vector<cplx> q, r;
  bool operator==(const FieldSamples&) const = default;
};

struct WindowSpec {
  double min = -12, max = 12, step = 0.01;
  bool operator==(const WindowSpec&) const = default;
};

struct NumericSpec {
  int n = 200;
  double L = 20;
  GridRule rule = GridRule::gregory;
  bool operator==(const NumericSpec&) const = default;
};

struct RunConfig {
  Command command = Command::reflectionless;
  TripletSpec plus, minus;
  ReflectionProfile reflection_plus = ZeroProfile{}, reflection_minus = ZeroProfile{};
  std::optional<FieldSamples> field;  // direct / bridge input instead of the triplets
  GridSpec x_grid{-10, 10, 401};
  GridSpec zeta_grid{0.2, 3, 15};
  WindowSpec window;
  NumericSpec numeric;
  bool bound_state_search = false;  // direct: also locate transmission poles
  std::vector<double> probes;       // verify: report |q|, |r| at these x
  double tol = 1e-10;               // relative tolerance of the Jost ODE integration
  int threads = 0;                  // 0: not set
  OutputFormat format = OutputFormat::csv;
  std::string out = ".";
  std::string name;                 // file stem; defaults to the command name

  bool operator==(const RunConfig&) const = default;
};

/// Strict parse: unknown keys, wrong types and bad values throw ConfigError
/// naming the key (dotted path, e.g. "plus.A").
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

/// Every field written out explicitly, so parse_config_text(serialize(c)) == c.
std::string serialize(const RunConfig& c);

const char* command_name(Command c);
std::string rule_name(GridRule r);

}  // namespace marchenko
