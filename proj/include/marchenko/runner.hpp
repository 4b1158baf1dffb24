#pragma once

#include <string>
#include <vector>

#include "marchenko/config.hpp"

namespace marchenko {

/// A column is either numeric or text (the verify report has both).
struct Column {
  std::string name;
  std::vector<double> numbers;
  std::vector<std::string> text;
  bool is_text = false;
  std::size_t size() const { return is_text ? text.size() : numbers.size(); }
};

struct RunOutput {
  std::vector<Column> columns;
  std::string metadata_json;  // pretty-printed object
  std::string summary;        // one or two lines for the terminal
};

/// Runs the command; throws ValidationError / NumericalError subclasses.
RunOutput execute(const RunConfig& c);

struct RunResult {
  int status = 0;  // 0 ok, 1 validation failure, 2 numerical failure
  std::string message;
  std::vector<std::string> files;
};

/// execute() plus file output; never throws. Files go to c.out as
/// <stem>.csv and <stem>.metadata.json, or <stem>.json for the json format.
RunResult run(const RunConfig& c);

/// Deterministic text for one number: %.17g, with nan / inf spelled out.
std::string format_number(double v);

std::string to_csv(const RunOutput& out);
std::string to_json(const RunOutput& out);

}  // namespace marchenko
