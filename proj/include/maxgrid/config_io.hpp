#pragma once

#include <string>

#include "maxgrid/harness.hpp"

namespace maxgrid {

struct RunConfigFile {
  ExperimentConfig experiment;
  std::string output_dir = ".";
  std::vector<ReportFormat> formats = {ReportFormat::Json, ReportFormat::Csv};
};

// Strict parser for the run-configuration document: unknown keys are rejected,
// schema_version must be supported.
RunConfigFile parse_run_config(const std::string& json_text);
RunConfigFile load_run_config(const std::string& path);

}  // namespace maxgrid
