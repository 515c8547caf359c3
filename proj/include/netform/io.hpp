#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "netform/game.hpp"
#include "netform/panel.hpp"
#include "netform/params.hpp"

namespace netform {

/// A parsed CSV file: header plus rows of raw fields, with the 1-based file
/// line of every row for error messages. No quoting; fields are trimmed.
struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;

  /// Column position; throws ParseError naming the file when missing.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text, const std::string& path = "<string>");
/// Throws ParseError when the file cannot be read.
CsvTable read_csv(const std::string& path);
std::string read_file(const std::string& path);
/// Writes atomically enough for our purposes: truncate and write.
void write_file(const std::string& path, const std::string& contents);

/// Panel in two CSV files.
///
/// covariates: classroom_id, agent_id, optional school and grade, then
/// attribute columns. Agent order within a classroom is file order;
/// classroom order is order of first appearance. Categorical attributes may
/// hold labels, which are coded by first appearance.
///
/// networks: classroom_id, period (T0 or T1), sender, receiver, listing
/// present edges. A row with empty sender and receiver declares a period
/// without edges. Every classroom needs both periods.
NetworkPanel load_panel(const std::string& networks_path, const std::string& covariates_path,
                        const CovariateSpec& spec);
NetworkPanel parse_panel(const CsvTable& networks, const CsvTable& covariates,
                         const CovariateSpec& spec);
/// Inverse of load_panel. Requires agent tables on every observation.
void save_panel(const NetworkPanel& panel, const std::string& networks_path,
                const std::string& covariates_path);
std::string panel_networks_csv(const NetworkPanel& panel);
std::string panel_covariates_csv(const NetworkPanel& panel);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

enum class AttributeLaw { Normal, Uniform, Bernoulli };

struct AttributeSpec {
  std::string name;
  AttributeLaw law = AttributeLaw::Normal;
  double a = 0.0;  // normal mean, uniform lower bound, Bernoulli probability
  double b = 1.0;  // normal sd, uniform upper bound
  bool categorical = false;
};

enum class InitialLaw { Empty, Bernoulli, BurnIn };

struct GeneratorSpec {
  std::size_t classrooms = 10;
  std::size_t n_min = 6, n_max = 6;
  std::size_t schools = 1;
  std::size_t grades = 1;
  std::vector<AttributeSpec> attributes;
  ParamVector beta;  // sized for attributes.size()
  std::size_t tau = 1;
  InitialLaw initial = InitialLaw::Empty;
  double initial_density = 0.1;  // Bernoulli law
  std::size_t burn_in = 0;       // rounds from the empty network
  ShockSpec shocks;

  /// Throws ConfigError for inconsistent settings.
  void validate() const;
  CovariateSpec covariate_spec() const;
};

/// Draws agents, baselines and followups. Classroom c uses streams derived
/// from (seed, c), so output does not depend on anything but spec and seed.
/// Agents carry a class_list column with their position.
NetworkPanel generate_synthetic(const GeneratorSpec& spec, std::uint64_t seed);

/// Current code version string for manifests.
const char* version_string();

}  // namespace netform
