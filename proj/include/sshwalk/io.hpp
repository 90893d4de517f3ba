#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sshwalk/fitting.hpp"
#include "sshwalk/generator.hpp"
#include "sshwalk/montecarlo.hpp"
#include "sshwalk/topology.hpp"

namespace sshwalk {

using json = nlohmann::ordered_json;

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// Builds CSV text with a header row; cells are written verbatim.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter &row(std::span<const std::string> cells);
  CsvWriter &row(std::initializer_list<std::string> cells);
  const std::string &str() const { return text_; }

private:
  std::size_t columns_;
  std::string text_;
};

json to_json(const RateConfig &config);
json to_json(const FeedbackConfig &config);
json to_json(const ChainGenerator &generator);
ChainGenerator generator_from_json(const json &doc);
json to_json(const WindingResult &result, const RateConfig &config);
json to_json(const FitResult &result);

/// One JSON header line (terminated by '\n') followed by i_max
/// little-endian IEEE-754 doubles.
std::string encode_ensemble(const EscapeTimeEnsemble &ensemble, const json &config);
EscapeTimeEnsemble decode_ensemble(const std::string &bytes, json *header = nullptr);
json ensemble_header(const EscapeTimeEnsemble &ensemble, const json &config);

/// Columns t, value, kind.
std::string curve_csv(const ReconstructedCurve &curve);
ReconstructedCurve parse_curve_csv(const std::string &text);

std::string read_file(const std::filesystem::path &path);
/// Creates parent directories as needed.
void write_file(const std::filesystem::path &path, const std::string &content);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string &bytes);

} // namespace sshwalk
