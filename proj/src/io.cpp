#include "sshwalk/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace sshwalk {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  row(std::span<const std::string>(header));
}

CsvWriter &CsvWriter::row(std::span<const std::string> cells) {
  if (cells.size() != columns_) {
    throw std::logic_error("CSV row has the wrong number of cells");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  return *this;
}

CsvWriter &CsvWriter::row(std::initializer_list<std::string> cells) {
  return row(std::span<const std::string>(cells.begin(), cells.size()));
}

json to_json(const RateConfig &config) {
  return {{"model", "ssh"},
          {"gamma_bar", config.gamma_bar()},
          {"alpha", config.alpha()},
          {"gamma_l", config.gamma_l()},
          {"gamma_r", config.gamma_r()}};
}

json to_json(const FeedbackConfig &config) {
  return {{"model", "feedback"},
          {"gamma_r", config.gamma_r},
          {"gamma_l_even", config.gamma_l_even},
          {"gamma_l_odd", config.gamma_l_odd}};
}

json to_json(const ChainGenerator &generator) {
  json doc;
  doc["n_sites"] = generator.n_sites;
  doc["diagonal"] = generator.diagonal;
  doc["off_diagonal"] = generator.off_diagonal;
  doc["jump_left"] = generator.jump_left;
  doc["jump_right"] = generator.jump_right;
  if (const auto *rates = std::get_if<RateConfig>(&generator.source)) {
    doc["config"] = to_json(*rates);
  } else if (const auto *fb = std::get_if<FeedbackConfig>(&generator.source)) {
    doc["config"] = to_json(*fb);
  } else {
    doc["config"] = nullptr;
  }
  return doc;
}

ChainGenerator generator_from_json(const json &doc) {
  try {
    ChainGenerator gen;
    gen.n_sites = doc.at("n_sites").get<std::size_t>();
    gen.diagonal = doc.at("diagonal").get<std::vector<double>>();
    gen.off_diagonal = doc.at("off_diagonal").get<std::vector<double>>();
    gen.jump_left = doc.at("jump_left").get<std::vector<double>>();
    gen.jump_right = doc.at("jump_right").get<std::vector<double>>();
    const std::size_t n = gen.n_sites;
    if (n == 0 || gen.diagonal.size() != n || gen.off_diagonal.size() + 1 != n ||
        gen.jump_left.size() != n || gen.jump_right.size() != n) {
      throw std::invalid_argument("generator arrays have inconsistent lengths");
    }
    const json &config = doc.value("config", json());
    if (config.is_object()) {
      const std::string model = config.at("model").get<std::string>();
      if (model == "ssh") {
        gen.source = RateConfig::from_bias_closed(config.at("gamma_bar").get<double>(),
                                                  config.at("alpha").get<double>());
      } else if (model == "feedback") {
        FeedbackConfig fb{config.at("gamma_r").get<double>(),
                          config.at("gamma_l_even").get<double>(),
                          config.at("gamma_l_odd").get<double>()};
        fb.validate();
        gen.source = fb;
      } else {
        throw std::invalid_argument("unknown generator model: " + model);
      }
    }
    return gen;
  } catch (const json::exception &ex) {
    throw std::invalid_argument(std::string("malformed generator JSON: ") + ex.what());
  }
}

json to_json(const WindingResult &result, const RateConfig &config) {
  return {{"gamma_bar", config.gamma_bar()},
          {"alpha", config.alpha()},
          {"W", result.winding},
          {"zak_phase", result.zak_phase},
          {"label", to_string(result.phase)}};
}

json to_json(const FitResult &result) {
  json terms = json::array();
  for (const auto &term : result.terms) {
    terms.push_back({{"beta", term.beta}, {"A", term.weight}});
  }
  return {{"terms", terms},
          {"residual", result.residual},
          {"converged", result.diagnostics.converged},
          {"k_terms", result.k_terms},
          {"effective_k", result.effective_k()},
          {"iterations", result.diagnostics.iterations},
          {"condition", result.diagnostics.condition},
          {"restarts", result.diagnostics.restarts}};
}

json ensemble_header(const EscapeTimeEnsemble &ensemble, const json &config) {
  return {{"format", "sshwalk-ensemble"},
          {"version", 1},
          {"i_max", ensemble.i_max()},
          {"seed", ensemble.seed},
          {"n_sites", ensemble.n_sites},
          {"initial", ensemble.initial.describe()},
          {"fingerprint", ensemble.fingerprint},
          {"time_unit", ensemble.time_unit},
          {"time_scale", ensemble.time_scale},
          {"rng", "philox4x64-10"},
          {"config", config}};
}

std::string encode_ensemble(const EscapeTimeEnsemble &ensemble, const json &config) {
  std::string out = ensemble_header(ensemble, config).dump();
  out += '\n';
  const std::size_t offset = out.size();
  out.resize(offset + ensemble.times.size() * 8);
  for (std::size_t i = 0; i < ensemble.times.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(ensemble.times[i]);
    for (int b = 0; b < 8; ++b) {
      out[offset + 8 * i + static_cast<std::size_t>(b)] = static_cast<char>(bits & 0xff);
      bits >>= 8;
    }
  }
  return out;
}

EscapeTimeEnsemble decode_ensemble(const std::string &bytes, json *header_out) {
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string::npos) {
    throw std::invalid_argument("ensemble file has no header line");
  }
  json header;
  try {
    header = json::parse(bytes.substr(0, newline));
  } catch (const json::exception &ex) {
    throw std::invalid_argument(std::string("bad ensemble header: ") + ex.what());
  }
  EscapeTimeEnsemble ensemble;
  try {
    const auto i_max = header.at("i_max").get<std::size_t>();
    if (bytes.size() - newline - 1 != 8 * i_max) {
      throw std::invalid_argument("ensemble payload size does not match i_max");
    }
    ensemble.seed = header.at("seed").get<std::uint64_t>();
    ensemble.n_sites = header.at("n_sites").get<std::size_t>();
    ensemble.initial = InitialSpec::parse(header.at("initial").get<std::string>());
    ensemble.fingerprint = header.value("fingerprint", "");
    ensemble.time_unit = header.value("time_unit", "raw");
    ensemble.time_scale = header.value("time_scale", 1.0);
    ensemble.times.resize(i_max);
    const auto *p = reinterpret_cast<const unsigned char *>(bytes.data() + newline + 1);
    for (std::size_t i = 0; i < i_max; ++i) {
      std::uint64_t bits = 0;
      for (int b = 7; b >= 0; --b) {
        bits = (bits << 8) | p[8 * i + static_cast<std::size_t>(b)];
      }
      ensemble.times[i] = std::bit_cast<double>(bits);
    }
  } catch (const json::exception &ex) {
    throw std::invalid_argument(std::string("bad ensemble header: ") + ex.what());
  }
  for (std::size_t i = 1; i < ensemble.times.size(); ++i) {
    if (ensemble.times[i] < ensemble.times[i - 1]) {
      throw std::invalid_argument("ensemble times are not sorted");
    }
  }
  if (header_out) *header_out = std::move(header);
  return ensemble;
}

std::string curve_csv(const ReconstructedCurve &curve) {
  CsvWriter csv({"t", "value", "kind"});
  const std::string kind = to_string(curve.kind);
  for (const auto &p : curve.points) {
    csv.row({format_double(p.t), format_double(p.value), kind});
  }
  return csv.str();
}

ReconstructedCurve parse_curve_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,value", 0) != 0) {
    throw std::invalid_argument("curve CSV must start with the header t,value[,kind]");
  }
  ReconstructedCurve curve;
  bool kind_seen = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) {
      throw std::invalid_argument("curve CSV line " + std::to_string(line_no) + " is short");
    }
    CurvePoint p;
    auto parse = [&](const std::string &s, double &v) {
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("bad number on curve CSV line " + std::to_string(line_no));
      }
    };
    parse(cells[0], p.t);
    parse(cells[1], p.value);
    if (cells.size() > 2) {
      const CurveKind kind = parse_curve_kind(cells[2]);
      if (kind_seen && kind != curve.kind) {
        throw std::invalid_argument("curve CSV mixes kinds");
      }
      curve.kind = kind;
      kind_seen = true;
    }
    curve.points.push_back(p);
  }
  return curve;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot open " + path.string());
  }
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

std::string sha256_hex(const std::string &bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static const char *hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

} // namespace sshwalk
