#include "darsan/config.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "darsan/csv.hpp"
#include "darsan/experiments.hpp"
#include "darsan/hash.hpp"

namespace darsan {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& origin, int line, const std::string& what) {
  fail(ErrorCode::Config, origin + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& origin, int line, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    bad(origin, line, "bad number for " + key + ": '" + value + "'");
  }
}

long long parse_int(const std::string& origin, int line, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    bad(origin, line, "bad integer for " + key + ": '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& origin, int line, const std::string& key,
                        const std::string& value) {
  try {
    std::size_t used = 0;
    std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    bad(origin, line, "bad unsigned integer for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& origin, int line, const std::string& key,
                const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  bad(origin, line, "bad boolean for " + key + ": '" + value + "' (use true/false)");
}

std::map<Strategy, double> parse_mix(const std::string& origin, int line,
                                     const std::string& value) {
  std::map<Strategy, double> mix;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t comma = value.find(',', pos);
    std::string token =
        trim(value.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    std::size_t colon = token.find(':');
    if (colon == std::string::npos) bad(origin, line, "bad strategy_mix entry '" + token + "'");
    auto strategy = strategy_from_string(trim(token.substr(0, colon)));
    if (!strategy) bad(origin, line, "unknown strategy '" + token.substr(0, colon) + "'");
    mix[*strategy] = parse_double(origin, line, "strategy_mix", trim(token.substr(colon + 1)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return mix;
}

}  // namespace

SimConfig parse_config(std::istream& in, const std::string& origin) {
  SimConfig config;
  SlopeSpec slope;  // default -1

  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string text = trim(line);
    if (text.empty()) continue;

    if (text.front() == '[') {
      if (text.back() != ']') bad(origin, line_no, "unterminated section header");
      section = text.substr(1, text.size() - 2);
      if (section != "sim" && section != "incentives" && section != "noise" &&
          section != "manifest") {
        bad(origin, line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    if (section == "manifest") continue;  // informational, not configuration

    std::size_t eq = text.find('=');
    if (eq == std::string::npos) bad(origin, line_no, "expected key = value, got '" + text + "'");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (section.empty()) bad(origin, line_no, "key '" + key + "' outside any section");

    if (section == "sim") {
      if (key == "n_reviewers") config.n_reviewers = static_cast<int>(parse_int(origin, line_no, key, value));
      else if (key == "n_rounds") config.n_rounds = static_cast<int>(parse_int(origin, line_no, key, value));
      else if (key == "k_experts") config.k_experts = static_cast<int>(parse_int(origin, line_no, key, value));
      else if (key == "initial_expertise") config.initial_expertise = parse_double(origin, line_no, key, value);
      else if (key == "trait_mean") config.trait_mean = parse_double(origin, line_no, key, value);
      else if (key == "trait_std") config.trait_std = parse_double(origin, line_no, key, value);
      else if (key == "min_initial_qea") config.min_initial_qea = parse_double(origin, line_no, key, value);
      else if (key == "sale_noise_sigma") config.sale_noise_sigma = parse_double(origin, line_no, key, value);
      else if (key == "arrivals_enabled") config.arrivals.enabled = parse_bool(origin, line_no, key, value);
      else if (key == "arrivals_count") config.arrivals.count = static_cast<int>(parse_int(origin, line_no, key, value));
      else if (key == "arrivals_every") config.arrivals.every = static_cast<int>(parse_int(origin, line_no, key, value));
      else if (key == "seed") config.seed = parse_u64(origin, line_no, key, value);
      else if (key == "entry_fee") config.entry_fee = parse_double(origin, line_no, key, value);
      else if (key == "max_admission_attempts") config.max_admission_attempts = static_cast<int>(parse_int(origin, line_no, key, value));
      else if (key == "strategy_mix") config.strategy_mix = parse_mix(origin, line_no, value);
      else if (key == "slope") {
        if (value == "neg-inf") {
          slope = SlopeSpec{0.0, true};
        } else {
          slope = SlopeSpec{parse_double(origin, line_no, key, value), false};
          if (slope.slope > 0.0) bad(origin, line_no, "slope must be nonpositive or neg-inf");
        }
      } else {
        bad(origin, line_no, "unknown key '" + key + "' in [sim]");
      }
    } else if (section == "incentives") {
      if (key == "alpha") config.incentives.alpha = parse_double(origin, line_no, key, value);
      else if (key == "beta") config.incentives.beta = parse_double(origin, line_no, key, value);
      else if (key == "c1") config.incentives.c1 = parse_double(origin, line_no, key, value);
      else if (key == "c2") config.incentives.c2 = parse_double(origin, line_no, key, value);
      else if (key == "pool_scale") config.incentives.pool_scale = parse_double(origin, line_no, key, value);
      else if (key == "thresh") config.incentives.thresh = parse_double(origin, line_no, key, value);
      else if (key == "burn_fraction") config.incentives.burn_fraction = parse_double(origin, line_no, key, value);
      else if (key == "incentive_pool_fraction") config.incentives.incentive_pool_fraction = parse_double(origin, line_no, key, value);
      else if (key == "broad_dividends") config.incentives.broad_dividends = parse_bool(origin, line_no, key, value);
      else bad(origin, line_no, "unknown key '" + key + "' in [incentives]");
    } else if (section == "noise") {
      if (key == "w_max") config.noise.w_max = parse_double(origin, line_no, key, value);
      else if (key == "w_min") config.noise.w_min = parse_double(origin, line_no, key, value);
      else bad(origin, line_no, "unknown key '" + key + "' in [noise]");
    }
  }

  apply_slope(config, slope);
  config.incentives.k = config.k_experts;
  return config;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot open config file: " + path);
  return parse_config(in, path);
}

void save_config(const SimConfig& config, std::ostream& out) {
  out << "[sim]\n";
  out << "n_reviewers = " << config.n_reviewers << "\n";
  out << "n_rounds = " << config.n_rounds << "\n";
  out << "k_experts = " << config.k_experts << "\n";
  out << "initial_expertise = " << csv::format_double(config.initial_expertise) << "\n";
  out << "trait_mean = " << csv::format_double(config.trait_mean) << "\n";
  out << "trait_std = " << csv::format_double(config.trait_std) << "\n";
  out << "min_initial_qea = " << csv::format_double(config.min_initial_qea) << "\n";
  out << "sale_noise_sigma = " << csv::format_double(config.sale_noise_sigma) << "\n";
  out << "arrivals_enabled = " << (config.arrivals.enabled ? "true" : "false") << "\n";
  out << "arrivals_count = " << config.arrivals.count << "\n";
  out << "arrivals_every = " << config.arrivals.every << "\n";
  out << "seed = " << config.seed << "\n";
  out << "entry_fee = " << csv::format_double(config.entry_fee) << "\n";
  out << "max_admission_attempts = " << config.max_admission_attempts << "\n";
  if (config.slope_neg_infinity) {
    out << "slope = neg-inf\n";
  } else {
    out << "slope = " << csv::format_double(config.slope) << "\n";
  }
  out << "strategy_mix = ";
  bool first = true;
  for (const auto& [strategy, fraction] : config.strategy_mix) {
    if (fraction == 0.0) continue;
    if (!first) out << ",";
    out << to_string(strategy) << ":" << csv::format_double(fraction);
    first = false;
  }
  out << "\n\n";

  out << "[incentives]\n";
  out << "alpha = " << csv::format_double(config.incentives.alpha) << "\n";
  out << "beta = " << csv::format_double(config.incentives.beta) << "\n";
  out << "c1 = " << csv::format_double(config.incentives.c1) << "\n";
  out << "c2 = " << csv::format_double(config.incentives.c2) << "\n";
  out << "pool_scale = " << csv::format_double(config.incentives.pool_scale) << "\n";
  out << "thresh = " << csv::format_double(config.incentives.thresh) << "\n";
  out << "burn_fraction = " << csv::format_double(config.incentives.burn_fraction) << "\n";
  out << "incentive_pool_fraction = "
      << csv::format_double(config.incentives.incentive_pool_fraction) << "\n";
  out << "broad_dividends = " << (config.incentives.broad_dividends ? "true" : "false") << "\n\n";

  out << "[noise]\n";
  out << "w_max = " << csv::format_double(config.noise.w_max) << "\n";
  out << "w_min = " << csv::format_double(config.noise.w_min) << "\n";
}

void write_manifest(const SimConfig& config, const std::string& command,
                    const std::string& out_dir, const std::vector<std::string>& artifacts,
                    const std::string& manifest_path) {
  std::ofstream out(manifest_path);
  if (!out) fail(ErrorCode::Io, "cannot write manifest: " + manifest_path);
  save_config(config, out);
  out << "\n[manifest]\n";
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << "timestamp = " << stamp << "\n";
  out << "command = " << command << "\n";
  for (const std::string& name : artifacts) {
    out << "sha256_" << name << " = " << to_hex(sha256_file(out_dir + "/" + name)) << "\n";
  }
}

}  // namespace darsan
