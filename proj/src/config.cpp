// SPDX-License-Identifier: Apache-2.0
#include "isacee/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace isacee {

void SystemConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (n_th < 1 || n_tv < 1 || n_rh < 1 || n_rv < 1) fail("UPA dimensions must be >= 1");
  if (k_users < 1) fail("k_users must be >= 1");
  if (q_subcarriers < 1) fail("q_subcarriers must be >= 1");
  if (nt() <= k_users) fail("Nt must exceed K (ZF pseudo-inverse needs a tall channel matrix)");
  if (f_c <= 0 || bandwidth <= 0) fail("frequencies must be positive");
  if (frame_len < 1) fail("frame_len must be >= 1");
  if (sigma_c_sq <= 0 || sigma_s_sq <= 0) fail("noise powers must be positive");
  if (p_max <= 0 || p_0 <= 0) fail("power budget and circuit power must be positive");
  if (epsilon_dyn < 0) fail("epsilon_dyn must be nonnegative");
  if (rho_amp <= 0 || rho_amp > 1) fail("rho_amp must lie in (0, 1]");
  if (omega < 0) fail("omega must be nonnegative");
  if (se_threshold < 0) fail("se_threshold must be nonnegative");
  if (crb0_theta <= 0 || crb0_phi <= 0) fail("CRB ceilings must be positive");
  if (target_theta < -kPi || target_theta > kPi) fail("target_theta outside [-pi, pi]");
  if (target_phi < -kPi / 2 || target_phi > kPi / 2) fail("target_phi outside [-pi/2, pi/2]");
  if (cell_radius < r_h) fail("cell_radius must be >= r_h");
  if (r_h <= 0) fail("r_h must be positive");
  if (!user_positions.empty()) {
    if (static_cast<int>(user_positions.size()) != k_users)
      fail("user_positions must list exactly k_users entries");
    for (const auto& u : user_positions)
      if (u.r_m < r_h) fail("user positions must satisfy r >= r_h");
  }
}

SystemConfig desk_scale_config() {
  SystemConfig cfg;  // defaults are the desk-scale scenario
  cfg.validate();
  return cfg;
}

SystemConfig paper_scale_config() {
  SystemConfig cfg;
  cfg.n_th = cfg.n_tv = cfg.n_rh = cfg.n_rv = 5;
  cfg.k_users = 6;
  cfg.q_subcarriers = 16;
  cfg.cell_radius = 1000.0;
  cfg.se_threshold = 5.0;
  cfg.validate();
  return cfg;
}

double subcarrier_freq(int q, const SystemConfig& cfg) {
  if (q < 1 || q > cfg.q_subcarriers)
    throw std::domain_error("subcarrier index " + std::to_string(q) + " outside 1.." +
                            std::to_string(cfg.q_subcarriers));
  const int Q = cfg.q_subcarriers;
  return cfg.f_c + cfg.bandwidth * static_cast<double>(q - Q) / (2.0 * Q);
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct ValueWithUnit {
  double value = 0.0;
  std::string unit;  // lowercase; empty when none given
};

ValueWithUnit parse_value(const std::string& text, const std::string& key) {
  std::istringstream iss(text);
  ValueWithUnit v;
  if (!(iss >> v.value))
    throw std::invalid_argument("config: cannot parse numeric value for '" + key + "': " + text);
  std::string unit;
  if (iss >> unit) v.unit = lower(unit);
  std::string extra;
  if (iss >> extra)
    throw std::invalid_argument("config: trailing tokens after value for '" + key + "': " + text);
  return v;
}

double parse_power_mw(const ValueWithUnit& v, const std::string& key) {
  if (v.unit.empty() || v.unit == "mw") return v.value;
  if (v.unit == "dbm") return dbm_to_mw(v.value);
  if (v.unit == "w") return v.value * 1e3;
  throw std::invalid_argument("config: unknown power unit for '" + key + "': " + v.unit);
}

double parse_angle_rad(const ValueWithUnit& v, const std::string& key) {
  if (v.unit == "rad") return v.value;
  if (v.unit == "deg") return v.value * kPi / 180.0;
  throw std::invalid_argument("config: angle '" + key + "' needs an explicit unit (deg or rad)");
}

double parse_crb(const ValueWithUnit& v, const std::string& key) {
  if (v.unit == "db") return db_to_linear(v.value);
  if (v.unit.empty() || v.unit == "rad2") return v.value;
  throw std::invalid_argument("config: unknown CRB unit for '" + key + "': " + v.unit);
}

double parse_freq_hz(const ValueWithUnit& v, const std::string& key) {
  if (v.unit.empty() || v.unit == "hz") return v.value;
  if (v.unit == "khz") return v.value * 1e3;
  if (v.unit == "mhz") return v.value * 1e6;
  if (v.unit == "ghz") return v.value * 1e9;
  throw std::invalid_argument("config: unknown frequency unit for '" + key + "': " + v.unit);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream iss(text);
  while (std::getline(iss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);

  SystemConfig cfg;
  std::vector<double> user_r;
  std::vector<double> user_az;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " has no '='");
    std::string key = lower(trim(line.substr(0, eq)));
    std::string val = trim(line.substr(eq + 1));

    auto as_int = [&](int& dst) { dst = static_cast<int>(std::lround(parse_value(val, key).value)); };

    if (key == "n_th") as_int(cfg.n_th);
    else if (key == "n_tv") as_int(cfg.n_tv);
    else if (key == "n_rh") as_int(cfg.n_rh);
    else if (key == "n_rv") as_int(cfg.n_rv);
    else if (key == "k_users") as_int(cfg.k_users);
    else if (key == "q_subcarriers") as_int(cfg.q_subcarriers);
    else if (key == "frame_len") as_int(cfg.frame_len);
    else if (key == "f_c") cfg.f_c = parse_freq_hz(parse_value(val, key), key);
    else if (key == "bandwidth") cfg.bandwidth = parse_freq_hz(parse_value(val, key), key);
    else if (key == "sigma_c_sq") cfg.sigma_c_sq = parse_value(val, key).value;
    else if (key == "sigma_s_sq") cfg.sigma_s_sq = parse_value(val, key).value;
    else if (key == "p_max") cfg.p_max = parse_power_mw(parse_value(val, key), key);
    else if (key == "p_0") cfg.p_0 = parse_power_mw(parse_value(val, key), key);
    else if (key == "epsilon_dyn") cfg.epsilon_dyn = parse_power_mw(parse_value(val, key), key);
    else if (key == "rho_amp") cfg.rho_amp = parse_value(val, key).value;
    else if (key == "omega") cfg.omega = parse_value(val, key).value;
    else if (key == "se_threshold") cfg.se_threshold = parse_value(val, key).value;
    else if (key == "crb0_theta") cfg.crb0_theta = parse_crb(parse_value(val, key), key);
    else if (key == "crb0_phi") cfg.crb0_phi = parse_crb(parse_value(val, key), key);
    else if (key == "crb0") { double c = parse_crb(parse_value(val, key), key); cfg.crb0_theta = cfg.crb0_phi = c; }
    else if (key == "target_theta") cfg.target_theta = parse_angle_rad(parse_value(val, key), key);
    else if (key == "target_phi") cfg.target_phi = parse_angle_rad(parse_value(val, key), key);
    else if (key == "alpha_refl_re") cfg.alpha_refl.real(parse_value(val, key).value);
    else if (key == "alpha_refl_im") cfg.alpha_refl.imag(parse_value(val, key).value);
    else if (key == "cell_radius") cfg.cell_radius = parse_value(val, key).value;
    else if (key == "r_h") cfg.r_h = parse_value(val, key).value;
    else if (key == "nu_pathloss") cfg.nu_pathloss = parse_value(val, key).value;
    else if (key == "sigma_shadow_db") cfg.sigma_shadow_db = parse_value(val, key).value;
    else if (key == "rng_seed") cfg.rng_seed = static_cast<std::uint64_t>(parse_value(val, key).value);
    else if (key == "equalcs_optimize_xi") cfg.equalcs_optimize_xi = parse_value(val, key).value != 0.0;
    else if (key == "user_r") {
      for (const auto& item : split_list(val)) user_r.push_back(parse_value(item, key).value);
    } else if (key == "user_azimuth") {
      for (const auto& item : split_list(val)) user_az.push_back(parse_angle_rad(parse_value(item, key), key));
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "' (line " + std::to_string(lineno) + ")");
    }
  }

  if (!user_r.empty() || !user_az.empty()) {
    if (user_r.size() != user_az.size())
      throw std::invalid_argument("config: user_r and user_azimuth must have equal lengths");
    cfg.user_positions.resize(user_r.size());
    for (size_t i = 0; i < user_r.size(); ++i)
      cfg.user_positions[i] = UserPosition{user_r[i], user_az[i]};
  }

  cfg.validate();
  return cfg;
}

}  // namespace isacee
