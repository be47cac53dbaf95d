#include "sbopt/casestudies.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace sbopt {

namespace {

using nlohmann::json;

// Reads known keys of one JSON object into fields; unknown keys are errors.
class Reader {
public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object())
      throw ConfigError(path_ + ": expected an object");
  }
  ~Reader() = default;

  Reader& num(const char* key, double& out) {
    seen_.insert(key);
    if (auto it = obj_.find(key); it != obj_.end()) {
      if (!it->is_number())
        throw ConfigError(path_ + "." + key + ": expected a number");
      out = it->get<double>();
    }
    return *this;
  }

  template <std::size_t N>
  Reader& array(const char* key, std::array<double, N>& out) {
    seen_.insert(key);
    if (auto it = obj_.find(key); it != obj_.end()) {
      if (!it->is_array() || it->size() != N)
        throw ConfigError(path_ + "." + key + ": expected an array of " + std::to_string(N) + " numbers");
      for (std::size_t i = 0; i < N; ++i) {
        if (!(*it)[i].is_number())
          throw ConfigError(path_ + "." + key + ": expected numbers");
        out[i] = (*it)[i].get<double>();
      }
    }
    return *this;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key))
        throw ConfigError(path_ + ": unknown key '" + key + "'");
  }

private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_cstr(const json& j, CstrSetup& s) {
  Reader r(j, "cstr");
  if (const json* p = r.child("params")) {
    Reader rp(*p, r.path("params"));
    rp.num("V", s.params.V).num("rho", s.params.rho).num("Cp", s.params.Cp).num("UA", s.params.UA);
    rp.num("Tf", s.params.Tf).num("CAf", s.params.CAf).num("dH_AB", s.params.dH_AB).num("dH_BC", s.params.dH_BC);
    rp.num("E_AB", s.params.E_AB).num("E_BC", s.params.E_BC).num("k0_AB", s.params.k0_AB);
    rp.num("k0_BC", s.params.k0_BC).num("R", s.params.R);
    rp.finish();
  }
  if (const json* p = r.child("initial_state")) {
    Reader ri(*p, r.path("initial_state"));
    ri.num("CA", s.initial.CA).num("CB", s.initial.CB).num("T", s.initial.T);
    ri.finish();
  }
  if (const json* p = r.child("actuators")) {
    Reader ra(*p, r.path("actuators"));
    ra.num("F_min", s.limits.F_min).num("F_max", s.limits.F_max);
    ra.num("Tc_min", s.limits.Tc_min).num("Tc_max", s.limits.Tc_max);
    ra.finish();
  }
  if (const json* p = r.child("nominal_controls")) {
    Reader rn(*p, r.path("nominal_controls"));
    rn.num("F_in", s.nominal_controls.F_in).num("T_c", s.nominal_controls.T_c);
    rn.finish();
  }
  r.array("setpoints", s.setpoints);
  r.num("segment_duration", s.segment_duration).num("control_interval", s.control_interval).num("dt", s.dt);
  r.num("lambda_u", s.lambda_u).num("failure_penalty", s.failure_penalty).num("noise_sigma", s.noise_sigma);
  r.array("theta_lower", s.theta_lower).array("theta_upper", s.theta_upper);
  r.finish();
}

void read_wo(const json& j, WoParams& p) {
  Reader r(j, "williams_otto");
  r.array("k0", p.k0).array("activation_temperature", p.activation_temperature);
  r.num("mass", p.mass).num("M_A_in", p.M_A_in);
  r.num("price_P", p.price_P).num("price_E", p.price_E).num("cost_A", p.cost_A).num("cost_B", p.cost_B);
  r.num("w_A_max", p.w_A_max).num("w_G_max", p.w_G_max);
  r.num("T_min", p.T_min).num("T_max", p.T_max).num("M_B_min", p.M_B_min).num("M_B_max", p.M_B_max);
  r.num("failure_penalty", p.failure_penalty);
  r.finish();
}

} // namespace

CaseStudyConfig load_casestudy_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open case-study config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json root;
  try {
    root = json::parse(buffer.str(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("case-study config '" + path + "': " + e.what());
  }
  CaseStudyConfig cfg;
  Reader r(root, path);
  if (const json* c = r.child("cstr"))
    read_cstr(*c, cfg.cstr);
  if (const json* w = r.child("williams_otto"))
    read_wo(*w, cfg.williams_otto);
  r.finish();
  return cfg;
}

} // namespace sbopt
