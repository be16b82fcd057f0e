// Copyright 2026 The saddle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "saddle/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "saddle/errors.hpp"

namespace saddle {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
  throw ValidationError(field + ": " + msg);
}

const json* find(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& obj, const char* key, const std::string& where, double fallback,
              bool positive = false, bool nonnegative = false) {
  const json* v = find(obj, key);
  const std::string f = where + "." + key;
  if (!v) return fallback;
  if (!v->is_number()) bad(f, "must be a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) bad(f, "must be finite");
  if (positive && !(x > 0.0)) bad(f, "must be positive");
  if (nonnegative && x < 0.0) bad(f, "must be nonnegative");
  return x;
}

int integer(const json& obj, const char* key, const std::string& where, int fallback, int min) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  const std::string f = where + "." + key;
  if (!v->is_number_integer()) bad(f, "must be an integer");
  const int x = v->get<int>();
  if (x < min) bad(f, "must be at least " + std::to_string(min));
  return x;
}

Vec vector_of(const json& v, const std::string& f, int dim) {
  if (!v.is_array()) bad(f, "expected a list");
  if (dim >= 0 && static_cast<int>(v.size()) != dim) bad(f, "expected " + std::to_string(dim) + " entries");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(f + "[" + std::to_string(i) + "]", "must be a number");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Vec optional_vector(const json& obj, const char* key, const std::string& where, int dim) {
  const json* v = find(obj, key);
  if (!v) return Vec();
  return vector_of(*v, where + "." + key, dim);
}

std::vector<Vec> vector_list(const json& obj, const char* key, const std::string& where, int dim) {
  std::vector<Vec> out;
  const json* v = find(obj, key);
  if (!v) return out;
  const std::string f = where + "." + key;
  if (!v->is_array()) bad(f, "expected a list of points");
  for (std::size_t i = 0; i < v->size(); ++i) out.push_back(vector_of((*v)[i], f + "[" + std::to_string(i) + "]", dim));
  return out;
}

const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  const json* v = find(root, key);
  if (!v) return empty;
  if (!v->is_object()) bad(key, "expected an object");
  return *v;
}

std::string string_of(const json& obj, const char* key, const std::string& where, const std::string& fallback,
                      std::initializer_list<const char*> allowed) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  const std::string f = where + "." + key;
  if (!v->is_string()) bad(f, "must be a string");
  const std::string s = v->get<std::string>();
  if (allowed.size() == 0) return s;
  std::string list;
  for (const char* a : allowed) {
    if (s == a) return s;
    list += std::string(list.empty() ? "" : ", ") + a;
  }
  bad(f, "must be one of " + list);
}

}  // namespace

RunConfig parse_config(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object at the top level");
  RunConfig c;
  c.raw = j;
  c.hash = hex64(fnv1a64(nlohmann::json(j).dump()));
  c.base_dir = base_dir;

  const json* m = find(j, "model");
  if (!m) bad("model", "is required");
  if (m->is_string()) {
    std::filesystem::path p(m->get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    std::ifstream in(p);
    if (!in) bad("model", "cannot open model file " + p.string());
    json mj;
    try {
      mj = json::parse(in);
    } catch (const json::parse_error& e) {
      bad("model", std::string("model file does not parse: ") + e.what());
    }
    c.model = model_from_json(mj, "model");
    c.model_json = mj;
  } else {
    c.model = model_from_json(*m, "model");
    c.model_json = *m;
  }
  const int d = c.model.dim();

  const json& sc = section(j, "scenario");
  c.epsilon = number(sc, "epsilon", "scenario", 0.1 * c.model.validity_radius(), true);
  if (c.epsilon >= c.model.validity_radius()) bad("scenario.epsilon", "must lie inside the validity radius");
  c.x_minus_prime = optional_vector(sc, "x_minus_prime", "scenario", d - 1);
  c.eta_box_halfwidth = number(sc, "eta_box_halfwidth", "scenario", 0.0, false, true);
  c.badset_tol = number(sc, "badset_tol", "scenario", 0.05, true);

  const json& sp = section(j, "spectral");
  c.C0 = number(sp, "C0", "spectral", 1.0, true);
  c.C1 = number(sp, "C1", "spectral", 1.0, true);
  c.nu = number(sp, "nu", "spectral", 0.1, true);

  const json& sw = section(j, "sweep");
  if (const json* hs = find(sw, "h")) {
    c.h_list.clear();
    if (!hs->is_array() || hs->empty()) bad("sweep.h", "must be a nonempty list");
    for (std::size_t i = 0; i < hs->size(); ++i) {
      const std::string f = "sweep.h[" + std::to_string(i) + "]";
      if (!(*hs)[i].is_number() || !((*hs)[i].get<double>() > 0.0)) bad(f, "must be a positive number");
      c.h_list.push_back((*hs)[i].get<double>());
    }
  }
  if (const json* zs = find(sw, "z")) {
    c.z_list.clear();
    if (!zs->is_array() || zs->empty()) bad("sweep.z", "must be a nonempty list");
    for (std::size_t i = 0; i < zs->size(); ++i)
      c.z_list.push_back(complex_from_json((*zs)[i], "sweep.z[" + std::to_string(i) + "]"));
  }
  c.z_in_units_of_h = string_of(sw, "z_scale", "sweep", "h", {"h", "absolute"}) == "h";

  const json& tol = section(j, "tolerances");
  c.flow_tol = number(tol, "flow", "tolerances", 1e-10, true);
  c.chart_tol = number(tol, "chart", "tolerances", 1e-8, true);
  c.oracle_tol = number(tol, "oracle", "tolerances", 1e-12, true);

  if (const json* o = find(j, "output")) {
    if (!o->is_string() || o->get<std::string>().empty()) bad("output", "must be a nonempty string");
    c.output_dir = o->get<std::string>();
  }
  if (const json* s = find(j, "seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
      bad("seed", "must be a nonnegative integer");
    c.seed = s->get<std::uint64_t>();
  }

  const json& lat = section(j, "lattice");
  c.lattice_bound = number(lat, "bound", "lattice", 0.0, false, true);

  const json& fl = section(j, "flow");
  c.flow_x0 = optional_vector(fl, "x0", "flow", d);
  c.flow_sign = integer(fl, "sign", "flow", -1, -1);
  if (c.flow_sign != -1 && c.flow_sign != 1) bad("flow.sign", "must be -1 or 1");
  c.flow_t_max = number(fl, "t_max", "flow", 0.0, false, true);
  c.flow_samples = integer(fl, "samples", "flow", 64, 8);
  c.flow_fit_degree = integer(fl, "fit_degree", "flow", 1, 0);

  const json& ph = section(j, "phase");
  c.phase_eta_prime = optional_vector(ph, "eta_prime", "phase", d - 1);
  c.phase_t_max = number(ph, "t_max", "phase", 0.0, false, true);
  c.phase_points = vector_list(ph, "points", "phase", d);

  const json& tr = section(j, "transition");
  c.targets = vector_list(tr, "targets", "transition", d);
  c.y_primes = vector_list(tr, "y_prime", "transition", d - 1);
  if (const json* a = find(tr, "apply_J")) {
    if (!a->is_boolean()) bad("transition.apply_J", "must be true or false");
    c.apply_j = a->get<bool>();
  }

  const json& ve = section(j, "verify");
  c.x_eval = number(ve, "x_eval", "verify", -0.8);
  c.resonance_count = integer(ve, "resonance_count", "verify", 5, 1);
  if (const json* mh = find(ve, "microlocal_h")) {
    c.microlocal_h.clear();
    if (!mh->is_array() || mh->size() < 2) bad("verify.microlocal_h", "needs at least two values");
    for (std::size_t i = 0; i < mh->size(); ++i) {
      if (!(*mh)[i].is_number() || !((*mh)[i].get<double>() > 0.0))
        bad("verify.microlocal_h[" + std::to_string(i) + "]", "must be a positive number");
      c.microlocal_h.push_back((*mh)[i].get<double>());
    }
  }
  c.tube = number(ve, "tube", "verify", 0.15, true);
  if (const json* b = find(ve, "microlocal")) {
    if (!b->is_boolean()) bad("verify.microlocal", "must be true or false");
    c.microlocal = b->get<bool>();
  }

  const json& fb = section(j, "fbi");
  c.fbi_state = string_of(fb, "state", "fbi", "coherent", {"coherent", "assembled"});
  c.fbi_h = number(fb, "h", "fbi", 0.05, true);
  c.fbi_x0 = optional_vector(fb, "x0", "fbi", d);
  c.fbi_xi0 = optional_vector(fb, "xi0", "fbi", d);
  c.fbi_x_half = number(fb, "x_half", "fbi", 1.0, true);
  c.fbi_window_half = number(fb, "window_half", "fbi", 0.5, true);
  c.fbi_xi_half = number(fb, "xi_half", "fbi", 1.5, true);
  if (d > 2) bad("fbi", "transforms are limited to d <= 2");
  if (const json* r = find(fb, "region")) {
    if (!r->is_object()) bad("fbi.region", "expected an object");
    c.region_kind = string_of(*r, "kind", "fbi.region", "ball", {"ball", "tube", "complement_tube", "everything"});
    c.region_center = optional_vector(*r, "center", "fbi.region", 2 * d);
    c.region_radius = number(*r, "radius", "fbi.region", 0.5, true);
    if (const json* t = find(*r, "thickness")) {
      if (!t->is_number() || !(t->get<double>() > 0.0)) bad("fbi.region.thickness", "must be positive");
      c.tube = t->get<double>();
    }
  }
  if (c.fbi_state == "assembled" && d != 1) bad("fbi.state", "assembled solutions exist only for d = 1");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: parse error: ") + e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(j, dir.empty() ? "." : dir.string());
}

std::vector<SweepPoint> RunConfig::sweep() const {
  std::vector<SweepPoint> out;
  for (double h : h_list)
    for (Complex z : z_list) out.push_back({z_in_units_of_h ? z * h : z, h});
  return out;
}

ScenarioOptions RunConfig::scenario_options() const {
  ScenarioOptions o;
  o.epsilon = epsilon;
  o.x_minus_prime = x_minus_prime;
  o.eta_box_halfwidth = eta_box_halfwidth;
  o.nu = nu;
  o.badset_tol = badset_tol;
  o.chart.tol = chart_tol;
  return o;
}

SpectralParams RunConfig::spectral_at(const SweepPoint& p) const {
  return spectral_params(p.z, p.h, C0, C1, nu, model.lambdas());
}

TransitionScenario RunConfig::build_scenario(const SweepPoint& p) const {
  return make_scenario(model, spectral_at(p), scenario_options());
}

}  // namespace saddle
