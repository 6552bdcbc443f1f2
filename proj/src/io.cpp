// SPDX-License-Identifier: Apache-2.0
#include "mxisac/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mxisac/error.hpp"

namespace mxisac {

using nlohmann::json;

namespace {

double deg2rad(double d) { return d * kPi / 180.0; }
double rad2deg(double r) { return r * 180.0 / kPi; }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw Error(ErrorKind::configuration, where + it.key() + ": unknown key");
}

template <typename T>
void read_key(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::parse, where + key + ": wrong type");
  }
}

PolarPoint read_point(const json& j, PolarPoint p, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::parse, where + ": expected an object");
  double theta_deg = rad2deg(p.theta);
  read_key(j, "r_m", p.r, where + ".");
  read_key(j, "theta_deg", theta_deg, where + ".");
  p.theta = deg2rad(theta_deg);
  return p;
}

SensingObject read_object(const json& j, SensingObject o, const std::string& where) {
  reject_unknown(j, {"r_m", "theta_deg", "alpha"}, where + ".");
  o.location = read_point(j, o.location, where);
  read_key(j, "alpha", o.alpha, where + ".");
  return o;
}

json point_json(const PolarPoint& p) { return {{"r_m", p.r}, {"theta_deg", rad2deg(p.theta)}}; }

json object_json(const SensingObject& o) {
  json j = point_json(o.location);
  j["alpha"] = o.alpha;
  return j;
}

json complex_json(cd v) { return json::array({v.real(), v.imag()}); }

json matrix_json(const CMatrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(complex_json(a(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

}  // namespace

ScenarioConfig config_from_json_text(const std::string& text, bool desk_scale) {
  json j = json::object();
  bool blank = true;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
  if (!blank) {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::parse, std::string("config: ") + e.what());
    }
  }
  if (!j.is_object()) throw Error(ErrorKind::parse, "config: top level must be an object");
  reject_unknown(j,
                 {"desk_scale", "frequency_ghz", "K", "M", "spacing_factor", "D0_m", "layout", "Nc", "Np", "user",
                  "target", "interferers", "scatterers", "path_gain_ref", "nlos_extra_loss_db", "noise_comm_dbm",
                  "noise_sens_dbm", "scnr_threshold_db", "Ns", "rf_per_subarray", "snapshots_L", "seed"},
                 "");
  read_key(j, "desk_scale", desk_scale, "");
  ScenarioConfig c = desk_scale ? desk_defaults() : full_scale_defaults();

  double f_ghz = c.carrier_frequency / 1e9;
  read_key(j, "frequency_ghz", f_ghz, "");
  c.carrier_frequency = f_ghz * 1e9;
  read_key(j, "K", c.K, "");
  read_key(j, "M", c.M, "");
  read_key(j, "spacing_factor", c.spacing_factor, "");
  read_key(j, "D0_m", c.D0, "");
  if (j.contains("layout")) {
    std::string s;
    read_key(j, "layout", s, "");
    c.layout = layout_from_string(s);
  }
  read_key(j, "Nc", c.Nc, "");
  read_key(j, "Np", c.Np, "");
  if (j.contains("user")) {
    reject_unknown(j["user"], {"r_m", "theta_deg"}, "user.");
    c.user = read_point(j["user"], c.user, "user");
  }
  if (j.contains("target")) c.target = read_object(j["target"], c.target, "target");
  if (j.contains("interferers")) {
    if (!j["interferers"].is_array()) throw Error(ErrorKind::parse, "interferers: expected an array");
    std::vector<SensingObject> list;
    const SensingObject proto{{30.0, 0.0}, c.target.alpha};
    for (std::size_t i = 0; i < j["interferers"].size(); ++i)
      list.push_back(read_object(j["interferers"][i], proto, "interferers[" + std::to_string(i) + "]"));
    c.interferers = list;
  }
  if (j.contains("scatterers")) {
    const json& s = j["scatterers"];
    reject_unknown(s, {"r_min_m", "r_max_m", "theta_min_deg", "theta_max_deg"}, "scatterers.");
    double tmin = rad2deg(c.scatterers.theta_min), tmax = rad2deg(c.scatterers.theta_max);
    read_key(s, "r_min_m", c.scatterers.r_min, "scatterers.");
    read_key(s, "r_max_m", c.scatterers.r_max, "scatterers.");
    read_key(s, "theta_min_deg", tmin, "scatterers.");
    read_key(s, "theta_max_deg", tmax, "scatterers.");
    c.scatterers.theta_min = deg2rad(tmin);
    c.scatterers.theta_max = deg2rad(tmax);
  }
  read_key(j, "path_gain_ref", c.path_gain_ref, "");
  read_key(j, "nlos_extra_loss_db", c.nlos_extra_loss_db, "");
  if (j.contains("noise_comm_dbm")) {
    double v = 0;
    read_key(j, "noise_comm_dbm", v, "");
    c.sigma_c_sq = dbm_to_watts(v);
  }
  if (j.contains("noise_sens_dbm")) {
    double v = 0;
    read_key(j, "noise_sens_dbm", v, "");
    c.sigma_s_sq = dbm_to_watts(v);
  }
  if (j.contains("scnr_threshold_db")) {
    const json& v = j["scnr_threshold_db"];
    // null selects Gamma_s = 0 (no sensing constraint).
    if (v.is_null()) {
      c.scnr_threshold = 0.0;
    } else {
      double db = 0;
      read_key(j, "scnr_threshold_db", db, "");
      c.scnr_threshold = db_to_linear(db);
    }
  }
  read_key(j, "Ns", c.Ns, "");
  read_key(j, "rf_per_subarray", c.rf_per_subarray, "");
  read_key(j, "snapshots_L", c.snapshots_L, "");
  read_key(j, "seed", c.seed, "");
  c.validate();
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

ScenarioConfig load_config(const std::string& path, bool desk_scale) {
  return config_from_json_text(read_file(path), desk_scale);
}

std::string config_to_json_text(const ScenarioConfig& c) {
  json j;
  j["frequency_ghz"] = c.carrier_frequency / 1e9;
  j["K"] = c.K;
  j["M"] = c.M;
  j["spacing_factor"] = c.spacing_factor;
  j["D0_m"] = c.D0;
  j["layout"] = to_string(c.layout);
  j["Nc"] = c.Nc;
  j["Np"] = c.Np;
  j["user"] = point_json(c.user);
  j["target"] = object_json(c.target);
  j["interferers"] = json::array();
  for (const auto& o : c.interferers) j["interferers"].push_back(object_json(o));
  j["scatterers"] = {{"r_min_m", c.scatterers.r_min},
                     {"r_max_m", c.scatterers.r_max},
                     {"theta_min_deg", rad2deg(c.scatterers.theta_min)},
                     {"theta_max_deg", rad2deg(c.scatterers.theta_max)}};
  j["path_gain_ref"] = c.path_gain_ref;
  j["nlos_extra_loss_db"] = c.nlos_extra_loss_db;
  j["noise_comm_dbm"] = watts_to_dbm(c.sigma_c_sq);
  j["noise_sens_dbm"] = watts_to_dbm(c.sigma_s_sq);
  j["scnr_threshold_db"] = c.scnr_threshold > 0.0 ? json(linear_to_db(c.scnr_threshold)) : json(nullptr);
  j["Ns"] = c.Ns;
  j["rf_per_subarray"] = c.rf_per_subarray;
  j["snapshots_L"] = c.snapshots_L;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string channel_dump_json(const CommChannel& comm, const SensingResponses& responses) {
  json j;
  j["H"] = matrix_json(comm.H());
  j["paths"] = json::array();
  for (const auto& p : comm.paths()) {
    json pj;
    pj["kind"] = p.kind == PathKind::los ? "los" : "nlos";
    if (p.scatterer) pj["scatterer"] = point_json(*p.scatterer);
    pj["gain_magnitude"] = p.gain_magnitude;
    pj["distance_m"] = p.distance;
    pj["aod_rad"] = p.aod;
    pj["aoa_rad"] = p.aoa;
    j["paths"].push_back(pj);
  }
  j["objects"] = json::array();
  for (const auto& o : responses.objects)
    j["objects"].push_back({{"g_t", vector_json(o.g_t)},
                            {"g_r", vector_json(o.g_r)},
                            {"nu_t", vector_json(o.nu_t)},
                            {"nu_r", vector_json(o.nu_r)},
                            {"phi_t_rad", o.phi_t},
                            {"phi_r_rad", o.phi_r}});
  return j.dump() + "\n";
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string s = "iter,f,grad_norm_V,grad_norm_b,step_V,step_b\n";
  for (const auto& r : trace)
    s += std::to_string(r.iter) + "," + fmt_num(r.f) + "," + fmt_num(r.grad_norm_V) + "," + fmt_num(r.grad_norm_b) +
         "," + fmt_num(r.step_V) + "," + fmt_num(r.step_b) + "\n";
  return s;
}

std::string spectrum_csv(const MusicResult& r) {
  std::string s = "x,y,value\n";
  for (int j = 0; j < r.spectrum.rows(); ++j)
    for (int i = 0; i < r.spectrum.cols(); ++i)
      s += fmt_num(r.grid.x(i)) + "," + fmt_num(r.grid.y(j)) + "," + fmt_num(r.spectrum(j, i)) + "\n";
  return s;
}

void write_spectrum_binary(const std::string& path, const MusicResult& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  const std::int64_t nx = r.spectrum.cols(), ny = r.spectrum.rows();
  const double hdr[4] = {r.grid.x0, r.grid.y0, r.grid.dx, r.grid.dy};
  out.write(reinterpret_cast<const char*>(&nx), sizeof nx);
  out.write(reinterpret_cast<const char*>(&ny), sizeof ny);
  out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i) {
      const double v = r.spectrum(j, i);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

MusicResult read_spectrum_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::int64_t nx = 0, ny = 0;
  double hdr[4];
  in.read(reinterpret_cast<char*>(&nx), sizeof nx);
  in.read(reinterpret_cast<char*>(&ny), sizeof ny);
  in.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  if (!in || nx < 1 || ny < 1) throw Error(ErrorKind::parse, "bad spectrum header in '" + path + "'");
  MusicResult r;
  r.grid = {hdr[0], hdr[2], hdr[0] + (nx - 1) * hdr[2], hdr[1], hdr[3], hdr[1] + (ny - 1) * hdr[3]};
  r.spectrum.resize(ny, nx);
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i) in.read(reinterpret_cast<char*>(&r.spectrum(j, i)), sizeof(double));
  if (!in) throw Error(ErrorKind::parse, "truncated spectrum data in '" + path + "'");
  return r;
}

}  // namespace mxisac
