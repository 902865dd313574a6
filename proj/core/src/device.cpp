// Copyright 2026 The ftfsim Authors
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

#include "ftf/device.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ftf/errors.hpp"

namespace ftf {

using nlohmann::json;

double Node::flux() const {
  return is_fluxonium() ? fluxonium().flux_ext : coupler().flux_ext;
}

namespace {

void require_positive(const std::string& node, const char* field, double v) {
  if (!std::isfinite(v) || v <= 0.0)
    throw ValidationError("node '" + node + "': " + field + " must be positive and finite");
}

void require_probability(const std::string& what, double p) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw ValidationError(what + " must lie in [0, 1]");
}

void check_node(const Node& n) {
  if (n.name.empty()) throw ValidationError("node with empty name");
  if (n.is_fluxonium()) {
    const auto& p = n.fluxonium();
    require_positive(n.name, "e_c", p.e_c);
    require_positive(n.name, "e_j", p.e_j);
    require_positive(n.name, "e_l", p.e_l);
    if (!std::isfinite(p.flux_ext)) throw ValidationError("node '" + n.name + "': flux_ext not finite");
    if (p.t1 && !(*p.t1 > 0)) throw ValidationError("node '" + n.name + "': t1 must be positive");
    if (p.t2_echo && !(*p.t2_echo > 0)) throw ValidationError("node '" + n.name + "': t2_echo must be positive");
  } else {
    const auto& p = n.coupler();
    require_positive(n.name, "e_c", p.e_c);
    require_positive(n.name, "e_j1", p.e_j1);
    require_positive(n.name, "e_j2", p.e_j2);
    if (!std::isfinite(p.flux_ext)) throw ValidationError("node '" + n.name + "': flux_ext not finite");
  }
}

template <class T>
T get_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": key '" + key + "' has the wrong type");
  }
}

template <class T>
std::optional<T> opt_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get_field<T>(obj, key, where);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ParseError(where + ": unknown key '" + k + "'");
}

}  // namespace

DeviceConfig::DeviceConfig(std::vector<Node> nodes,
                           const std::vector<std::tuple<std::string, std::string, double>>& couplings,
                           std::vector<ReadoutParams> readout, std::optional<GateNoiseParams> gate_noise)
    : nodes_(std::move(nodes)), readout_(std::move(readout)), gate_noise_(gate_noise) {
  std::set<std::string> names;
  for (const auto& n : nodes_) {
    check_node(n);
    if (!names.insert(n.name).second) throw ValidationError("duplicate node name '" + n.name + "'");
  }
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  j_ = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(n, n);
  for (const auto& [a, b, j] : couplings) {
    if (!has_node(a)) throw ValidationError("coupling references unknown node '" + a + "'");
    if (!has_node(b)) throw ValidationError("coupling references unknown node '" + b + "'");
    if (a == b) throw ValidationError("self-coupling on node '" + a + "'");
    if (!std::isfinite(j)) throw ValidationError("coupling " + a + "-" + b + " not finite");
    const auto ia = static_cast<Eigen::Index>(index_of(a));
    const auto ib = static_cast<Eigen::Index>(index_of(b));
    if (seen(ia, ib) && j_(ia, ib) != j)
      throw ValidationError("asymmetric coupling between '" + a + "' and '" + b + "'");
    j_(ia, ib) = j_(ib, ia) = j;
    seen(ia, ib) = seen(ib, ia) = 1;
  }
  for (const auto& r : readout_) {
    if (!has_node(r.qubit)) throw ValidationError("readout references unknown node '" + r.qubit + "'");
    require_probability("readout p_ge of " + r.qubit, r.p_ge);
    require_probability("readout p_eg of " + r.qubit, r.p_eg);
  }
  if (gate_noise_) {
    require_probability("gate_noise.single_qubit", gate_noise_->single_qubit);
    require_probability("gate_noise.cz", gate_noise_->cz);
    require_probability("gate_noise.init_excited", gate_noise_->init_excited);
  }
}

const Node& DeviceConfig::node(const std::string& name) const { return nodes_.at(index_of(name)); }

std::size_t DeviceConfig::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].name == name) return i;
  throw ValidationError("unknown node '" + name + "'");
}

bool DeviceConfig::has_node(const std::string& name) const {
  for (const auto& n : nodes_)
    if (n.name == name) return true;
  return false;
}

double DeviceConfig::coupling(const std::string& a, const std::string& b) const {
  return j_(static_cast<Eigen::Index>(index_of(a)), static_cast<Eigen::Index>(index_of(b)));
}

DeviceConfig DeviceConfig::with_flux(const FluxPoint& flux) const {
  DeviceConfig out = *this;
  for (const auto& [name, value] : flux) {
    if (!std::isfinite(value)) throw ValidationError("flux for '" + name + "' not finite");
    auto& n = out.nodes_.at(index_of(name));
    std::visit([v = value](auto& p) { p.flux_ext = v; }, n.params);
  }
  return out;
}

DeviceConfig DeviceConfig::with_coupling_scale(double s) const {
  DeviceConfig out = *this;
  out.j_ *= s;
  return out;
}

DeviceConfig DeviceConfig::with_coupling(const std::string& a, const std::string& b, double j) const {
  if (a == b) throw ValidationError("self-coupling on node '" + a + "'");
  DeviceConfig out = *this;
  const auto ia = static_cast<Eigen::Index>(index_of(a));
  const auto ib = static_cast<Eigen::Index>(index_of(b));
  out.j_(ia, ib) = out.j_(ib, ia) = j;
  return out;
}

FluxPoint DeviceConfig::flux_point() const {
  FluxPoint fp;
  for (const auto& n : nodes_) fp[n.name] = n.flux();
  return fp;
}

bool DeviceConfig::operator==(const DeviceConfig& o) const {
  return nodes_ == o.nodes_ && j_ == o.j_ && readout_ == o.readout_ && gate_noise_ == o.gate_noise_;
}

DeviceConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ParseError("config: top level must be an object");
  reject_unknown(doc, {"nodes", "couplings", "readout", "gate_noise", "description"}, "config");
  if (!doc.contains("nodes") || !doc.at("nodes").is_array()) throw ParseError("config: 'nodes' must be a list");

  std::vector<Node> nodes;
  for (std::size_t i = 0; i < doc.at("nodes").size(); ++i) {
    const json& jn = doc.at("nodes")[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!jn.is_object()) throw ParseError(where + ": must be an object");
    Node n;
    n.name = get_field<std::string>(jn, "name", where);
    const auto kind = get_field<std::string>(jn, "kind", where);
    if (kind == "fluxonium") {
      reject_unknown(jn, {"name", "kind", "e_c", "e_j", "e_l", "flux_ext", "t1", "t2_echo"}, where);
      FluxoniumParams p;
      p.e_c = get_field<double>(jn, "e_c", where);
      p.e_j = get_field<double>(jn, "e_j", where);
      p.e_l = get_field<double>(jn, "e_l", where);
      p.flux_ext = opt_field<double>(jn, "flux_ext", where).value_or(0.5);
      p.t1 = opt_field<double>(jn, "t1", where);
      p.t2_echo = opt_field<double>(jn, "t2_echo", where);
      n.params = p;
    } else if (kind == "transmon_coupler") {
      reject_unknown(jn, {"name", "kind", "e_c", "e_j1", "e_j2", "flux_ext"}, where);
      TransmonCouplerParams p;
      p.e_c = get_field<double>(jn, "e_c", where);
      p.e_j1 = get_field<double>(jn, "e_j1", where);
      p.e_j2 = get_field<double>(jn, "e_j2", where);
      p.flux_ext = opt_field<double>(jn, "flux_ext", where).value_or(0.0);
      n.params = p;
    } else {
      throw ParseError(where + ": unknown kind '" + kind + "' (expected fluxonium or transmon_coupler)");
    }
    nodes.push_back(std::move(n));
  }

  std::vector<std::tuple<std::string, std::string, double>> couplings;
  if (doc.contains("couplings")) {
    if (!doc.at("couplings").is_array()) throw ParseError("config: 'couplings' must be a list");
    for (std::size_t i = 0; i < doc.at("couplings").size(); ++i) {
      const json& jc = doc.at("couplings")[i];
      const std::string where = "couplings[" + std::to_string(i) + "]";
      if (!jc.is_object()) throw ParseError(where + ": must be an object");
      reject_unknown(jc, {"a", "b", "j"}, where);
      couplings.emplace_back(get_field<std::string>(jc, "a", where), get_field<std::string>(jc, "b", where),
                             get_field<double>(jc, "j", where));
    }
  }

  std::vector<ReadoutParams> readout;
  if (doc.contains("readout")) {
    if (!doc.at("readout").is_array()) throw ParseError("config: 'readout' must be a list");
    for (std::size_t i = 0; i < doc.at("readout").size(); ++i) {
      const json& jr = doc.at("readout")[i];
      const std::string where = "readout[" + std::to_string(i) + "]";
      if (!jr.is_object()) throw ParseError(where + ": must be an object");
      reject_unknown(jr, {"qubit", "p_ge", "p_eg"}, where);
      readout.push_back({get_field<std::string>(jr, "qubit", where), get_field<double>(jr, "p_ge", where),
                         get_field<double>(jr, "p_eg", where)});
    }
  }

  std::optional<GateNoiseParams> noise;
  if (doc.contains("gate_noise")) {
    const json& jg = doc.at("gate_noise");
    if (!jg.is_object()) throw ParseError("config: 'gate_noise' must be an object");
    reject_unknown(jg, {"single_qubit", "cz", "init_excited"}, "gate_noise");
    GateNoiseParams g;
    g.single_qubit = opt_field<double>(jg, "single_qubit", "gate_noise").value_or(0.0);
    g.cz = opt_field<double>(jg, "cz", "gate_noise").value_or(0.0);
    g.init_excited = opt_field<double>(jg, "init_excited", "gate_noise").value_or(0.0);
    noise = g;
  }
  return DeviceConfig(std::move(nodes), couplings, std::move(readout), noise);
}

DeviceConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

DeviceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const DeviceConfig& config) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& n : config.nodes()) {
    json jn;
    jn["name"] = n.name;
    if (n.is_fluxonium()) {
      const auto& p = n.fluxonium();
      jn["kind"] = "fluxonium";
      jn["e_c"] = p.e_c;
      jn["e_j"] = p.e_j;
      jn["e_l"] = p.e_l;
      jn["flux_ext"] = p.flux_ext;
      if (p.t1) jn["t1"] = *p.t1;
      if (p.t2_echo) jn["t2_echo"] = *p.t2_echo;
    } else {
      const auto& p = n.coupler();
      jn["kind"] = "transmon_coupler";
      jn["e_c"] = p.e_c;
      jn["e_j1"] = p.e_j1;
      jn["e_j2"] = p.e_j2;
      jn["flux_ext"] = p.flux_ext;
    }
    doc["nodes"].push_back(jn);
  }
  doc["couplings"] = json::array();
  const auto& j = config.coupling_matrix();
  for (Eigen::Index a = 0; a < j.rows(); ++a)
    for (Eigen::Index b = a + 1; b < j.cols(); ++b)
      if (j(a, b) != 0.0)
        doc["couplings"].push_back({{"a", config.nodes()[a].name}, {"b", config.nodes()[b].name}, {"j", j(a, b)}});
  if (!config.readout().empty()) {
    doc["readout"] = json::array();
    for (const auto& r : config.readout())
      doc["readout"].push_back({{"qubit", r.qubit}, {"p_ge", r.p_ge}, {"p_eg", r.p_eg}});
  }
  if (config.gate_noise()) {
    const auto& g = *config.gate_noise();
    doc["gate_noise"] = {{"single_qubit", g.single_qubit}, {"cz", g.cz}, {"init_excited", g.init_excited}};
  }
  return doc;
}

std::string serialize(const DeviceConfig& config) { return to_json(config).dump(2) + "\n"; }

std::vector<std::string> validate(const DeviceConfig& config) {
  std::vector<std::string> w;
  auto band = [&w](const std::string& node, const char* what, double v, double lo, double hi) {
    if (v < lo || v > hi) {
      std::ostringstream os;
      os << node << ": " << what << " outside design band [" << lo << ", " << hi << "] (value " << v << ")";
      w.push_back(os.str());
    }
  };
  for (const auto& n : config.nodes()) {
    if (n.is_fluxonium()) {
      const auto& p = n.fluxonium();
      band(n.name, "E_L", p.e_l, 0.55, 0.7);
      band(n.name, "E_C", p.e_c, 1.0, 1.3);
      band(n.name, "E_J", p.e_j, 4.0, 5.0);
      if (p.e_j <= p.e_l) w.push_back(n.name + ": E_J <= E_L, outside the fluxonium regime");
    } else {
      const auto& p = n.coupler();
      const double lo = std::min(p.e_j1, p.e_j2), hi = std::max(p.e_j1, p.e_j2);
      if (p.e_j1 == p.e_j2) w.push_back(n.name + ": symmetric junctions: no tunability asymmetry");
      band(n.name, "E_J1", lo, 16.5, 17.0);
      band(n.name, "E_J2", hi, 28.0, 28.5);
      band(n.name, "E_C", p.e_c, 0.21, 0.23);
    }
  }
  return w;
}

}  // namespace ftf
