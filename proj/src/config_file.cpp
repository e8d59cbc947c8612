#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "aoc/errors.hpp"
#include "aoc/sweep.hpp"

namespace aoc {
namespace {

namespace pt = boost::property_tree;

std::string clean(std::string s) {
  auto trim = [](std::string& t) {
    auto b = t.find_first_not_of(" \t\r");
    auto e = t.find_last_not_of(" \t\r");
    t = b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
  };
  // drop trailing comments
  if (auto h = s.find('#'); h != std::string::npos) s.erase(h);
  trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto s = clean(text);
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("config: '" + key + "' expects a number, got '" + s + "'");
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  int v = 0;
  auto s = clean(text);
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("config: '" + key + "' expects an integer, got '" + s + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::string s = clean(text);
  for (char& c : s)
    if (c == '[' || c == ']' || c == ',' || c == '(' || c == ')') c = ' ';
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& text, F conv) {
  std::vector<T> out;
  for (const auto& tok : split_list(text)) out.push_back(conv(key, tok));
  if (out.empty()) throw ConfigError("config: '" + key + "' is an empty list");
  return out;
}

}  // namespace

SweepConfig parse_sweep_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  SweepConfig cfg;
  bool have_v0 = false;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      const std::string val = node.get_value<std::string>();
      if (section == "potential") {
        if (key == "family") cfg.potential.family = parse_family(clean(val));
        else if (key == "v0") cfg.potential.v0 = to_double(full, val), have_v0 = true;
        else if (key == "a") cfg.potential.a = to_double(full, val);
        else if (key == "sigma") cfg.potential.sigma = to_double(full, val);
        else if (key == "x") cfg.potential.table_x = to_list<double>(full, val, to_double);
        else if (key == "v") cfg.potential.table_v = to_list<double>(full, val, to_double);
        else throw ConfigError("config: unknown key '" + full + "'");
      } else if (section == "sweep") {
        if (key == "rho") cfg.rho = to_double(full, val);
        else if (key == "N" || key == "N_list") cfg.N_list = to_list<int>(full, val, to_int);
        else if (key == "fit_fraction") cfg.fit_fraction = to_double(full, val);
        else if (key == "workers") cfg.workers = to_int(full, val);
        else throw ConfigError("config: unknown key '" + full + "'");
      } else if (section == "grid") {
        if (key == "nodes_per_wavelength") cfg.grid.nodes_per_wavelength = to_int(full, val);
        else if (key == "nodes_per_panel") cfg.grid.nodes_per_panel = to_int(full, val);
        else if (key == "support_refinement") cfg.grid.support_refinement = to_int(full, val);
        else throw ConfigError("config: unknown key '" + full + "'");
      } else if (section == "tolerances") {
        if (key == "ode") cfg.tol.ode = to_double(full, val);
        else if (key == "root") cfg.tol.root = to_double(full, val);
        else if (key == "scattering") cfg.tol.scattering = to_double(full, val);
        else if (key == "contour") cfg.tol.contour = to_double(full, val);
        else throw ConfigError("config: unknown key '" + full + "'");
      } else if (section == "output") {
        if (key == "csv") cfg.csv_path = clean(val);
        else if (key == "json") cfg.json_path = clean(val);
        else throw ConfigError("config: unknown key '" + full + "'");
      } else {
        throw ConfigError("config: unknown section [" + section + "]");
      }
    }
  }
  if (cfg.potential.family != PotentialFamily::table && !have_v0)
    throw ConfigError("config: [potential] requires v0");
  return cfg;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_sweep_config(in);
}

}  // namespace aoc
