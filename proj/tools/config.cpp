#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qdmag/boxchannel.hpp"
#include "qdmag/optimizer.hpp"

namespace qdmag::cli {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

template <typename Int>
Int parse_int(const std::string& text) {
  Int v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw std::invalid_argument("not an integer: '" + text + "'");
  return v;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse(trim(item)));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

template <typename T, typename Format>
std::string format_list(const std::vector<T>& values, Format format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + format(values[i]);
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void check_dots(int n) {
  require(n >= 1 && n <= kMaxDots, "N out of supported range [1," + std::to_string(kMaxDots) + "]");
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Ordered by section then key, which is also the serialization order.
const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> table = [] {
    std::vector<std::pair<std::string, Key>> k;
    auto real = [&](std::string name, auto member, auto check) {
      k.push_back({std::move(name), Key{[member, check](RunConfig& c, const std::string& v) {
                                          const double x = parse_double(v);
                                          check(x);
                                          member(c) = x;
                                        },
                                        [member](const RunConfig& c) {
                                          return format_double(member(c));
                                        }}});
    };
    auto integer = [&](std::string name, auto member, auto check) {
      k.push_back({std::move(name), Key{[member, check](RunConfig& c, const std::string& v) {
                                          const int x = parse_int<int>(v);
                                          check(x);
                                          member(c) = x;
                                        },
                                        [member](const RunConfig& c) {
                                          return std::to_string(member(c));
                                        }}});
    };
    auto positive = [](double x) { require(x > 0.0, "must be > 0"); };
    auto any = [](double) {};

    integer("dots", [](auto& c) -> auto& { return c.dots; }, check_dots);

    real("material.A_total_ueV", [](auto& c) -> auto& { return c.material.A_total_ueV; }, positive);
    real("material.n_phys", [](auto& c) -> auto& { return c.material.n_phys; }, positive);
    real("material.g_factor", [](auto& c) -> auto& { return c.material.g_factor; },
         [](double x) { require(x != 0.0, "must be nonzero"); });
    real("material.bath_spin_s", [](auto& c) -> auto& { return c.material.bath_spin_s; },
         [](double x) {
           require(x > 0.0, "must be > 0");
           (void)HalfInt::from_double(x);
         });

    integer("sim.n_bath", [](auto& c) -> auto& { return c.sim.n_bath; },
            [](int x) { require(x >= 1 && x <= kMaxBathSize, "must lie in [1, 200]"); });
    k.push_back({"sim.alpha_mode",
                 Key{[](RunConfig& c, const std::string& v) { c.sim.alpha_mode = alpha_mode_from_string(v); },
                     [](const RunConfig& c) { return to_string(c.sim.alpha_mode); }}});
    integer("sim.quad_nodes", [](auto& c) -> auto& { return c.sim.quad_nodes; },
            [](int x) { require(x >= 2, "must be >= 2"); });
    k.push_back({"sim.restarts", Key{[](RunConfig& c, const std::string& v) {
                                       if (v == "auto") {
                                         c.sim.restarts = 0;
                                         return;
                                       }
                                       const int x = parse_int<int>(v);
                                       require(x >= 1, "must be >= 1 or auto");
                                       c.sim.restarts = x;
                                     },
                                     [](const RunConfig& c) {
                                       return c.sim.restarts == 0 ? std::string("auto")
                                                                  : std::to_string(c.sim.restarts);
                                     }}});
    k.push_back({"sim.seed", Key{[](RunConfig& c, const std::string& v) { c.sim.seed = parse_int<std::uint64_t>(v); },
                                 [](const RunConfig& c) { return std::to_string(c.sim.seed); }}});
    real("sim.tol", [](auto& c) -> auto& { return c.sim.tol; }, positive);
    integer("sim.max_iter", [](auto& c) -> auto& { return c.sim.max_iter; },
            [](int x) { require(x >= 1, "must be >= 1"); });

    real("prior.B0_mT", [](auto& c) -> auto& { return c.prior.B0_mT; }, any);
    real("prior.dB_mT", [](auto& c) -> auto& { return c.prior.dB_mT; }, positive);

    real("sweep.t_start_ns", [](auto& c) -> auto& { return c.sweep.t_start_ns; },
         [](double x) { require(x >= 0.0, "must be >= 0"); });
    real("sweep.t_end_ns", [](auto& c) -> auto& { return c.sweep.t_end_ns; }, positive);
    integer("sweep.points", [](auto& c) -> auto& { return c.sweep.points; },
            [](int x) { require(x >= 2, "must be >= 2"); });
    k.push_back({"sweep.spacing", Key{[](RunConfig& c, const std::string& v) {
                                        require(v == "log" || v == "linear", "must be log or linear");
                                        c.sweep.log_spacing = v == "log";
                                      },
                                      [](const RunConfig& c) {
                                        return std::string(c.sweep.log_spacing ? "log" : "linear");
                                      }}});

    real("transitions.theta0", [](auto& c) -> auto& { return c.transitions.theta0; }, positive);
    real("transitions.theta1", [](auto& c) -> auto& { return c.transitions.theta1; }, positive);
    real("transitions.overlap", [](auto& c) -> auto& { return c.transitions.overlap; },
         [](double x) { require(x > 0.0 && x < 1.0, "must lie in (0, 1)"); });
    real("transitions.bracket_rel", [](auto& c) -> auto& { return c.transitions.bracket_rel; },
         positive);

    k.push_back({"scan.dots_list", Key{[](RunConfig& c, const std::string& v) {
                                         auto list = parse_list<int>(v, parse_int<int>);
                                         for (int n : list) check_dots(n);
                                         c.scan.dots_list = list;
                                       },
                                       [](const RunConfig& c) {
                                         return format_list(c.scan.dots_list, [](int n) { return std::to_string(n); });
                                       }}});
    k.push_back({"scan.B0_mT_list", Key{[](RunConfig& c, const std::string& v) {
                                          c.scan.B0_mT_list = parse_list<double>(v, parse_double);
                                        },
                                        [](const RunConfig& c) { return format_list(c.scan.B0_mT_list, format_double); }}});
    k.push_back({"scan.dB_mT_list", Key{[](RunConfig& c, const std::string& v) {
                                          auto list = parse_list<double>(v, parse_double);
                                          for (double x : list) require(x > 0.0, "must be > 0");
                                          c.scan.dB_mT_list = list;
                                        },
                                        [](const RunConfig& c) { return format_list(c.scan.dB_mT_list, format_double); }}});
    integer("scan.product_samples", [](auto& c) -> auto& { return c.scan.product_samples; },
            [](int x) { require(x >= 1, "must be >= 1"); });

    k.push_back({"channel.B_mT_list", Key{[](RunConfig& c, const std::string& v) {
                                            c.channel.B_mT_list = parse_list<double>(v, parse_double);
                                          },
                                          [](const RunConfig& c) {
                                            return format_list(c.channel.B_mT_list, format_double);
                                          }}});

    real("optimize.t_ns", [](auto& c) -> auto& { return c.optimize.t_ns; },
         [](double x) { require(x >= 0.0, "must be >= 0"); });
    return k;
  }();
  return table;
}

const Key* find_key(const std::string& name) {
  for (const auto& [n, k] : keys())
    if (n == name) return &k;
  return nullptr;
}

void check_cross(const RunConfig& c, const std::map<std::string, int>& lines) {
  auto line_of = [&](const std::string& key) {
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  if (!(c.sweep.t_end_ns > c.sweep.t_start_ns))
    throw ConfigError(std::max(line_of("sweep.t_end_ns"), line_of("sweep.t_start_ns")),
                      "sweep: t_end_ns must exceed t_start_ns");
  if (c.sweep.log_spacing && !(c.sweep.t_start_ns > 0.0))
    throw ConfigError(std::max(line_of("sweep.spacing"), line_of("sweep.t_start_ns")),
                      "sweep: log spacing needs t_start_ns > 0");
}

}  // namespace

ConfigError::ConfigError(int line_number, const std::string& message)
    : std::runtime_error(line_number > 0 ? "config line " + std::to_string(line_number) + ": " + message
                                         : "config: " + message),
      line(line_number) {}

int RunConfig::restarts_for(int n_dots) const {
  return sim.restarts > 0 ? sim.restarts : OptimizerConfig::default_restarts(n_dots);
}

Material RunConfig::to_material() const {
  Material m;
  m.A_total_ueV = material.A_total_ueV;
  m.n_phys = material.n_phys;
  m.g_factor = material.g_factor;
  m.bath_spin = HalfInt::from_double(material.bath_spin_s);
  return m;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::map<std::string, int> lines;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    std::string line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_number, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(line_number, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_number, "expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_number, "missing key");
    const std::string full = section.empty() ? key : section + "." + key;
    const Key* k = find_key(full);
    if (!k) throw ConfigError(line_number, "unknown key '" + full + "'");
    if (value.empty()) throw ConfigError(line_number, "missing value for '" + full + "'");
    if (lines.count(full)) throw ConfigError(line_number, "duplicate key '" + full + "'");
    try {
      k->set(config, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(line_number, full + ": " + e.what());
    }
    lines[full] = line_number;
  }
  check_cross(config, lines);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& [name, key] : keys()) {
    const auto dot = name.find('.');
    const std::string sec = dot == std::string::npos ? "" : name.substr(0, dot);
    const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
    }
    out += leaf + " = " + key.get(config) + "\n";
  }
  return out;
}

}  // namespace qdmag::cli
