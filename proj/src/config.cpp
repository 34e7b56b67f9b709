#include "crmsfem/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "crmsfem/error.hpp"

namespace crmsfem {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return domain == o.domain && perforations == o.perforations && diffusion == o.diffusion &&
         velocity == o.velocity && source == o.source && boundary == o.boundary && method == o.method &&
         coarse == o.coarse && reference == o.reference && convergence == o.convergence && options == o.options &&
         output == o.output;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

std::string join(const std::vector<std::string>& t) {
  std::string out;
  for (const auto& s : t) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

struct Where {
  int line;
  std::string_view key;

  [[noreturn]] void fail(const std::string& what) const {
    std::string msg = std::string(key) + ": " + what;
    if (line > 0) msg = "line " + std::to_string(line) + ": " + msg;
    throw ConfigError(msg, line, std::string(key));
  }
};

double to_double(const std::string& s, const Where& w) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) w.fail("not a number: '" + s + "'");
  return v;
}

Index to_index(const std::string& s, const Where& w) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) w.fail("not an integer: '" + s + "'");
  return static_cast<Index>(v);
}

std::uint64_t to_seed(const std::string& s, const Where& w) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) w.fail("not a seed: '" + s + "'");
  return v;
}

void expect_count(const std::vector<std::string>& t, std::size_t lo, std::size_t hi, const Where& w) {
  if (t.size() < lo || t.size() > hi) w.fail("wrong number of fields in '" + join(t) + "'");
}

// Checks a value string against its grammar; returns it normalized.
std::string check_perforations(std::string_view value, const Where& w) {
  const auto t = tokens(value);
  if (t.empty()) w.fail("empty value");
  if (t[0] == "none") {
    expect_count(t, 1, 1, w);
  } else if (t[0] == "periodic") {
    if (t.size() != 4 && t.size() != 6) w.fail("expected 'periodic <nx> <ny> <eps> [<sx> <sy>]'");
    to_index(t[1], w), to_index(t[2], w), to_double(t[3], w);
    if (t.size() == 6) to_double(t[4], w), to_double(t[5], w);
  } else if (t[0] == "random") {
    if (t.size() != 4) w.fail("expected 'random <n> <eps> <seed>'");
    to_index(t[1], w), to_double(t[2], w), to_seed(t[3], w);
  } else if (t[0] == "file") {
    if (t.size() != 2) w.fail("expected 'file <path>'");
  } else {
    w.fail("unknown layout '" + t[0] + "'");
  }
  return join(t);
}

std::string check_velocity(std::string_view value, const Where& w) {
  const auto t = tokens(value);
  if (t.empty()) w.fail("empty value");
  if (t[0] == "zero" || t[0] == "recirculating") {
    expect_count(t, 1, 1, w);
  } else if (t[0] == "const") {
    expect_count(t, 3, 3, w);
    to_double(t[1], w), to_double(t[2], w);
  } else {
    w.fail("unknown field '" + t[0] + "'");
  }
  return join(t);
}

std::string check_source(std::string_view value, const Where& w) {
  const auto t = tokens(value);
  if (t.empty()) w.fail("empty value");
  if (t[0] == "zero" || t[0] == "sinsin" || t[0] == "bands") {
    expect_count(t, 1, 1, w);
  } else if (t[0] == "const") {
    expect_count(t, 2, 2, w);
    to_double(t[1], w);
  } else {
    w.fail("unknown source '" + t[0] + "'");
  }
  return join(t);
}

std::string check_boundary(std::string_view value, const Where& w) {
  const auto t = tokens(value);
  if (t.empty()) w.fail("empty value");
  if (t[0] == "zero" || t[0] == "top_one") {
    expect_count(t, 1, 1, w);
  } else if (t[0] == "const") {
    expect_count(t, 2, 2, w);
    to_double(t[1], w);
  } else if (t[0] == "linear") {
    expect_count(t, 4, 4, w);
    to_double(t[1], w), to_double(t[2], w), to_double(t[3], w);
  } else {
    w.fail("unknown boundary data '" + t[0] + "'");
  }
  return join(t);
}

CoarseConfig parse_triple(const std::string& s, const Where& w) {
  CoarseConfig c;
  const auto x1 = s.find('x');
  const auto x2 = x1 == std::string::npos ? x1 : s.find('x', x1 + 1);
  if (x2 == std::string::npos) w.fail("expected NXxNYxm, got '" + s + "'");
  c.NX = to_index(s.substr(0, x1), w);
  c.NY = to_index(s.substr(x1 + 1, x2 - x1 - 1), w);
  c.m = to_index(s.substr(x2 + 1), w);
  return c;
}

std::string triple(const CoarseConfig& c) {
  return std::to_string(c.NX) + "x" + std::to_string(c.NY) + "x" + std::to_string(c.m);
}

std::vector<CoarseConfig> ladder(Index reference, std::initializer_list<Index> nxs) {
  std::vector<CoarseConfig> out;
  for (Index nx : nxs) out.push_back({nx, nx, reference / nx});
  return out;
}

struct PresetEntry {
  PresetInfo info;
  ExperimentConfig config;
};

std::vector<PresetEntry> build_presets() {
  std::vector<PresetEntry> out;
  const auto add = [&](std::string name, std::string description, ExperimentConfig c) {
    c.preset = name;
    out.push_back({{std::move(name), std::move(description)}, std::move(c)});
  };

  ExperimentConfig unit;
  unit.domain = Domain2D::unit_square();
  unit.diffusion = 1.0;
  unit.source = "sinsin";
  unit.reference = 1024;
  unit.coarse = {8, 8, 128};

  {
    ExperimentConfig c = unit;
    c.perforations = "periodic 32 32 0.021875";
    c.method = Method::LinearBubble;
    c.convergence = ladder(1024, {4, 8, 16, 32, 64});
    add("bubble-demo",
        "32x32 holes eps=0.021875 on [0,1]^2, A=1, f=sin(2 pi x)sin(2 pi y), nodal MsFEM with and without bubbles",
        c);
  }
  {
    ExperimentConfig c = unit;
    c.perforations = "periodic 32 32 0.025";
    c.convergence = {{8, 8, 128}};
    add("nonintersecting", "32x32 holes eps=0.025 on [0,1]^2 clear of the 8x8 coarse edges, A=1, sin-sin source", c);
  }
  {
    ExperimentConfig c = unit;
    c.perforations = "periodic 32 32 0.025 0.015625 0.015625";
    c.convergence = {{8, 8, 128}};
    add("intersecting",
        "32x32 holes eps=0.025 on [0,1]^2 shifted half a pitch onto every coarse edge, A=1, sin-sin source", c);
  }

  ExperimentConfig box;
  box.domain = Domain2D::centered_square();
  box.diffusion = 0.03;
  box.velocity = "recirculating";
  box.source = "bands";
  box.reference = 1024;
  box.coarse = {8, 8, 128};
  box.convergence = ladder(1024, {8, 16, 32, 64, 128});

  {
    ExperimentConfig c = box;
    // the intersecting unit-square layout mapped onto [-1,1]^2
    c.perforations = "periodic 32 32 0.05 0.03125 0.03125";
    c.convergence = {{8, 8, 128}};
    add("advdiff-periodic",
        "A=0.03, recirculating w=(2y(1-x^2),-2x(1-y^2)), banded source, the intersecting 32x32 layout scaled onto [-1,1]^2 (eps=0.05)",
        c);
  }
  {
    ExperimentConfig c = box;
    c.perforations = "random 400 0.025 1";
    add("nonperiodic-a", "400 perforations eps=0.025 at random on [-1,1]^2, A=0.03, recirculating w, banded source", c);
  }
  {
    ExperimentConfig c = box;
    c.perforations = "random 3600 0.005 1";
    add("nonperiodic-b", "3600 perforations eps=0.005 at random on [-1,1]^2, A=0.03, recirculating w, banded source",
        c);
  }
  {
    ExperimentConfig c = box;
    c.perforations = "random 100 0.04 1";
    c.source = "zero";
    c.boundary = "top_one";
    add("nonhomog-bc", "100 perforations eps=0.04 at random on [-1,1]^2, A=0.03, recirculating w, g=1 on top, f=0",
        c);
  }
  return out;
}

const std::vector<PresetEntry>& presets() {
  static const std::vector<PresetEntry> table = build_presets();
  return table;
}

}  // namespace

const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> infos = [] {
    std::vector<PresetInfo> out;
    for (const auto& p : presets()) out.push_back(p.info);
    return out;
  }();
  return infos;
}

ExperimentConfig preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.info.name == name) return p.config;
  throw ConfigError("unknown preset '" + std::string(name) + "'", 0, "preset");
}

void list_presets(std::ostream& os, std::string_view filter) {
  for (const auto& p : preset_catalog())
    if (filter.empty() || p.name.find(filter) != std::string::npos) os << p.name << ": " << p.description << '\n';
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view raw, int line) {
  const Where w{line, key};
  const std::string_view value = trim(raw);
  const auto t = tokens(value);
  if (key == "preset") {
    expect_count(t, 1, 1, w);
    try {
      c = preset(t[0]);
    } catch (const ConfigError&) {
      w.fail("unknown preset '" + t[0] + "'");
    }
  } else if (key == "domain") {
    expect_count(t, 4, 4, w);
    c.domain = {to_double(t[0], w), to_double(t[1], w), to_double(t[2], w), to_double(t[3], w)};
  } else if (key == "perforations") {
    c.perforations = check_perforations(value, w);
  } else if (key == "diffusion") {
    expect_count(t, 1, 1, w);
    c.diffusion = to_double(t[0], w);
  } else if (key == "velocity") {
    c.velocity = check_velocity(value, w);
  } else if (key == "source") {
    c.source = check_source(value, w);
  } else if (key == "boundary") {
    c.boundary = check_boundary(value, w);
  } else if (key == "method") {
    expect_count(t, 1, 1, w);
    try {
      c.method = parse_method(t[0]);
    } catch (const ConfigError&) {
      w.fail("unknown method '" + t[0] + "'");
    }
  } else if (key == "coarse") {
    expect_count(t, 3, 3, w);
    c.coarse = {to_index(t[0], w), to_index(t[1], w), to_index(t[2], w)};
  } else if (key == "reference") {
    expect_count(t, 1, 1, w);
    c.reference = to_index(t[0], w);
  } else if (key == "convergence") {
    if (t.empty()) w.fail("empty value");
    c.convergence.clear();
    for (const auto& s : t) c.convergence.push_back(parse_triple(s, w));
  } else if (key == "bubble") {
    expect_count(t, 1, 1, w);
    if (t[0] == "load") c.options.bubble = BubbleSource::Load;
    else if (t[0] == "unit") c.options.bubble = BubbleSource::Unit;
    else w.fail("expected load or unit");
  } else if (key == "coarse_form") {
    expect_count(t, 1, 1, w);
    if (t[0] == "penalized") c.options.form = CoarseForm::Penalized;
    else if (t[0] == "perforated") c.options.form = CoarseForm::Perforated;
    else w.fail("expected penalized or perforated");
  } else if (key == "output") {
    expect_count(t, 1, 1, w);
    c.output = t[0];
  } else {
    w.fail("unknown key");
  }
}

ExperimentConfig parse_config(std::istream& is) {
  struct Entry {
    std::string key;
    std::string value;
    int line;
  };
  std::vector<Entry> entries;
  std::map<std::string, int> seen;
  std::string text;
  for (int line = 1; std::getline(is, text); ++line) {
    std::string_view s = text;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'", line);
    const std::string key(trim(s.substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": missing key", line);
    if (const auto it = seen.find(key); it != seen.end())
      throw ConfigError("line " + std::to_string(line) + ": " + key + ": repeated (first on line " +
                            std::to_string(it->second) + ")",
                        line, key);
    seen.emplace(key, line);
    entries.push_back({key, std::string(trim(s.substr(eq + 1))), line});
  }
  ExperimentConfig c;
  for (const auto& e : entries)
    if (e.key == "preset") apply_setting(c, e.key, e.value, e.line);
  for (const auto& e : entries)
    if (e.key != "preset") apply_setting(c, e.key, e.value, e.line);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'", 0, "path");
  return parse_config(in);
}

namespace {

void check_nesting(const ExperimentConfig& c, const CoarseConfig& cc, const std::string& field) {
  const Where w{0, field};
  if (cc.NX < 1 || cc.NY < 1 || cc.m < 1) w.fail("counts must be positive");
  if (method_has_bubble(c.method) && cc.m < 2) w.fail("bubbles need m >= 2");
  const double hx = c.domain.width() / static_cast<double>(cc.NX);
  const double hy = c.domain.height() / static_cast<double>(cc.NY);
  if (std::abs(hx - hy) > 1e-12 * hx) w.fail("coarse cells are not square");
  if (c.method != Method::Reference && c.reference % (cc.NX * cc.m) != 0)
    w.fail("NX*m = " + std::to_string(cc.NX * cc.m) + " does not divide the reference resolution " +
           std::to_string(c.reference));
}

}  // namespace

void validate(const ExperimentConfig& c, bool convergence) {
  if (!c.domain.valid()) Where{0, "domain"}.fail("empty box");
  if (!(c.diffusion > 0.0)) Where{0, "diffusion"}.fail("must be positive");
  if (c.reference < 1) Where{0, "reference"}.fail("must be positive");
  const double ny = static_cast<double>(c.reference) * c.domain.height() / c.domain.width();
  if (std::abs(ny - std::round(ny)) > 1e-9) Where{0, "reference"}.fail("does not give square cells on the domain");
  if (!convergence) {
    check_nesting(c, c.coarse, "coarse");
    return;
  }
  if (c.convergence.empty()) Where{0, "convergence"}.fail("no configurations");
  for (const auto& cc : c.convergence) check_nesting(c, cc, "convergence");
}

void write_manifest(std::ostream& os, const ExperimentConfig& c) {
  if (!c.preset.empty()) os << "# resolved from preset " << c.preset << '\n';
  os << "domain = " << format_double(c.domain.xmin) << ' ' << format_double(c.domain.xmax) << ' '
     << format_double(c.domain.ymin) << ' ' << format_double(c.domain.ymax) << '\n';
  os << "perforations = " << c.perforations << '\n';
  os << "diffusion = " << format_double(c.diffusion) << '\n';
  os << "velocity = " << c.velocity << '\n';
  os << "source = " << c.source << '\n';
  os << "boundary = " << c.boundary << '\n';
  os << "method = " << method_name(c.method) << '\n';
  os << "coarse = " << c.coarse.NX << ' ' << c.coarse.NY << ' ' << c.coarse.m << '\n';
  os << "reference = " << c.reference << '\n';
  if (!c.convergence.empty()) {
    os << "convergence =";
    for (const auto& cc : c.convergence) os << ' ' << triple(cc);
    os << '\n';
  }
  os << "bubble = " << (c.options.bubble == BubbleSource::Load ? "load" : "unit") << '\n';
  os << "coarse_form = " << (c.options.form == CoarseForm::Penalized ? "penalized" : "perforated") << '\n';
  os << "output = " << c.output << '\n';
}

Problem make_problem(const ExperimentConfig& c) {
  Problem p;
  p.name = c.preset.empty() ? "custom" : c.preset;
  p.domain = c.domain;

  const Where wp{0, "perforations"};
  const auto t = tokens(c.perforations);
  if (t.empty() || t[0] == "none") {
    p.perforations = PerforationSet(c.domain, {});
  } else if (t[0] == "periodic") {
    const Point shift = t.size() == 6 ? Point{to_double(t[4], wp), to_double(t[5], wp)} : Point{};
    p.perforations =
        build_periodic_perforations(c.domain, to_index(t[1], wp), to_index(t[2], wp), to_double(t[3], wp), shift);
  } else if (t[0] == "random") {
    p.perforations = build_random_perforations(c.domain, to_index(t[1], wp), to_double(t[2], wp), to_seed(t[3], wp));
  } else if (t[0] == "file") {
    std::ifstream in(t[1]);
    if (!in) wp.fail("cannot open '" + t[1] + "'");
    p.perforations = read_perforations(in);
    if (!(p.perforations.domain() == c.domain)) wp.fail("layout file was written for another domain");
  } else {
    wp.fail("unknown layout '" + t[0] + "'");
  }

  ProblemData& d = p.data;
  d.diffusion = c.diffusion;

  const Where wv{0, "velocity"};
  const auto v = tokens(c.velocity);
  if (v[0] == "recirculating") {
    d.velocity = [](double x, double y) { return Vec2{2.0 * y * (1.0 - x * x), -2.0 * x * (1.0 - y * y)}; };
  } else if (v[0] == "const") {
    const Vec2 w{to_double(v[1], wv), to_double(v[2], wv)};
    d.velocity = [w](double, double) { return w; };
  }

  const Where wf{0, "source"};
  const auto f = tokens(c.source);
  if (f[0] == "sinsin") {
    d.source = [](double x, double y) {
      return std::sin(2.0 * std::numbers::pi * x) * std::sin(2.0 * std::numbers::pi * y);
    };
  } else if (f[0] == "bands") {
    d.source = [](double, double y) { return (y >= 0.7 || y <= -0.7) ? 1.0 : 0.0; };
  } else if (f[0] == "const") {
    const double k = to_double(f[1], wf);
    d.source = [k](double, double) { return k; };
  }

  const Where wg{0, "boundary"};
  const auto g = tokens(c.boundary);
  if (g[0] == "top_one") {
    d.boundary = [](Side s, double, double) { return s == Side::Top ? 1.0 : 0.0; };
  } else if (g[0] == "const") {
    const double k = to_double(g[1], wg);
    d.boundary = [k](Side, double, double) { return k; };
  } else if (g[0] == "linear") {
    const double a = to_double(g[1], wg), b = to_double(g[2], wg), k = to_double(g[3], wg);
    d.boundary = [a, b, k](Side, double x, double y) { return a + b * x + k * y; };
  }
  return p;
}

}  // namespace crmsfem
