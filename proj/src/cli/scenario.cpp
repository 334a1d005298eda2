#include "adgame/cli/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adgame/error.hpp"

namespace adgame::cli {

using nlohmann::json;

std::vector<double> Axis::values() const {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = i + 1 == count ? hi
                            : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

namespace {

void check_axis(const Axis& a, const std::string& where) {
  if (a.name.empty()) throw InvalidInput(where + ": axis name is empty");
  if (!(std::isfinite(a.lo) && std::isfinite(a.hi)))
    throw InvalidInput(where + ": axis bounds must be finite");
  if (!(a.lo < a.hi)) throw InvalidInput(where + ": axis needs lo < hi");
  if (a.count < 2) throw InvalidInput(where + ": axis needs count >= 2");
  if (a.count > 1000000) throw InvalidInput(where + ": axis count is too large");
}

double parse_double(std::string_view s, const std::string& where) {
  double x = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x))
    throw InvalidInput(where + ": not a finite number: '" + std::string(s) + "'");
  return x;
}

// Walks a JSON value and reports errors with its pointer.
class Node {
 public:
  Node(const json& value, std::string pointer) : v_(value), ptr_(std::move(pointer)) {}

  const std::string& pointer() const { return ptr_; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw InvalidInput("scenario field " + (ptr_.empty() ? std::string("/") : ptr_) + ": " + msg);
  }

  Node object() const {
    if (!v_.is_object()) fail("expected an object");
    return *this;
  }

  void only(std::initializer_list<std::string_view> keys) const {
    for (auto it = v_.begin(); it != v_.end(); ++it)
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
        Node(it.value(), ptr_ + "/" + it.key()).fail("unknown field");
  }
  void only(const std::vector<std::string>& keys) const {
    for (auto it = v_.begin(); it != v_.end(); ++it)
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
        Node(it.value(), ptr_ + "/" + it.key()).fail("unknown field");
  }

  bool has(const char* key) const { return v_.contains(key); }
  Node at(const char* key) const {
    if (!v_.contains(key)) Node(v_, ptr_ + "/" + key).fail("required field is missing");
    return Node(v_.at(key), ptr_ + "/" + key);
  }
  Node at(std::size_t i) const { return Node(v_.at(i), ptr_ + "/" + std::to_string(i)); }

  double number() const {
    if (!v_.is_number()) fail("expected a number");
    const double x = v_.get<double>();
    if (!std::isfinite(x)) fail("expected a finite number");
    return x;
  }
  double number(const char* key, double fallback) const {
    return has(key) ? at(key).number() : fallback;
  }
  std::size_t count() const {
    if (!v_.is_number_integer() && !v_.is_number_unsigned()) fail("expected an integer");
    const auto x = v_.get<long long>();
    if (x < 0) fail("expected a nonnegative integer");
    return static_cast<std::size_t>(x);
  }
  std::string string() const {
    if (!v_.is_string()) fail("expected a string");
    return v_.get<std::string>();
  }
  bool boolean() const {
    if (!v_.is_boolean()) fail("expected true or false");
    return v_.get<bool>();
  }
  std::size_t size() const {
    if (!v_.is_array()) fail("expected an array");
    return v_.size();
  }
  std::vector<double> numbers() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).number();
    return out;
  }
  std::vector<double> numbers(std::size_t expected, const char* what) const {
    auto out = numbers();
    if (out.size() != expected) {
      std::ostringstream os;
      os << "expected " << expected << " " << what << ", got " << out.size();
      fail(os.str());
    }
    return out;
  }

 private:
  const json& v_;
  std::string ptr_;
};

template <class F>
auto guarded(const Node& node, F&& f) {
  try {
    return f();
  } catch (const InvalidInput& e) {
    const std::string what = e.what();
    if (what.rfind("scenario field", 0) == 0) throw;
    node.fail(what);
  }
}

Model parse_model(const Node& n) {
  const auto s = n.string();
  if (s == "nontargeted") return Model::nontargeted;
  if (s == "targeted") return Model::targeted;
  if (s == "tiered") return Model::tiered;
  n.fail("model must be one of nontargeted, targeted, tiered (got '" + s + "')");
}

FirmParams parse_firm(const Node& n) {
  n.object().only({"name", "rho", "sigma", "c", "q", "budget"});
  if (n.has("name")) (void)n.at("name").string();
  FirmParams f;
  f.rho = n.number("rho", 1.0);
  f.sigma = n.number("sigma", 1.0);
  f.c = n.number("c", 0.0);
  f.q = n.number("q", 0.0);
  if (n.has("budget")) f.budget = n.at("budget").number();
  guarded(n, [&] {
    f.validate();
    return 0;
  });
  return f;
}

ControlPolicy parse_controls(const Node& n, Model model, std::size_t firms) {
  n.object().only({"kind", "u", "v", "times"});
  const std::string kind = n.has("kind") ? n.at("kind").string() : "constant";
  const std::size_t vlen = model == Model::targeted ? firms : 1;
  const bool needs_v = model != Model::nontargeted;
  if (!needs_v && n.has("v")) n.at("v").fail("the nontargeted model has no v effort");
  if (needs_v && !n.has("v")) n.at("v").fail(model == Model::tiered
                                                 ? "tiered model needs one shared v effort"
                                                 : "targeted model needs a v effort per firm");
  if (kind == "constant") {
    n.only({"kind", "u", "v"});
    return guarded(n, [&] {
      const auto u = n.at("u").numbers(firms, "entries (one per firm)");
      const auto v = needs_v ? n.at("v").numbers(vlen, "entries") : std::vector<double>{};
      return ControlPolicy::constant(ControlVector(u, v));
    });
  }
  if (kind != "piecewise_constant" && kind != "tabulated_linear")
    n.at("kind").fail("kind must be constant, piecewise_constant or tabulated_linear");
  const auto times = n.at("times").numbers();
  const Node u = n.at("u");
  if (u.size() != times.size()) u.fail("needs one row per entry of times");
  std::optional<Node> v;
  if (needs_v) {
    v.emplace(n.at("v"));
    if (v->size() != times.size()) v->fail("needs one row per entry of times");
  }
  return guarded(n, [&] {
    std::vector<ControlVector> values;
    for (std::size_t i = 0; i < times.size(); ++i)
      values.emplace_back(u.at(i).numbers(firms, "entries (one per firm)"),
                          v ? v->at(i).numbers(vlen, "entries") : std::vector<double>{});
    return kind == "piecewise_constant" ? ControlPolicy::piecewise_constant(times, values)
                                        : ControlPolicy::tabulated_linear(times, values);
  });
}

GameBlock parse_game(const Node& n, std::size_t firms) {
  n.object().only({"r", "T", "x0", "deviations"});
  GameBlock g;
  g.r = n.number("r", 0.0);
  g.T = n.at("T").number();
  g.x0 = n.at("x0").numbers(firms, "entries (one per firm)");
  if (g.r < 0.0) n.at("r").fail("discount rate must be nonnegative");
  if (g.T <= 0.0) n.at("T").fail("horizon must be positive");
  if (n.has("deviations")) {
    const Node d = n.at("deviations").object();
    d.only({"count", "magnitude", "seed", "opponents"});
    if (d.has("count")) g.deviations.perturbations = d.at("count").count();
    g.deviations.magnitude = d.number("magnitude", g.deviations.magnitude);
    if (!(g.deviations.magnitude > 0.0)) d.at("magnitude").fail("must be positive");
    if (d.has("seed")) g.deviations.seed = d.at("seed").count();
    if (d.has("opponents")) {
      const auto o = d.at("opponents").string();
      if (o == "open_loop") g.deviations.opponents = OpponentResponse::open_loop;
      else if (o == "closed_loop") g.deviations.opponents = OpponentResponse::closed_loop;
      else d.at("opponents").fail("must be open_loop or closed_loop");
    }
  }
  return g;
}

Params parse_params(const Node& n, const std::vector<std::string>& allowed,
                    std::initializer_list<std::string_view> skip) {
  Params out;
  std::vector<std::string> keys = allowed;
  keys.insert(keys.end(), skip.begin(), skip.end());
  n.only(keys);
  for (const auto& k : allowed)
    if (n.has(k.c_str())) out[k] = n.at(k.c_str()).number();
  return out;
}

Axis parse_axis(const Node& n) {
  n.object().only({"name", "lo", "hi", "count"});
  Axis a;
  a.name = n.at("name").string();
  a.lo = n.at("lo").number();
  a.hi = n.at("hi").number();
  a.count = n.at("count").count();
  guarded(n, [&] {
    check_axis(a, "axis");
    return 0;
  });
  return a;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::vector<Axis> parse_grid_spec(std::string_view spec) {
  std::vector<Axis> out;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const auto item = spec.substr(start, comma == std::string_view::npos ? spec.npos : comma - start);
    const std::string where = "grid item '" + std::string(item) + "'";
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw InvalidInput(where + ": expected name=lo:hi:count");
    Axis a;
    a.name = std::string(item.substr(0, eq));
    const auto rest = item.substr(eq + 1);
    const auto c1 = rest.find(':');
    const auto c2 = c1 == rest.npos ? rest.npos : rest.find(':', c1 + 1);
    if (c1 == rest.npos || c2 == rest.npos || rest.find(':', c2 + 1) != rest.npos)
      throw InvalidInput(where + ": expected name=lo:hi:count");
    a.lo = parse_double(rest.substr(0, c1), where);
    a.hi = parse_double(rest.substr(c1 + 1, c2 - c1 - 1), where);
    const auto cs = rest.substr(c2 + 1);
    std::size_t count = 0;
    auto [p, ec] = std::from_chars(cs.data(), cs.data() + cs.size(), count);
    if (ec != std::errc() || p != cs.data() + cs.size())
      throw InvalidInput(where + ": count must be an integer");
    a.count = count;
    check_axis(a, where);
    if (!seen.insert(a.name).second) throw InvalidInput(where + ": axis repeated");
    out.push_back(std::move(a));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty() || out.size() > 2) throw InvalidInput("grid needs one or two axes");
  return out;
}

const std::vector<std::string>& allocate_parameters(const std::string& kind) {
  static const std::map<std::string, std::vector<std::string>> table{
      {"instant", {"X", "rho", "sigma", "B", "N"}},
      {"steady", {"c1", "c2", "rho1", "rho2", "sigma1", "B", "B2", "m"}},
      {"lead", {"c", "rho1", "rho2", "sigma1", "B", "B2", "m"}},
      {"tiers", {"c1", "c2"}},
  };
  auto it = table.find(kind);
  if (it == table.end())
    throw InvalidInput("allocation kind must be instant, steady, lead or tiers (got '" + kind + "')");
  return it->second;
}

const std::vector<std::string>& sweep_quantities() {
  static const std::vector<std::string> q{"s1",      "s2",          "lead",
                                          "optimal_u1_squared",     "lead_u1_squared",
                                          "tier_u1", "epsilon_star", "allocation_fraction"};
  return q;
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> p{"c",      "c1", "c2", "u1", "X", "rho", "sigma",
                                          "rho1",   "rho2", "sigma1", "B", "B2", "m"};
  return p;
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream os;
    os << "scenario is not valid JSON at line " << line << ", column " << col << ": " << e.what();
    throw InvalidInput(os.str());
  }
  const Node root = Node(doc, "").object();
  root.only({"model", "market", "firms", "initial", "controls", "simulate", "game", "allocate",
             "sweep", "description"});
  if (root.has("description")) (void)root.at("description").string();

  Scenario s;
  s.model = parse_model(root.at("model"));
  if (root.has("market")) {
    const Node mk = root.at("market").object();
    mk.only({"m"});
    s.m = mk.number("m", 1.0);
    if (!(s.m > 0.0)) mk.at("m").fail("market size must be positive");
  }
  if (root.has("firms")) {
    const Node f = root.at("firms");
    if (f.size() == 0) f.fail("needs at least one firm");
    for (std::size_t i = 0; i < f.size(); ++i) s.firms.push_back(parse_firm(f.at(i)));
  }
  const std::size_t n = s.firms.size();
  auto need_firms = [&](const Node& node) {
    if (n == 0) node.fail("requires a non-empty firms array");
  };
  if (root.has("initial")) {
    const Node in = root.at("initial").object();
    need_firms(in);
    in.only({"s"});
    s.initial = in.at("s").numbers(n, "entries (one per firm)");
    guarded(in.at("s"), [&] {
      MarketState(s.m, *s.initial);
      return 0;
    });
  }
  if (root.has("controls")) {
    const Node c = root.at("controls");
    need_firms(c);
    s.controls = parse_controls(c, s.model, n);
  }
  if (root.has("simulate")) {
    const Node sim = root.at("simulate").object();
    sim.only({"t_end", "samples", "emit_controls"});
    s.simulate.t_end = sim.number("t_end", s.simulate.t_end);
    if (!(s.simulate.t_end > 0.0)) sim.at("t_end").fail("must be positive");
    if (sim.has("samples")) s.simulate.samples = sim.at("samples").count();
    if (s.simulate.samples < 2) sim.at("samples").fail("needs at least 2 samples");
    if (sim.has("emit_controls")) s.simulate.emit_controls = sim.at("emit_controls").boolean();
  }
  if (root.has("game")) {
    const Node g = root.at("game");
    need_firms(g);
    s.game = parse_game(g, n);
  }
  if (root.has("allocate")) {
    const Node a = root.at("allocate").object();
    AllocateBlock b;
    b.kind = a.at("kind").string();
    const auto& allowed = guarded(a.at("kind"), [&]() -> const std::vector<std::string>& {
      return allocate_parameters(b.kind);
    });
    b.params = parse_params(a, allowed, {"kind"});
    s.allocate = std::move(b);
  }
  if (root.has("sweep")) {
    const Node sw = root.at("sweep").object();
    sw.only({"quantity", "axes", "fixed"});
    SweepBlock b;
    b.quantity = sw.at("quantity").string();
    const auto& q = sweep_quantities();
    if (std::find(q.begin(), q.end(), b.quantity) == q.end())
      sw.at("quantity").fail("unknown quantity '" + b.quantity + "'");
    if (sw.has("axes")) {
      const Node ax = sw.at("axes");
      for (std::size_t i = 0; i < ax.size(); ++i) b.axes.push_back(parse_axis(ax.at(i)));
      if (b.axes.size() > 2) ax.fail("at most two axes");
    }
    if (sw.has("fixed")) b.fixed = parse_params(sw.at("fixed").object(), sweep_parameters(), {});
    s.sweep = std::move(b);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open scenario file " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return parse_scenario(os.str());
}

}  // namespace adgame::cli
