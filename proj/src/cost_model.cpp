#include "rbmltt/cost_model.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rbm {

namespace {
constexpr std::array<std::string_view, kDeltaCount> kKeys = {
    "delta_U",      "delta_El",   "delta_Pi",  "delta_Sigma", "delta_pi1",    "delta_pi2",   "delta_Id",
    "delta_refl",   "delta_J",    "delta_Jbeta", "delta_Nat", "delta_Z",      "delta_S",     "delta_natrec",
    "delta_Vec",    "delta_nil",  "delta_cons", "delta_vecrec", "delta_Fin",  "delta_fz",    "delta_fs",
    "delta_Box",    "delta_unbox", "delta_app", "delta_beta",  "delta_add",
};

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}
}  // namespace

std::string_view delta_key(Delta d) { return kKeys[static_cast<std::size_t>(d)]; }

CostModel CostModel::defaults() {
  CostModel m;
  m.values.fill(ExtNat{1});
  m[Delta::Add] = 2;
  m[Delta::App] = 0;
  m[Delta::Beta] = 0;
  return m;
}

CostModel CostModel::value_free() {
  CostModel m = defaults();
  for (Delta d : {Delta::Z, Delta::S, Delta::Nil, Delta::Cons, Delta::Refl, Delta::FZ, Delta::FS}) m[d] = 0;
  m.name = "value-free";
  return m;
}

CostModel CostModel::parse(std::string_view text, std::string name) {
  CostModel m = defaults();
  m.name = std::move(name);
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (std::string_view marker : {"#", "--"}) {
      auto pos = line.find(marker);
      if (pos != std::string::npos) line.erase(pos);
    }
    std::string body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos)
      throw CostModelError("line " + std::to_string(lineno) + ": expected `key = value`");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string val = trim(std::string_view(body).substr(eq + 1));
    std::size_t slot = kDeltaCount;
    for (std::size_t i = 0; i < kDeltaCount; ++i)
      if (kKeys[i] == key) slot = i;
    if (slot == kDeltaCount) throw CostModelError("line " + std::to_string(lineno) + ": unknown key `" + key + "`");
    if (val == "inf") {
      m.values[slot] = ExtNat::inf();
      continue;
    }
    try {
      std::size_t used = 0;
      unsigned long long v = std::stoull(val, &used);
      if (used != val.size() || val.front() == '-') throw std::invalid_argument(val);
      m.values[slot] = ExtNat{static_cast<std::uint64_t>(v)};
    } catch (const std::exception&) {
      throw CostModelError("line " + std::to_string(lineno) + ": bad value `" + val + "` for " + key);
    }
  }
  return m;
}

CostModel CostModel::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CostModelError("cannot open cost model file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

CostModel CostModel::resolve(const std::string& path_or_empty) {
  if (!path_or_empty.empty()) return load(path_or_empty);
  if (const char* env = std::getenv("RBMLTT_COST_MODEL"); env && *env) return load(env);
  return defaults();
}

std::string CostModel::to_text() const {
  std::string s;
  for (std::size_t i = 0; i < kDeltaCount; ++i) s += std::string(kKeys[i]) + " = " + values[i].str() + "\n";
  return s;
}

}  // namespace rbm
