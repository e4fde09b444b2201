#include "bpire/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <json.hpp>
#include <optional>
#include <regex>
#include <sstream>

#include "bpire/errors.hpp"

namespace bpire {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string law_text(const CountLaw& law) {
  std::string out = "{" + std::string(law.kind()) + ", ";
  const auto& v = law.variant();
  if (const auto* g = std::get_if<Geometric>(&v)) out += fmt_double(g->success_prob);
  if (const auto* p = std::get_if<Poisson>(&v)) out += fmt_double(p->rate);
  if (const auto* d = std::get_if<Deterministic>(&v)) out += std::to_string(d->value);
  if (const auto* f = std::get_if<FiniteDiscrete>(&v)) {
    out += "[";
    for (std::size_t k = 0; k < f->pmf.size(); ++k) {
      if (k) out += ", ";
      out += fmt_double(f->pmf[k]);
    }
    out += "]";
  }
  return out + "}";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& s, int line) {
  const std::string t = trim(s);
  double v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ParseError("line " + std::to_string(line) + ": '" + t + "' is not a number");
  }
  return v;
}

// A law given either as text "{kind, param}" (param a number or [list]) or
// as JSON {"kind": ..., "param": ...}. Validation errors are collected.
struct LawSpec {
  std::string kind;
  std::vector<double> params;
  bool is_list = false;
};

LawSpec parse_law_text(const std::string& value, int line) {
  static const std::regex law_re(R"(^\{\s*([A-Za-z_]+)\s*,\s*(.*?)\s*\}$)");
  std::smatch m;
  if (!std::regex_match(value, m, law_re)) {
    throw ParseError("line " + std::to_string(line) + ": expected {kind, param}, got '" + value + "'");
  }
  LawSpec spec;
  spec.kind = m[1];
  std::string param = m[2];
  if (!param.empty() && param.front() == '[') {
    if (param.back() != ']') throw ParseError("line " + std::to_string(line) + ": unterminated list");
    spec.is_list = true;
    std::stringstream ss(param.substr(1, param.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) spec.params.push_back(parse_number(item, line));
  } else {
    spec.params.push_back(parse_number(param, line));
  }
  return spec;
}

CountLaw build_law(const LawSpec& spec) {
  const auto need_scalar = [&] {
    if (spec.is_list || spec.params.size() != 1) {
      throw ValidationError(spec.kind + " law takes a single parameter");
    }
    return spec.params.front();
  };
  if (spec.kind == "geometric") return CountLaw::geometric(need_scalar());
  if (spec.kind == "poisson") return CountLaw::poisson(need_scalar());
  if (spec.kind == "deterministic") {
    const double v = need_scalar();
    if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
      throw ValidationError("deterministic value must be a nonnegative integer");
    }
    return CountLaw::deterministic(static_cast<std::uint64_t>(v));
  }
  if (spec.kind == "bernoulli") return CountLaw::bernoulli(need_scalar());
  if (spec.kind == "finite") return CountLaw::finite(spec.params);
  throw ValidationError("unknown law kind '" + spec.kind + "'");
}

struct RawAtom {
  std::optional<LawSpec> offspring;
  std::optional<LawSpec> immigration;
  std::optional<double> prob;
};

EnvironmentModel assemble(std::map<std::size_t, RawAtom> raw) {
  std::vector<std::string> problems;
  std::vector<EnvironmentAtom> atoms;
  std::vector<double> probs;
  std::size_t expected = 0;
  for (auto& [idx, a] : raw) {
    const std::string where = "atoms[" + std::to_string(idx) + "]";
    if (idx != expected++) problems.push_back("atom indices are not contiguous at " + where);
    if (!a.offspring || !a.immigration || !a.prob) {
      problems.push_back(where + " needs offspring, immigration and prob");
      continue;
    }
    std::optional<CountLaw> off;
    std::optional<CountLaw> imm;
    try {
      off = build_law(*a.offspring);
    } catch (const ValidationError& e) {
      problems.push_back(where + ".offspring: " + e.what());
    }
    try {
      imm = build_law(*a.immigration);
    } catch (const ValidationError& e) {
      problems.push_back(where + ".immigration: " + e.what());
    }
    if (off && imm) {
      atoms.push_back({*off, *imm});
      probs.push_back(*a.prob);
    }
  }
  if (problems.empty()) {
    for (auto& p : EnvironmentModel::violations(atoms, probs)) problems.push_back(std::move(p));
  }
  if (!problems.empty()) {
    std::string msg = "invalid environment model:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
  return EnvironmentModel(std::move(atoms), std::move(probs));
}

LawSpec law_from_json(const nlohmann::json& j) {
  LawSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  const auto& p = j.at("param");
  if (p.is_array()) {
    spec.is_list = true;
    spec.params = p.get<std::vector<double>>();
  } else {
    spec.params.push_back(p.get<double>());
  }
  return spec;
}

bool looks_like_json(std::string_view text) {
  const auto pos = text.find_first_not_of(" \t\r\n");
  return pos != std::string_view::npos && text[pos] == '{';
}

std::string read_source(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string to_config_text(const EnvironmentModel& model) {
  std::string out;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const std::string key = "atoms[" + std::to_string(i) + "]";
    out += key + ".offspring = " + law_text(model.atom(i).offspring) + "\n";
    out += key + ".immigration = " + law_text(model.atom(i).immigration) + "\n";
    out += key + ".prob = " + fmt_double(model.prob(i)) + "\n";
  }
  return out;
}

std::string to_config_text(const RwreModel& model) {
  std::string out;
  for (std::size_t i = 0; i < model.site_values().size(); ++i) {
    const std::string key = "sites[" + std::to_string(i) + "]";
    out += key + ".xi = " + fmt_double(model.site_values()[i]) + "\n";
    out += key + ".prob = " + fmt_double(model.probs()[i]) + "\n";
  }
  out += std::string("reflect = ") + (model.reflect_at_origin() ? "true" : "false") + "\n";
  return out;
}

EnvironmentModel parse_model_text(std::string_view text) {
  std::map<std::size_t, RawAtom> raw;
  if (looks_like_json(text)) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
      std::size_t i = 0;
      for (const auto& a : doc.at("atoms")) {
        RawAtom& r = raw[i++];
        r.offspring = law_from_json(a.at("offspring"));
        r.immigration = law_from_json(a.at("immigration"));
        r.prob = a.at("prob").get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("model JSON: ") + e.what());
    }
    return assemble(std::move(raw));
  }
  static const std::regex line_re(R"(^\s*atoms\[(\d+)\]\.(offspring|immigration|prob)\s*=\s*(.+?)\s*$)");
  std::stringstream ss{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::smatch m;
    if (!std::regex_match(t, m, line_re)) {
      throw ParseError("line " + std::to_string(line_no) + ": unrecognised entry '" + t + "'");
    }
    RawAtom& r = raw[std::stoul(m[1])];
    const std::string field = m[2];
    const std::string value = m[3];
    if (field == "prob") {
      r.prob = parse_number(value, line_no);
    } else if (field == "offspring") {
      r.offspring = parse_law_text(value, line_no);
    } else {
      r.immigration = parse_law_text(value, line_no);
    }
  }
  if (raw.empty()) throw ParseError("model text defines no atoms");
  return assemble(std::move(raw));
}

RwreModel parse_sites_text(std::string_view text) {
  std::map<std::size_t, std::pair<std::optional<double>, std::optional<double>>> raw;
  bool reflect = false;
  if (looks_like_json(text)) {
    try {
      const auto doc = nlohmann::json::parse(text);
      std::size_t i = 0;
      for (const auto& s : doc.at("sites")) {
        raw[i++] = {s.at("xi").get<double>(), s.at("prob").get<double>()};
      }
      reflect = doc.value("reflect", false);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("sites JSON: ") + e.what());
    }
  } else {
    static const std::regex site_re(R"(^\s*sites\[(\d+)\]\.(xi|prob)\s*=\s*(.+?)\s*$)");
    static const std::regex reflect_re(R"(^\s*reflect\s*=\s*(true|false)\s*$)");
    std::stringstream ss{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
      ++line_no;
      const std::string t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      std::smatch m;
      if (std::regex_match(t, m, reflect_re)) {
        reflect = m[1] == "true";
      } else if (std::regex_match(t, m, site_re)) {
        auto& entry = raw[std::stoul(m[1])];
        (m[2] == "xi" ? entry.first : entry.second) = parse_number(m[3], line_no);
      } else {
        throw ParseError("line " + std::to_string(line_no) + ": unrecognised entry '" + t + "'");
      }
    }
  }
  std::vector<double> values;
  std::vector<double> probs;
  for (const auto& [idx, e] : raw) {
    if (!e.first || !e.second) {
      throw ValidationError("sites[" + std::to_string(idx) + "] needs xi and prob");
    }
    values.push_back(*e.first);
    probs.push_back(*e.second);
  }
  return RwreModel(std::move(values), std::move(probs), reflect);
}

EnvironmentModel parse_model(const std::string& path_or_preset) {
  if (is_preset_name(path_or_preset)) return preset_model(path_or_preset);
  return parse_model_text(read_source(path_or_preset));
}

RwreModel parse_sites(const std::string& path_or_preset) {
  if (is_site_preset_name(path_or_preset)) return preset_sites(path_or_preset);
  return parse_sites_text(read_source(path_or_preset));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

namespace {
std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}
}  // namespace

std::string model_fingerprint(const EnvironmentModel& model) {
  return hex64(fnv1a64(to_config_text(model)));
}

std::string model_fingerprint(const RwreModel& model) {
  return hex64(fnv1a64(to_config_text(model)));
}

std::string RunManifest::hash() const {
  nlohmann::json j;
  j["tool_version"] = tool_version;
  j["master_seed"] = master_seed;
  j["model_fingerprint"] = model_fingerprint;
  j["subcommand"] = subcommand;
  j["flags"] = flags;
  return hex64(fnv1a64(j.dump()));
}

}  // namespace bpire
