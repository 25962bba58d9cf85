#include "core/model_io.hpp"

#include <charconv>

#include <json.hpp>

#include "core/error.hpp"

namespace qcrit {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& msg) {
  throw Error(ErrorCode::Parse, "model config: " + msg);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) parse_fail("unknown field '" + key + "' in " + where);
  }
}

Expr coefficient(const json& v, const std::string& where) {
  if (v.is_number()) return Expr::constant(v.get<double>());
  if (v.is_string()) return Expr::parse(v.get<std::string>());
  parse_fail("coefficient in " + where + " must be a number or expression string");
}

json coefficient_to_json(const Expr& e) {
  if (e.is_literal()) return *e.literal();
  return e.source();
}

int parse_offset(const std::string& key) {
  int value = 0;
  auto res = std::from_chars(key.data(), key.data() + key.size(), value);
  if (res.ec != std::errc() || res.ptr != key.data() + key.size())
    parse_fail("offset key '" + key + "' is not an integer");
  return value;
}

void read_matrix(const json& m, BlockExpr& block, bool imag, const std::string& where) {
  if (!m.is_array() || m.size() != 2) parse_fail(where + " must be a 2x2 nested array");
  for (int a = 0; a < 2; ++a) {
    if (!m[a].is_array() || m[a].size() != 2) parse_fail(where + " must be a 2x2 nested array");
    for (int b = 0; b < 2; ++b) {
      Expr e = coefficient(m[a][b], where);
      (imag ? block.entry[a][b].im : block.entry[a][b].re) = std::move(e);
    }
  }
}

}  // namespace

ModelSpec model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(e.what());
  }
  if (!doc.is_object()) parse_fail("top level must be an object");
  reject_unknown(doc, {"statistics", "dimension", "hamiltonian", "lindblads", "params"}, "model");

  ModelSpec spec;
  if (!doc.contains("statistics") || !doc["statistics"].is_string())
    parse_fail("'statistics' is required (\"boson\" or \"fermion\")");
  const auto stats = doc["statistics"].get<std::string>();
  if (stats == "boson") spec.statistics = Statistics::Boson;
  else if (stats == "fermion") spec.statistics = Statistics::Fermion;
  else parse_fail("statistics must be \"boson\" or \"fermion\"");

  if (doc.contains("dimension")) {
    if (!doc["dimension"].is_number_integer() || doc["dimension"].get<int>() < 1)
      parse_fail("dimension must be a positive integer");
    spec.dimension = doc["dimension"].get<int>();
  }

  if (doc.contains("hamiltonian")) {
    const auto& h = doc["hamiltonian"];
    if (!h.is_object()) parse_fail("hamiltonian must be an object keyed by offset");
    for (const auto& [key, blk] : h.items()) {
      const std::string where = "hamiltonian[" + key + "]";
      if (!blk.is_object()) parse_fail(where + " must be an object with re/im");
      reject_unknown(blk, {"re", "im"}, where);
      BlockExpr block;
      if (blk.contains("re")) read_matrix(blk["re"], block, false, where + ".re");
      if (blk.contains("im")) read_matrix(blk["im"], block, true, where + ".im");
      spec.hamiltonian.entries[parse_offset(key)] = std::move(block);
    }
  }

  if (doc.contains("lindblads")) {
    const auto& ls = doc["lindblads"];
    if (!ls.is_array()) parse_fail("lindblads must be an array");
    for (size_t mu = 0; mu < ls.size(); ++mu) {
      const auto& ch = ls[mu];
      if (!ch.is_object()) parse_fail("lindblads[" + std::to_string(mu) + "] must be an object");
      LindbladStencil channel;
      for (const auto& [key, vec] : ch.items()) {
        const std::string where = "lindblads[" + std::to_string(mu) + "][" + key + "]";
        if (!vec.is_array() || vec.size() != 4) parse_fail(where + " must be [re1, im1, re2, im2]");
        std::array<ComplexExpr, 2> c;
        c[0] = {coefficient(vec[0], where), coefficient(vec[1], where)};
        c[1] = {coefficient(vec[2], where), coefficient(vec[3], where)};
        channel.entries[parse_offset(key)] = std::move(c);
      }
      spec.lindblads.push_back(std::move(channel));
    }
  }

  if (doc.contains("params")) {
    const auto& p = doc["params"];
    if (!p.is_object()) parse_fail("params must be an object");
    for (const auto& [key, v] : p.items()) {
      if (!v.is_number()) parse_fail("param '" + key + "' must be a number");
      spec.params[key] = v.get<double>();
    }
  }
  return spec;
}

std::string model_to_json(const ModelSpec& spec, int indent) {
  json doc;
  doc["statistics"] = to_string(spec.statistics);
  doc["dimension"] = spec.dimension;
  json h = json::object();
  for (const auto& [offset, block] : spec.hamiltonian.entries) {
    json re = json::array(), im = json::array();
    for (int a = 0; a < 2; ++a) {
      json rr = json::array(), ii = json::array();
      for (int b = 0; b < 2; ++b) {
        rr.push_back(coefficient_to_json(block.entry[a][b].re));
        ii.push_back(coefficient_to_json(block.entry[a][b].im));
      }
      re.push_back(rr);
      im.push_back(ii);
    }
    h[std::to_string(offset)] = {{"re", re}, {"im", im}};
  }
  doc["hamiltonian"] = h;
  json ls = json::array();
  for (const auto& ch : spec.lindblads) {
    json c = json::object();
    for (const auto& [offset, coeffs] : ch.entries)
      c[std::to_string(offset)] = {coefficient_to_json(coeffs[0].re), coefficient_to_json(coeffs[0].im),
                                   coefficient_to_json(coeffs[1].re), coefficient_to_json(coeffs[1].im)};
    ls.push_back(c);
  }
  doc["lindblads"] = ls;
  json p = json::object();
  for (const auto& [k, v] : spec.params) p[k] = v;
  doc["params"] = p;
  return doc.dump(indent);
}

}  // namespace qcrit
