#include "perfhom/core/geometry_json.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "perfhom/core/error.hpp"

namespace perfhom {

using nlohmann::json;

namespace {

json point_json(Point p) { return json::array({p.x, p.y}); }

Point point_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw invalid_argument(std::string(what) + " must be a 2-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

json domain_json(const DomainSpec& d) {
  if (d.kind() == DomainKind::disk) {
    return {{"kind", "disk"}, {"center", point_json(d.center())}, {"radius", d.radius()}};
  }
  return {{"kind", "rectangle"}, {"lo", point_json(d.lo())}, {"hi", point_json(d.hi())}};
}

DomainSpec domain_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "disk") return DomainSpec::disk(point_from(j.at("center"), "domain.center"), j.at("radius").get<double>());
  if (kind == "rectangle") return DomainSpec::rectangle(point_from(j.at("lo"), "domain.lo"), point_from(j.at("hi"), "domain.hi"));
  if (kind == "unit_square") return DomainSpec::unit_square();
  if (kind == "unit_disk") return DomainSpec::unit_disk();
  throw invalid_argument("unknown domain kind '" + kind + "'");
}

json shape_json(const CavityShape& s) {
  if (s.kind() == ShapeKind::unit_disk) {
    return {{"kind", "unit_disk"}, {"fourier_or_samples", nullptr}};
  }
  const FourierProfile& f = s.profile();
  json fourier = {{"a0", f.a0}, {"cos", f.cos_coeffs}, {"sin", f.sin_coeffs}};
  return {{"kind", "star"}, {"fourier_or_samples", {{"fourier", fourier}}}, {"inner_center", point_json(s.inner_center())}};
}

CavityShape shape_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "unit_disk") return CavityShape::unit_disk();
  if (kind != "star") throw invalid_argument("unknown shape kind '" + kind + "'");
  const json& src = j.at("fourier_or_samples");
  Point inner{};
  if (j.contains("inner_center")) inner = point_from(j.at("inner_center"), "shape.inner_center");
  if (src.contains("fourier")) {
    const json& f = src.at("fourier");
    FourierProfile p;
    p.a0 = f.at("a0").get<double>();
    if (f.contains("cos")) p.cos_coeffs = f.at("cos").get<std::vector<double>>();
    if (f.contains("sin")) p.sin_coeffs = f.at("sin").get<std::vector<double>>();
    return CavityShape::star(p, inner);
  }
  if (src.contains("samples")) {
    return CavityShape::star(FourierProfile::from_samples(src.at("samples").get<std::vector<double>>()), inner);
  }
  throw invalid_argument("star shape needs 'fourier' or 'samples'");
}

}  // namespace

std::string perforation_to_json(const Perforation& p, int indent) {
  json cavities = json::array();
  for (const Cavity& c : p.cavities) cavities.push_back({{"center", point_json(c.center)}, {"shape", shape_json(c.shape)}});
  json doc = {{"domain", domain_json(p.domain)},
              {"epsilon", p.epsilon},
              {"eta", p.eta},
              {"radii", {p.radii.r1, p.radii.r2, p.radii.r3}},
              {"cavities", cavities}};
  return doc.dump(indent);
}

Perforation perforation_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw validation_error(std::string("perforation JSON: ") + e.what());
  }
  try {
    Perforation p;
    p.domain = domain_from(doc.at("domain"));
    p.epsilon = doc.at("epsilon").get<double>();
    p.eta = doc.at("eta").get<double>();
    const auto radii = doc.at("radii").get<std::vector<double>>();
    if (radii.size() != 3) throw validation_error("perforation JSON: radii must have three entries");
    p.radii = {radii[0], radii[1], radii[2]};
    for (const json& c : doc.at("cavities")) {
      p.cavities.push_back({point_from(c.at("center"), "cavity.center"), shape_from(c.at("shape"))});
    }
    return p;
  } catch (const json::exception& e) {
    throw validation_error(std::string("perforation JSON: ") + e.what());
  }
}

Perforation read_perforation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return perforation_from_json(ss.str());
}

void write_perforation(const Perforation& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << perforation_to_json(p) << '\n';
  if (!out) throw io_error("write failed for " + path);
}

}  // namespace perfhom
