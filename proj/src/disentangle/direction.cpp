#include <cmath>
#include <limits>

#include "colorwai/direction.hpp"
#include "colorwai/error.hpp"

namespace colorwai::disentangle {

std::string to_string(Method m) {
  switch (m) {
    case Method::interfacegan: return "interfacegan";
    case Method::stylespace: return "stylespace";
    case Method::shapleyvec: return "shapleyvec";
  }
  return "unknown";
}

Method parse_method(const std::string& s) {
  if (s == "interfacegan") return Method::interfacegan;
  if (s == "stylespace") return Method::stylespace;
  if (s == "shapleyvec") return Method::shapleyvec;
  throw ValidationError("unknown method '" + s + "'");
}

bool DirectionSpec::operator==(const DirectionSpec& o) const {
  return method == o.method && color_id == o.color_id && vector.size() == o.vector.size() && vector == o.vector &&
         support == o.support && hyperparams == o.hyperparams && alpha_optimal == o.alpha_optimal &&
         space_tag == o.space_tag && seed == o.seed && dataset_hash == o.dataset_hash;
}

std::size_t DirectionSpec::support_size() const {
  std::size_t n = 0;
  for (auto s : support) n += s ? 1 : 0;
  return n;
}

void DirectionSpec::validate() const {
  if (support.size() != dim()) throw ValidationError("support mask size does not match direction");
  if (std::fabs(vector.norm() - 1.0) > 1e-9) throw ValidationError("direction is not unit length");
  for (std::size_t i = 0; i < support.size(); ++i)
    if (!support[i] && vector[static_cast<Eigen::Index>(i)] != 0.0)
      throw ValidationError("direction has mass outside its support");
  if (method == Method::interfacegan && support_size() != dim())
    throw ValidationError("interfacegan directions use the full support");
}

const DirectionSpec* DirectionSet::find(int color_id) const {
  for (const auto& d : directions)
    if (d.color_id == color_id) return &d;
  return nullptr;
}

DirectionSpec* DirectionSet::find(int color_id) {
  for (auto& d : directions)
    if (d.color_id == color_id) return &d;
  return nullptr;
}

Eigen::VectorXd edit_latent(const Eigen::VectorXd& z, const DirectionSpec& dir, double alpha) {
  if (z.size() != dir.vector.size()) throw ValidationError("dimension mismatch");
  return z + alpha * dir.vector;
}

void to_json(nlohmann::json& j, const DirectionSpec& d) {
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < d.support.size(); ++i)
    if (d.support[i]) support.push_back(i);
  j = {{"color_id", d.color_id},
       {"method", to_string(d.method)},
       {"space_tag", d.space_tag},
       {"dim", d.dim()},
       {"vector", std::vector<double>(d.vector.data(), d.vector.data() + d.vector.size())},
       {"support", support},
       {"hyperparams",
        {{"kind", numerics::to_string(d.hyperparams.kind)},
         {"c_reg", std::isinf(d.hyperparams.c_reg) ? nlohmann::json("inf") : nlohmann::json(d.hyperparams.c_reg)},
         {"k", d.hyperparams.k},
         {"explanation", d.hyperparams.explanation}}},
       {"alpha_optimal", d.alpha_optimal ? nlohmann::json(*d.alpha_optimal) : nlohmann::json(nullptr)},
       {"seed", d.seed},
       {"dataset_hash", d.dataset_hash}};
}

void from_json(const nlohmann::json& j, DirectionSpec& d) {
  d = DirectionSpec{};
  d.color_id = j.at("color_id").get<int>();
  d.method = parse_method(j.at("method").get<std::string>());
  d.space_tag = j.at("space_tag").get<std::string>();
  const auto values = j.at("vector").get<std::vector<double>>();
  d.vector = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  d.support.assign(values.size(), 0);
  for (auto i : j.at("support").get<std::vector<std::size_t>>()) {
    if (i >= values.size()) throw ValidationError("support index out of range");
    d.support[i] = 1;
  }
  const auto& h = j.at("hyperparams");
  d.hyperparams.kind = numerics::parse_loss_kind(h.at("kind").get<std::string>());
  const auto& c = h.at("c_reg");
  d.hyperparams.c_reg = c.is_string() ? std::numeric_limits<double>::infinity() : c.get<double>();
  d.hyperparams.k = h.at("k").get<int>();
  d.hyperparams.explanation = h.at("explanation").get<double>();
  if (!j.at("alpha_optimal").is_null()) d.alpha_optimal = j.at("alpha_optimal").get<double>();
  d.seed = j.at("seed").get<std::uint64_t>();
  d.dataset_hash = j.at("dataset_hash").get<std::string>();
}

void to_json(nlohmann::json& j, const DirectionSet& s) {
  nlohmann::json missing = nlohmann::json::array();
  for (const auto& m : s.missing) missing.push_back({{"color_id", m.color_id}, {"reason", m.reason}});
  j = {{"version", s.version},
       {"backend", s.backend},
       {"space_tag", s.space_tag},
       {"codebook_version", s.codebook_version},
       {"method", to_string(s.method)},
       {"partial", s.partial()},
       {"missing", std::move(missing)},
       {"directions", s.directions}};
}

void from_json(const nlohmann::json& j, DirectionSet& s) {
  s = DirectionSet{};
  s.version = j.at("version").get<int>();
  s.backend = j.at("backend").get<std::string>();
  s.space_tag = j.at("space_tag").get<std::string>();
  s.codebook_version = j.at("codebook_version").get<int>();
  s.method = parse_method(j.at("method").get<std::string>());
  for (const auto& m : j.at("missing")) s.missing.push_back({m.at("color_id").get<int>(), m.at("reason").get<std::string>()});
  s.directions = j.at("directions").get<std::vector<DirectionSpec>>();
}

}  // namespace colorwai::disentangle
