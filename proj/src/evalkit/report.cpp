#include <sstream>

#include "colorwai/error.hpp"
#include "colorwai/evalkit.hpp"

namespace colorwai::evalkit {

RepresentationReport representation_report(const disentangle::DirectionSet& set) {
  RepresentationReport r;
  const auto& dirs = set.directions;
  for (const auto& d : dirs) {
    if (d.space_tag != dirs.front().space_tag || d.dim() != dirs.front().dim())
      throw ValidationError("mixed spaces in direction set");
  }
  const std::size_t k = dirs.size();
  r.cosine.assign(k, std::vector<double>(k, 0.0));
  r.overlap.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < k; ++i) {
    r.color_ids.push_back(dirs[i].color_id);
    r.support_sizes.push_back(dirs[i].support_size());
    for (std::size_t j = 0; j < k; ++j) {
      r.cosine[i][j] = i == j ? 1.0 : dirs[i].vector.dot(dirs[j].vector);
      std::size_t shared = 0;
      for (std::size_t d = 0; d < dirs[i].support.size(); ++d) shared += (dirs[i].support[d] && dirs[j].support[d]) ? 1 : 0;
      r.overlap[i][j] = shared;
    }
  }
  return r;
}

void to_json(nlohmann::json& j, const EvalConfig& c) {
  j = {{"ssim_ratio", c.ssim_ratio},
       {"alpha_grid", {{"max", c.alpha_max}, {"step", c.alpha_step}}},
       {"n_alpha_samples", c.n_alpha_samples},
       {"m_eval_samples", c.m_eval_samples},
       {"seed", c.seed},
       {"ssim",
        {{"window", c.ssim.window},
         {"sigma", c.ssim.sigma},
         {"k1", c.ssim.k1},
         {"k2", c.ssim.k2},
         {"dynamic_range", c.ssim.dynamic_range}}},
       {"annotation",
        {{"hue_weight", c.annotation.hue_weight},
         {"sat_weight", c.annotation.sat_weight},
         {"val_weight", c.annotation.val_weight},
         {"palette_spawn_threshold", c.annotation.palette_spawn_threshold},
         {"palette_max_colors", c.annotation.palette_max_colors},
         {"achromatic_saturation", c.annotation.achromatic_saturation}}}};
}

void from_json(const nlohmann::json& j, EvalConfig& c) {
  c = EvalConfig{};
  c.ssim_ratio = j.at("ssim_ratio").get<double>();
  c.alpha_max = j.at("alpha_grid").at("max").get<double>();
  c.alpha_step = j.at("alpha_grid").at("step").get<double>();
  c.n_alpha_samples = j.at("n_alpha_samples").get<int>();
  c.m_eval_samples = j.at("m_eval_samples").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& s = j.at("ssim");
  c.ssim.window = s.at("window").get<int>();
  c.ssim.sigma = s.at("sigma").get<double>();
  c.ssim.k1 = s.at("k1").get<double>();
  c.ssim.k2 = s.at("k2").get<double>();
  c.ssim.dynamic_range = s.at("dynamic_range").get<double>();
  const auto& a = j.at("annotation");
  c.annotation.hue_weight = a.at("hue_weight").get<double>();
  c.annotation.sat_weight = a.at("sat_weight").get<double>();
  c.annotation.val_weight = a.at("val_weight").get<double>();
  c.annotation.palette_spawn_threshold = a.at("palette_spawn_threshold").get<double>();
  c.annotation.palette_max_colors = a.at("palette_max_colors").get<int>();
  c.annotation.achromatic_saturation = a.at("achromatic_saturation").get<double>();
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"color_id", row.color_id},
                    {"alpha_optimal", row.alpha_optimal},
                    {"p_acc", row.p_acc},
                    {"relaxed_acc", row.relaxed_acc ? nlohmann::json(*row.relaxed_acc) : nlohmann::json(nullptr)},
                    {"n_used", row.n_used},
                    {"note", row.note}});
  }
  auto agg = [](const Aggregate& a) { return nlohmann::json{{"mean", a.mean}, {"std", a.std}, {"count", a.count}}; };
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"color_id", s.color_id}, {"reason", s.reason}});
  j = {{"version", r.version},
       {"backend", r.backend},
       {"method", r.method},
       {"config", r.config},
       {"rows", std::move(rows)},
       {"aggregates", {{"p_acc", agg(r.p_acc)}, {"relaxed_acc", agg(r.relaxed_acc)}}},
       {"confusion", r.confusion},
       {"ssim_guard", {{"samples", r.ssim_guard.samples}, {"violations", r.ssim_guard.violations}, {"min_ssim", r.ssim_guard.min_ssim}}},
       {"skipped", std::move(skipped)}};
}

void from_json(const nlohmann::json& j, EvalReport& r) {
  r = EvalReport{};
  r.version = j.at("version").get<int>();
  r.backend = j.at("backend").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.config = j.at("config").get<EvalConfig>();
  for (const auto& row : j.at("rows")) {
    ColorRow c;
    c.color_id = row.at("color_id").get<int>();
    c.alpha_optimal = row.at("alpha_optimal").get<double>();
    c.p_acc = row.at("p_acc").get<double>();
    if (!row.at("relaxed_acc").is_null()) c.relaxed_acc = row.at("relaxed_acc").get<double>();
    c.n_used = row.at("n_used").get<std::size_t>();
    c.note = row.at("note").get<std::string>();
    r.rows.push_back(std::move(c));
  }
  auto agg = [](const nlohmann::json& a) {
    return Aggregate{a.at("mean").get<double>(), a.at("std").get<double>(), a.at("count").get<std::size_t>()};
  };
  r.p_acc = agg(j.at("aggregates").at("p_acc"));
  r.relaxed_acc = agg(j.at("aggregates").at("relaxed_acc"));
  r.confusion = j.at("confusion").get<CountMatrix>();
  const auto& g = j.at("ssim_guard");
  r.ssim_guard = {g.at("samples").get<std::size_t>(), g.at("violations").get<std::size_t>(), g.at("min_ssim").get<double>()};
  for (const auto& s : j.at("skipped")) r.skipped.push_back({s.at("color_id").get<int>(), s.at("reason").get<std::string>()});
}

void to_json(nlohmann::json& j, const RepresentationReport& r) {
  j = {{"version", r.version},
       {"color_ids", r.color_ids},
       {"cosine", r.cosine},
       {"overlap", r.overlap},
       {"support_sizes", r.support_sizes}};
}

void from_json(const nlohmann::json& j, RepresentationReport& r) {
  r.version = j.at("version").get<int>();
  r.color_ids = j.at("color_ids").get<std::vector<int>>();
  r.cosine = j.at("cosine").get<std::vector<std::vector<double>>>();
  r.overlap = j.at("overlap").get<std::vector<std::vector<std::size_t>>>();
  r.support_sizes = j.at("support_sizes").get<std::vector<std::size_t>>();
}

std::string rows_csv(const EvalReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "color_id,alpha_optimal,p_acc,relaxed_acc,n_used,note\n";
  for (const auto& row : r.rows) {
    os << row.color_id << ',' << row.alpha_optimal << ',' << row.p_acc << ',';
    if (row.relaxed_acc) os << *row.relaxed_acc;
    os << ',' << row.n_used << ",\"" << row.note << "\"\n";
  }
  return os.str();
}

namespace {
template <typename T>
std::string grid_csv(const std::vector<std::vector<T>>& m) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& row : m) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << row[j];
    os << '\n';
  }
  return os.str();
}
}  // namespace

std::string matrix_csv(const CountMatrix& m) { return grid_csv(m); }
std::string matrix_csv(const std::vector<std::vector<double>>& m) { return grid_csv(m); }

}  // namespace colorwai::evalkit
