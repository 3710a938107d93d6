#include "colorwai/studio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <chrono>
#include <ctime>
#include <random>

#include <spdlog/spdlog.h>

#include "colorwai/error.hpp"
#include "colorwai/hash.hpp"
#include "colorwai/png_io.hpp"
#include "colorwai/ssim.hpp"

namespace colorwai::studio {

using nlohmann::json;

namespace {

constexpr const char* kCodebookPath = "codebook.json";

std::string directions_prefix(const std::string& backend, disentangle::Method method) {
  return "directions/" + backend + "-" + disentangle::to_string(method) + "-v";
}

std::string random_id() {
  static std::mutex mutex;
  static std::mt19937_64 engine{std::random_device{}()};
  std::lock_guard lock(mutex);
  const std::uint64_t v = engine();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void check_id(const std::string& id) {
  const bool ok = !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
                  });
  if (!ok) throw ValidationError("invalid id '" + id + "'");
}

}  // namespace

std::string to_string(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "unknown";
}

std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void to_json(json& j, const EditRef& e) {
  j = {{"method", e.method}, {"direction_version", e.direction_version}, {"color_id", e.color_id}, {"alpha", e.alpha}};
}

void from_json(const json& j, EditRef& e) {
  e.method = j.at("method").get<std::string>();
  e.direction_version = j.at("direction_version").get<int>();
  e.color_id = j.at("color_id").get<int>();
  e.alpha = j.at("alpha").get<double>();
}

namespace {

json content_json(const PatternRecord& r) {
  return {{"version", r.version},
          {"backend_id", r.backend_id},
          {"seed", r.seed ? json(*r.seed) : json(nullptr)},
          {"parent_id", r.parent_id ? json(*r.parent_id) : json(nullptr)},
          {"latent", r.latent},
          {"edit", r.edit ? json(*r.edit) : json(nullptr)},
          {"image", r.image},
          {"color_id", r.color_id},
          {"request", r.request}};
}

}  // namespace

std::string pattern_id(const PatternRecord& r) { return sha256_hex(content_json(r).dump()).substr(0, 24); }

void to_json(json& j, const PatternRecord& r) {
  j = content_json(r);
  j["id"] = r.id;
  j["created_at"] = r.created_at;
}

void from_json(const json& j, PatternRecord& r) {
  r.version = j.at("version").get<int>();
  r.id = j.at("id").get<std::string>();
  r.backend_id = j.at("backend_id").get<std::string>();
  r.seed = j.at("seed").is_null() ? std::nullopt : std::optional(j.at("seed").get<std::uint64_t>());
  r.parent_id = j.at("parent_id").is_null() ? std::nullopt : std::optional(j.at("parent_id").get<std::string>());
  r.latent = j.at("latent").get<std::vector<double>>();
  r.edit = j.at("edit").is_null() ? std::nullopt : std::optional(j.at("edit").get<EditRef>());
  r.image = j.at("image").get<std::string>();
  r.color_id = j.at("color_id").get<int>();
  r.created_at = j.at("created_at").get<std::string>();
  r.request = j.value("request", json(nullptr));
}

void to_json(json& j, const ColorwayRequest& r) {
  j = {{"pattern_id", r.pattern_id},
       {"color_id", r.color_id},
       {"method", r.method},
       {"alpha", r.alpha ? json(*r.alpha) : json("optimal")}};
  if (r.backend) j["backend"] = *r.backend;
}

void from_json(const json& j, ColorwayRequest& r) {
  if (!j.is_object()) throw ValidationError("colorway request must be an object");
  r.pattern_id = j.value("pattern_id", std::string());
  if (!j.contains("color_id") || !j.at("color_id").is_number_integer()) throw ValidationError("color_id required");
  r.color_id = j.at("color_id").get<int>();
  r.method = j.value("method", std::string("shapleyvec"));
  const json alpha = j.value("alpha", json("optimal"));
  if (alpha.is_string()) {
    if (alpha.get<std::string>() != "optimal") throw ValidationError("alpha must be a number or \"optimal\"");
    r.alpha.reset();
  } else if (alpha.is_number()) {
    r.alpha = alpha.get<double>();
  } else {
    throw ValidationError("alpha must be a number or \"optimal\"");
  }
  const json backend = j.value("backend", json(nullptr));
  if (backend.is_string()) {
    r.backend = backend.get<std::string>();
  } else if (!backend.is_null()) {
    throw ValidationError("backend must be a string");
  }
}

void to_json(json& j, const BoardItem& b) { j = {{"pattern_id", b.pattern_id}, {"request", b.request}}; }

void from_json(const json& j, BoardItem& b) {
  b.pattern_id = j.at("pattern_id").get<std::string>();
  b.request = j.value("request", json(nullptr));
}

void to_json(json& j, const Board& b) {
  j = {{"version", b.version},   {"id", b.id},           {"name", b.name},
       {"pinned", b.pinned},     {"created_at", b.created_at}, {"updated_at", b.updated_at}};
}

void from_json(const json& j, Board& b) {
  if (!j.is_object()) throw ValidationError("board must be an object");
  b.version = j.value("version", 1);
  b.id = j.value("id", std::string());
  b.name = j.value("name", std::string());
  b.pinned = j.value("pinned", std::vector<BoardItem>());
  b.created_at = j.value("created_at", std::string());
  b.updated_at = j.value("updated_at", std::string());
}

void to_json(json& j, const JobStatus& s) {
  j = {{"id", s.id},         {"kind", s.kind},   {"backend", s.backend}, {"state", to_string(s.state)},
       {"progress", s.progress}, {"error", s.error}, {"result", s.result}};
}

FitRequest parse_fit_request(const json& j) {
  if (!j.is_object()) throw ValidationError("fit request must be an object");
  FitRequest req;
  req.backend = j.value("backend", req.backend);
  req.method = disentangle::parse_method(j.value("method", std::string("shapleyvec")));
  const json params = j.value("params", json::object());
  if (!params.is_object()) throw ValidationError("params must be an object");
  auto& h = req.hyperparams;
  if (params.contains("kind")) h.kind = numerics::parse_loss_kind(params.at("kind").get<std::string>());
  h.c_reg = params.value("c_reg", h.c_reg);
  h.k = params.value("k", h.k);
  h.explanation = params.value("explanation", h.explanation);
  req.seed = params.value("seed", req.seed);
  req.n = params.value("n", req.n);
  req.evaluate = params.value("evaluate", req.evaluate);
  if (h.c_reg <= 0) throw ValidationError("c_reg must be positive");
  if (h.k < 1) throw ValidationError("k must be >= 1");
  if (!(h.explanation > 0 && h.explanation <= 1)) throw ValidationError("explanation must be in (0,1]");
  if (req.n < 2) throw ValidationError("n must be >= 2");
  return req;
}

Studio::Studio(WorkspaceStore& store, StudioConfig cfg) : store_(store), cfg_(std::move(cfg)) {
  cfg_.annotation.validate();
  cfg_.eval.validate();
}

Studio::~Studio() { wait_jobs(); }

void Studio::register_backend(std::shared_ptr<const EditBackend> backend) {
  const auto id = backend->id();
  backends_[id] = std::move(backend);
}

std::shared_ptr<const EditBackend> Studio::backend(const std::string& id) const {
  const auto it = backends_.find(id);
  return it == backends_.end() ? nullptr : it->second;
}

std::shared_ptr<const EditBackend> Studio::require_backend(const std::string& id) const {
  auto b = backend(id);
  if (!b) throw NotFoundError("unknown backend '" + id + "'");
  return b;
}

std::vector<std::string> Studio::backend_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, b] : backends_) out.push_back(id);
  return out;
}

bool Studio::has_codebook() const { return store_.exists(kCodebookPath); }

colorlab::ColorCodebook Studio::codebook() const {
  const auto doc = store_.try_read(kCodebookPath);
  if (!doc) throw NotFoundError("codebook not built");
  return doc->get<colorlab::ColorCodebook>();
}

void Studio::save_codebook(const colorlab::ColorCodebook& book) { store_.write(kCodebookPath, book); }

disentangle::LatentDataset Studio::couple(const std::string& backend_id, std::size_t n, std::uint64_t seed) {
  const auto b = require_backend(backend_id);
  auto data = disentangle::couple(*b, codebook(), cfg_.annotation, n, seed);
  store_.write("datasets/" + backend_id + ".json", data);
  return data;
}

std::optional<disentangle::LatentDataset> Studio::dataset(const std::string& backend_id) const {
  check_id(backend_id);
  const auto doc = store_.try_read("datasets/" + backend_id + ".json");
  if (!doc) return std::nullopt;
  return doc->get<disentangle::LatentDataset>();
}

std::optional<disentangle::DirectionSet> Studio::directions(const std::string& backend_id,
                                                            disentangle::Method method) const {
  check_id(backend_id);
  const auto prefix = directions_prefix(backend_id, method);
  int latest = 0;
  for (const auto& path : store_.list("directions")) {
    if (path.rfind(prefix, 0) != 0) continue;
    const auto num = path.substr(prefix.size(), path.size() - prefix.size() - 5);
    try {
      latest = std::max(latest, std::stoi(num));
    } catch (const std::exception&) {
    }
  }
  if (latest == 0) return std::nullopt;
  return directions(backend_id, method, latest);
}

std::optional<disentangle::DirectionSet> Studio::directions(const std::string& backend_id, disentangle::Method method,
                                                            int version) const {
  check_id(backend_id);
  const auto doc = store_.try_read(directions_prefix(backend_id, method) + std::to_string(version) + ".json");
  if (!doc) return std::nullopt;
  return doc->get<disentangle::DirectionSet>();
}

int Studio::save_directions(disentangle::DirectionSet& set) {
  std::lock_guard lock(fit_mutex_);
  const auto latest = directions(set.backend, set.method);
  set.version = latest ? latest->version + 1 : 1;
  store_.write(directions_prefix(set.backend, set.method) + std::to_string(set.version) + ".json", set);
  return set.version;
}

disentangle::DirectionSet Studio::fit(const FitRequest& req, numerics::AttributionAudit* audit) {
  const auto b = require_backend(req.backend);
  const auto book = codebook();
  auto data = dataset(req.backend);
  if (!data || data->codebook_version != book.version || data->space_tag != b->space_tag())
    data = couple(req.backend, req.n, req.seed);
  disentangle::FitConfig fc{req.hyperparams, req.seed};
  auto set = disentangle::fit_all(*data, book, req.method, fc, audit);
  spdlog::info("fitted {} directions for {}/{}", set.directions.size(), req.backend, disentangle::to_string(req.method));
  if (set.directions.empty())
    throw ValidationError("no color could be fitted: " + (set.missing.empty() ? std::string("empty codebook")
                                                                                : set.missing.front().reason));
  std::optional<evalkit::EvalReport> report;
  if (req.evaluate) report = evalkit::evaluate(*b, book, set, cfg_.eval);
  save_directions(set);
  if (report) {
    store_.write("reports/" + req.backend + "-" + report->method + "-v" + std::to_string(set.version) + ".json",
                 *report);
  }
  return set;
}

evalkit::EvalReport Studio::evaluate(const std::string& backend_id, disentangle::Method method) {
  const auto b = require_backend(backend_id);
  auto set = directions(backend_id, method);
  if (!set) throw ValidationError("directions not fitted");
  auto report = evalkit::evaluate(*b, codebook(), *set, cfg_.eval);
  save_directions(*set);
  store_.write("reports/" + backend_id + "-" + report.method + "-v" + std::to_string(set->version) + ".json", report);
  return report;
}

PatternRecord Studio::persist_pattern(PatternRecord r, const ImageBuffer& img) {
  r.image = store_.put_blob(encode_png(img));
  r.color_id = colorlab::annotate_main_color(img, codebook(), cfg_.annotation);
  r.id = pattern_id(r);
  const auto path = "patterns/" + r.id + ".json";
  if (auto existing = store_.try_read(path)) return existing->get<PatternRecord>();
  r.created_at = now_iso8601();
  store_.write(path, r);
  return r;
}

PatternRecord Studio::create_pattern(const std::string& backend_id, std::uint64_t seed) {
  const auto b = require_backend(backend_id);
  const Eigen::VectorXd state = b->state(seed);
  const auto subject = b->subject_from_state(state);
  PatternRecord r;
  r.backend_id = backend_id;
  r.seed = seed;
  r.latent.assign(state.data(), state.data() + state.size());
  return persist_pattern(std::move(r), subject->original());
}

PatternRecord Studio::pattern(const std::string& id) const {
  check_id(id);
  const auto doc = store_.try_read("patterns/" + id + ".json");
  if (!doc) throw NotFoundError("no pattern " + id);
  return doc->get<PatternRecord>();
}

const disentangle::DirectionSpec& Studio::require_direction(const disentangle::DirectionSet& set,
                                                            int color_id) const {
  const auto* dir = set.find(color_id);
  if (!dir) throw ValidationError("no direction for color " + std::to_string(color_id) + " in this set");
  return *dir;
}

ImageBuffer Studio::render(const PatternRecord& r) const {
  const auto b = require_backend(r.backend_id);
  const Eigen::VectorXd state = Eigen::Map<const Eigen::VectorXd>(r.latent.data(), r.latent.size());
  const auto subject = b->subject_from_state(state);
  if (!r.edit) return subject->original();
  const auto set = directions(r.backend_id, disentangle::parse_method(r.edit->method), r.edit->direction_version);
  if (!set) throw NotFoundError("direction set of pattern " + r.id + " is gone");
  return subject->edited(require_direction(*set, r.edit->color_id), r.edit->alpha);
}

std::vector<std::uint8_t> Studio::pattern_png(const std::string& id) const {
  return store_.get_blob(pattern(id).image);
}

ColorwayResult Studio::create_colorway(const ColorwayRequest& req) {
  PatternRecord source = pattern(req.pattern_id);
  if (req.backend && *req.backend != source.backend_id) {
    if (!source.seed) throw ValidationError("backend override needs a seeded pattern");
    source = create_pattern(*req.backend, *source.seed);
  }
  const auto b = require_backend(source.backend_id);
  const auto book = codebook();
  if (!book.valid_id(req.color_id)) throw ValidationError("invalid color id " + std::to_string(req.color_id));
  const auto method = disentangle::parse_method(req.method);
  const auto set = directions(source.backend_id, method);
  if (!set) throw ValidationError("directions not fitted");
  if (set->space_tag != b->space_tag()) throw ValidationError("space mismatch: directions live in " + set->space_tag);
  const auto& dir = require_direction(*set, req.color_id);
  if (dir.space_tag != b->space_tag()) throw ValidationError("space mismatch: direction lives in " + dir.space_tag);
  double alpha = 0.0;
  if (req.alpha) {
    alpha = *req.alpha;
    if (!std::isfinite(alpha)) throw ValidationError("alpha must be finite");
  } else {
    if (!dir.alpha_optimal) throw ValidationError("alpha_optimal not stored; run eval first");
    alpha = *dir.alpha_optimal;
  }

  // Texgen edits compose additively, so a previous edit is folded into the
  // latent. Diffgen edits always start from the source trajectory.
  Eigen::VectorXd state = Eigen::Map<const Eigen::VectorXd>(source.latent.data(), source.latent.size());
  if (source.edit && b->id() == "texgen") {
    const auto prev = directions(source.backend_id, disentangle::parse_method(source.edit->method),
                                 source.edit->direction_version);
    if (!prev) throw NotFoundError("direction set of pattern " + source.id + " is gone");
    state = disentangle::edit_latent(state, require_direction(*prev, source.edit->color_id), source.edit->alpha);
  }

  const auto subject = b->subject_from_state(state);
  const ImageBuffer edited = subject->edited(dir, alpha);
  const ImageBuffer before = decode_png(store_.get_blob(source.image));

  ColorwayResult out;
  out.alpha = alpha;
  if (source.color_id == req.color_id) out.warnings.push_back("already-target");

  PatternRecord r;
  r.backend_id = source.backend_id;
  r.seed = source.seed;
  r.parent_id = source.id;
  r.latent.assign(state.data(), state.data() + state.size());
  r.edit = EditRef{disentangle::to_string(method), set->version, req.color_id, alpha};
  ColorwayRequest echo = req;
  echo.pattern_id = source.id;
  r.request = echo;
  out.record = persist_pattern(std::move(r), edited);
  out.achieved_color = out.record.color_id;
  out.ssim = numerics::ssim(before, decode_png(store_.get_blob(out.record.image)), cfg_.eval.ssim);
  return out;
}

Board Studio::save_board(Board board) {
  if (board.pinned.size() > cfg_.board_max)
    throw ValidationError("board holds at most " + std::to_string(cfg_.board_max) + " items");
  std::vector<std::string> dangling;
  for (const auto& item : board.pinned) {
    bool ok = false;
    try {
      check_id(item.pattern_id);
      ok = store_.exists("patterns/" + item.pattern_id + ".json");
    } catch (const ValidationError&) {
    }
    if (!ok) dangling.push_back(item.pattern_id);
  }
  if (!dangling.empty()) {
    std::string msg = "dangling pattern ids:";
    for (const auto& id : dangling) msg += " " + id;
    throw ValidationError(msg);
  }
  if (board.id.empty()) board.id = random_id();
  check_id(board.id);
  const auto now = now_iso8601();
  if (const auto prev = store_.try_read("boards/" + board.id + ".json")) {
    board.created_at = prev->value("created_at", now);
  } else if (board.created_at.empty()) {
    board.created_at = now;
  }
  board.updated_at = now;
  board.version = 1;
  store_.write("boards/" + board.id + ".json", board);
  return board;
}

Board Studio::load_board(const std::string& id) const {
  check_id(id);
  const auto doc = store_.try_read("boards/" + id + ".json");
  if (!doc) throw NotFoundError("no board " + id);
  return doc->get<Board>();
}

std::vector<Board> Studio::boards() const {
  std::vector<Board> out;
  for (const auto& path : store_.list("boards")) out.push_back(store_.read(path).get<Board>());
  return out;
}

ImageBuffer Studio::export_board(const std::string& id) const {
  const auto board = load_board(id);
  if (board.pinned.empty()) throw ValidationError("board is empty");
  std::vector<ImageBuffer> tiles;
  for (const auto& item : board.pinned) tiles.push_back(decode_png(pattern_png(item.pattern_id)));
  return contact_sheet(tiles, static_cast<int>(std::min<std::size_t>(tiles.size(), 4)));
}

std::string Studio::start_fit_job(const FitRequest& req) {
  require_backend(req.backend);
  std::lock_guard lock(jobs_mutex_);
  for (const auto& [id, s] : jobs_) {
    if (s.backend == req.backend && (s.state == JobState::queued || s.state == JobState::running))
      throw ConflictError("a job is already running for backend " + req.backend);
  }
  JobStatus status;
  status.id = "job-" + std::to_string(next_job_++);
  status.kind = "fit";
  status.backend = req.backend;
  jobs_[status.id] = status;
  const auto id = status.id;
  workers_.emplace_back([this, id, req] {
    auto update = [&](auto&& fn) {
      std::lock_guard l(jobs_mutex_);
      fn(jobs_.at(id));
    };
    update([](JobStatus& s) {
      s.state = JobState::running;
      s.progress = 0.1;
    });
    try {
      const auto set = fit(req);
      update([&](JobStatus& s) {
        s.state = JobState::done;
        s.progress = 1.0;
        s.result = {{"backend", set.backend}, {"method", disentangle::to_string(set.method)}, {"version", set.version}};
      });
    } catch (const std::exception& e) {
      spdlog::error("fit job {} failed: {}", id, e.what());
      update([&](JobStatus& s) {
        s.state = JobState::failed;
        s.error = e.what();
      });
    }
  });
  return id;
}

JobStatus Studio::job(const std::string& id) const {
  std::lock_guard lock(jobs_mutex_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) throw NotFoundError("no job " + id);
  return it->second;
}

void Studio::wait_jobs() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(jobs_mutex_);
    threads.swap(workers_);
  }
  for (auto& t : threads) t.join();
}

}  // namespace colorwai::studio
