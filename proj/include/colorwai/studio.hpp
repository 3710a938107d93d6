#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "colorwai/backend.hpp"
#include "colorwai/colorlab.hpp"
#include "colorwai/direction.hpp"
#include "colorwai/disentangle.hpp"
#include "colorwai/evalkit.hpp"
#include "colorwai/store.hpp"
#include "json.hpp"

namespace colorwai::studio {

/// Edit applied on top of a pattern's latent when it is rendered.
struct EditRef {
  std::string method;
  int direction_version = 0;
  int color_id = 0;
  double alpha = 0.0;
  bool operator==(const EditRef&) const = default;
};

struct PatternRecord {
  int version = 1;
  std::string id;
  std::string backend_id;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> parent_id;
  std::vector<double> latent;
  std::optional<EditRef> edit;
  /// Blob hash of the rendered PNG.
  std::string image;
  int color_id = 0;
  std::string created_at;
  /// Echo of the colorway request that produced the record, or null.
  nlohmann::json request;
  bool operator==(const PatternRecord&) const = default;
};

/// Hash over every field except id and created_at.
std::string pattern_id(const PatternRecord& r);

struct ColorwayRequest {
  std::string pattern_id;
  int color_id = 0;
  std::string method = "shapleyvec";
  /// Unset means the stored alpha_optimal of the direction.
  std::optional<double> alpha;
  std::optional<std::string> backend;
  bool operator==(const ColorwayRequest&) const = default;
};

struct ColorwayResult {
  PatternRecord record;
  int achieved_color = 0;
  double ssim = 0.0;
  double alpha = 0.0;
  std::vector<std::string> warnings;
};

struct BoardItem {
  std::string pattern_id;
  nlohmann::json request;
  bool operator==(const BoardItem&) const = default;
};

struct Board {
  int version = 1;
  std::string id;
  std::string name;
  std::vector<BoardItem> pinned;
  std::string created_at;
  std::string updated_at;
  bool operator==(const Board&) const = default;
};

enum class JobState { queued, running, done, failed };
std::string to_string(JobState s);

struct JobStatus {
  std::string id;
  std::string kind;
  std::string backend;
  JobState state = JobState::queued;
  double progress = 0.0;
  std::string error;
  nlohmann::json result;
};

void to_json(nlohmann::json& j, const EditRef& e);
void from_json(const nlohmann::json& j, EditRef& e);
void to_json(nlohmann::json& j, const PatternRecord& r);
void from_json(const nlohmann::json& j, PatternRecord& r);
void to_json(nlohmann::json& j, const ColorwayRequest& r);
void from_json(const nlohmann::json& j, ColorwayRequest& r);
void to_json(nlohmann::json& j, const BoardItem& b);
void from_json(const nlohmann::json& j, BoardItem& b);
void to_json(nlohmann::json& j, const Board& b);
void from_json(const nlohmann::json& j, Board& b);
void to_json(nlohmann::json& j, const JobStatus& s);

/// UTC timestamp, ISO 8601 with seconds.
std::string now_iso8601();

struct StudioConfig {
  colorlab::AnnotationConfig annotation;
  evalkit::EvalConfig eval;
  std::size_t board_max = 24;
};

/// Parameters of one fit run; fields mirror the CLI flags.
struct FitRequest {
  std::string backend = "texgen";
  disentangle::Method method = disentangle::Method::shapleyvec;
  disentangle::Hyperparams hyperparams;
  std::uint64_t seed = 0;
  /// Couple a fresh dataset of this size when none is stored.
  std::size_t n = 1000;
  /// Run evaluation afterwards so colorways can use alpha="optimal".
  bool evaluate = true;
};

FitRequest parse_fit_request(const nlohmann::json& j);

/// Application layer shared by the CLI and the HTTP service.
class Studio {
 public:
  Studio(WorkspaceStore& store, StudioConfig cfg = {});
  ~Studio();
  Studio(const Studio&) = delete;
  Studio& operator=(const Studio&) = delete;

  WorkspaceStore& store() { return store_; }
  const StudioConfig& config() const { return cfg_; }

  void register_backend(std::shared_ptr<const EditBackend> backend);
  std::shared_ptr<const EditBackend> backend(const std::string& id) const;
  std::vector<std::string> backend_ids() const;

  bool has_codebook() const;
  colorlab::ColorCodebook codebook() const;
  void save_codebook(const colorlab::ColorCodebook& book);

  disentangle::LatentDataset couple(const std::string& backend_id, std::size_t n, std::uint64_t seed);
  std::optional<disentangle::LatentDataset> dataset(const std::string& backend_id) const;

  /// Latest version, or nullopt when the method was never fitted.
  std::optional<disentangle::DirectionSet> directions(const std::string& backend_id,
                                                      disentangle::Method method) const;
  std::optional<disentangle::DirectionSet> directions(const std::string& backend_id, disentangle::Method method,
                                                      int version) const;
  /// Persists `set` as a new version (assigned here) and returns it.
  int save_directions(disentangle::DirectionSet& set);

  disentangle::DirectionSet fit(const FitRequest& req, numerics::AttributionAudit* audit = nullptr);
  /// Scores the latest direction set and stores alpha_optimal in a new version.
  evalkit::EvalReport evaluate(const std::string& backend_id, disentangle::Method method);

  PatternRecord create_pattern(const std::string& backend_id, std::uint64_t seed);
  PatternRecord pattern(const std::string& id) const;
  ImageBuffer render(const PatternRecord& r) const;
  std::vector<std::uint8_t> pattern_png(const std::string& id) const;
  ColorwayResult create_colorway(const ColorwayRequest& req);

  Board save_board(Board board);
  Board load_board(const std::string& id) const;
  std::vector<Board> boards() const;
  ImageBuffer export_board(const std::string& id) const;

  /// Starts a background fit; throws ConflictError while one runs for the
  /// same backend.
  std::string start_fit_job(const FitRequest& req);
  JobStatus job(const std::string& id) const;
  /// Blocks until every background job finished.
  void wait_jobs();

 private:
  std::shared_ptr<const EditBackend> require_backend(const std::string& id) const;
  PatternRecord persist_pattern(PatternRecord r, const ImageBuffer& img);
  const disentangle::DirectionSpec& require_direction(const disentangle::DirectionSet& set, int color_id) const;

  WorkspaceStore& store_;
  StudioConfig cfg_;
  std::map<std::string, std::shared_ptr<const EditBackend>> backends_;

  mutable std::mutex jobs_mutex_;
  std::map<std::string, JobStatus> jobs_;
  std::vector<std::thread> workers_;
  std::uint64_t next_job_ = 1;
  std::mutex fit_mutex_;
};

}  // namespace colorwai::studio
