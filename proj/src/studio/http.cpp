#include "colorwai/http.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "colorwai/error.hpp"
#include "colorwai/png_io.hpp"

namespace colorwai::studio {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, {{"error", msg}}, status);
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error&) {
    throw ValidationError("request body is not valid JSON");
  }
}

/// Wraps a handler so that library exceptions map to HTTP statuses.
httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const ValidationError& e) {
      send_error(res, 400, e.what());
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const ConflictError& e) {
      send_error(res, 409, e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("malformed field: ") + e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_error(res, 500, e.what());
    }
  };
}

json colorway_json(const ColorwayResult& r) {
  json j = r.record;
  j["achieved_color"] = r.achieved_color;
  j["ssim"] = r.ssim;
  j["alpha"] = r.alpha;
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace

void install_routes(httplib::Server& server, Studio& studio) {
  server.Get("/api/backends", guarded([&](const httplib::Request&, httplib::Response& res) {
               json out = json::array();
               for (const auto& id : studio.backend_ids()) {
                 const auto b = studio.backend(id);
                 json fitted = json::array();
                 for (auto m : {disentangle::Method::interfacegan, disentangle::Method::stylespace,
                                disentangle::Method::shapleyvec}) {
                   if (const auto set = studio.directions(id, m))
                     fitted.push_back({{"method", disentangle::to_string(m)}, {"version", set->version}});
                 }
                 out.push_back({{"id", id},
                                {"space_tag", b->space_tag()},
                                {"latent_dim", b->latent_dim()},
                                {"fitted", fitted}});
               }
               send_json(res, out);
             }));

  server.Get("/api/codebook", guarded([&](const httplib::Request&, httplib::Response& res) {
               send_json(res, studio.codebook());
             }));

  server.Get("/api/directions", guarded([&](const httplib::Request& req, httplib::Response& res) {
               if (!req.has_param("backend")) throw ValidationError("backend parameter required");
               const auto backend = req.get_param_value("backend");
               const auto method = disentangle::parse_method(
                   req.has_param("method") ? req.get_param_value("method") : std::string("shapleyvec"));
               std::optional<disentangle::DirectionSet> set;
               if (req.has_param("version")) {
                 int version = 0;
                 try {
                   version = std::stoi(req.get_param_value("version"));
                 } catch (const std::exception&) {
                   throw ValidationError("version must be an integer");
                 }
                 set = studio.directions(backend, method, version);
               } else {
                 set = studio.directions(backend, method);
               }
               if (!set) throw NotFoundError("directions not fitted");
               send_json(res, *set);
             }));

  server.Post("/api/patterns", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                if (!body.is_object() || !body.contains("seed") || !body.at("seed").is_number_unsigned())
                  throw ValidationError("seed must be a non-negative integer");
                const auto backend = body.value("backend", std::string("texgen"));
                send_json(res, studio.create_pattern(backend, body.at("seed").get<std::uint64_t>()));
              }));

  server.Get(R"(/api/patterns/([A-Za-z0-9_-]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, studio.pattern(req.matches[1]));
             }));

  server.Get(R"(/api/patterns/([A-Za-z0-9_-]+)/image\.png)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               const auto bytes = studio.pattern_png(req.matches[1]);
               res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
             }));

  server.Post(R"(/api/patterns/([A-Za-z0-9_-]+)/colorway)",
              guarded([&](const httplib::Request& req, httplib::Response& res) {
                auto body = parse_body(req);
                if (!body.is_object()) throw ValidationError("colorway request must be an object");
                body["pattern_id"] = req.matches[1];
                send_json(res, colorway_json(studio.create_colorway(body.get<ColorwayRequest>())));
              }));

  server.Get("/api/boards", guarded([&](const httplib::Request&, httplib::Response& res) {
               send_json(res, studio.boards());
             }));

  server.Post("/api/boards", guarded([&](const httplib::Request& req, httplib::Response& res) {
                auto board = parse_body(req).get<Board>();
                board.id.clear();
                send_json(res, studio.save_board(std::move(board)), 201);
              }));

  server.Get(R"(/api/boards/([A-Za-z0-9_-]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, studio.load_board(req.matches[1]));
             }));

  server.Put(R"(/api/boards/([A-Za-z0-9_-]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
               auto board = parse_body(req).get<Board>();
               board.id = req.matches[1];
               send_json(res, studio.save_board(std::move(board)));
             }));

  server.Get(R"(/api/boards/([A-Za-z0-9_-]+)/export\.png)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               const auto bytes = encode_png(studio.export_board(req.matches[1]));
               res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
             }));

  server.Post("/api/jobs/fit", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto id = studio.start_fit_job(parse_fit_request(parse_body(req)));
                send_json(res, {{"id", id}}, 202);
              }));

  server.Get(R"(/api/jobs/([A-Za-z0-9_-]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, studio.job(req.matches[1]));
             }));
}

}  // namespace colorwai::studio
