#pragma once

#include "colorwai/studio.hpp"

namespace httplib {
class Server;
}

namespace colorwai::studio {

/// Registers the /api routes on `server`. All bodies are JSON except the PNG
/// image endpoints; errors come back as {"error": message} with 400 for
/// validation errors, 404 for missing resources, 409 for conflicts and 500
/// otherwise.
void install_routes(httplib::Server& server, Studio& studio);

}  // namespace colorwai::studio
