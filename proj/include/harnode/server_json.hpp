#pragma once

// JSON shapes of the control API payloads.

#include <json.hpp>

#include "harnode/server.hpp"

namespace harnode::server {

nlohmann::json status_to_json(const NodeStatus& s);
nlohmann::json session_to_json(const Session& s);

/// Accepts {"1": "right_foot/front"} or {"1": {"location": ..., "orientation": ...}}.
/// Throws InvalidArgument on unknown names or ids outside 0..255.
std::map<std::uint8_t, BodyPosition> parse_position_map(const nlohmann::json& j);
BodyPosition parse_position_json(const nlohmann::json& j);

}  // namespace harnode::server
