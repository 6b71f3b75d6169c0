#pragma once
// Maps the conventional <nlohmann/json.hpp> spelling onto the vendored
// single header.
#include <json.hpp>
