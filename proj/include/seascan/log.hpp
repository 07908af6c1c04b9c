#ifndef SEASCAN_LOG_HPP
#define SEASCAN_LOG_HPP

#include <iostream>
#include <string>
#include <string_view>

#include <json.hpp>

namespace seascan {

// Structured warnings/events as JSON lines on stderr.
inline void log_json(std::string_view level, std::string_view event,
                     const nlohmann::json& fields = {}) {
    nlohmann::json j;
    j["level"] = level;
    j["event"] = event;
    for (auto it = fields.begin(); it != fields.end(); ++it) j[it.key()] = it.value();
    std::cerr << j.dump() << "\n";
}

}  // namespace seascan

#endif  // SEASCAN_LOG_HPP
