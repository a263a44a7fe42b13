#include "tap/caps.hpp"

#include <cstdlib>
#include <sstream>
#include <string>

#include "tap/error.hpp"

namespace tap {

namespace {

Caps parse_env() {
    Caps c;
    const char* raw = std::getenv("TAP_CAPS");
    if (!raw || !*raw) return c;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        check(eq != std::string::npos, "TAP_CAPS entries must look like key=value",
              ErrorKind::Malformed);
        std::string key = item.substr(0, eq);
        long long value = 0;
        try {
            value = std::stoll(item.substr(eq + 1));
        } catch (const std::exception&) {
            fail(ErrorKind::Malformed, "TAP_CAPS value for '" + key + "' is not an integer");
        }
        check(value > 0, "TAP_CAPS values must be positive", ErrorKind::Malformed);
        if (key == "classes")
            c.max_classes = static_cast<int>(value);
        else if (key == "branches")
            c.branch_cap = value;
        else
            fail(ErrorKind::Malformed, "unknown TAP_CAPS key '" + key + "'");
    }
    return c;
}

} // namespace

const Caps& caps() {
    static const Caps c = parse_env();
    return c;
}

} // namespace tap
