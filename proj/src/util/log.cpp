#include "pushrl/util/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>

#include "pushrl/util/time.hpp"

namespace pushrl::log {

namespace {

Level initial_level() {
    if (const char* env = std::getenv("PUSHRL_LOG_LEVEL")) {
        Level parsed;
        if (level_from_string(env, parsed)) return parsed;
    }
    return Level::warn;
}

std::atomic<Level> g_level{initial_level()};
std::mutex g_write_mutex;

const char* tag(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
        default: return "?";
    }
}

}  // namespace

void set_level(Level level) { g_level.store(level, std::memory_order_relaxed); }

Level level() { return g_level.load(std::memory_order_relaxed); }

bool level_from_string(const std::string& s, Level& out) {
    if (s == "debug") out = Level::debug;
    else if (s == "info") out = Level::info;
    else if (s == "warn") out = Level::warn;
    else if (s == "error") out = Level::error;
    else if (s == "off") out = Level::off;
    else return false;
    return true;
}

void write(Level level, const std::string& msg) {
    if (level < g_level.load(std::memory_order_relaxed)) return;
    std::lock_guard<std::mutex> lock(g_write_mutex);
    std::fprintf(stderr, "[%.3f] [%s] %s\n", now_ns() * 1e-9, tag(level),
                 msg.c_str());
}

}  // namespace pushrl::log
