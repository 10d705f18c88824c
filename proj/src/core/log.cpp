#include "pathrouter/core/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

#include "pathrouter/core/text.hpp"

namespace pathrouter::log {

namespace {

Level initial_level() noexcept {
    const char* env = std::getenv("PATHROUTER_LOG");
    if (!env) return Level::Warn;
    const std::string v = text::to_lower(env);
    if (v == "debug") return Level::Debug;
    if (v == "info") return Level::Info;
    if (v == "error") return Level::Error;
    if (v == "off") return Level::Off;
    return Level::Warn;
}

std::atomic<Level>& threshold() noexcept {
    static std::atomic<Level> lvl{initial_level()};
    return lvl;
}

std::string_view tag(Level l) noexcept {
    switch (l) {
        case Level::Debug: return "debug";
        case Level::Info: return "info";
        case Level::Warn: return "warn";
        case Level::Error: return "error";
        case Level::Off: return "off";
    }
    return "?";
}

}  // namespace

void set_level(Level l) noexcept { threshold().store(l); }
Level level() noexcept { return threshold().load(); }

void write(Level l, std::string_view message) {
    if (l < threshold().load() || l == Level::Off) return;
    static std::mutex mu;
    std::lock_guard lock(mu);
    std::clog << "[pathrouter " << tag(l) << "] " << message << '\n';
}

}  // namespace pathrouter::log
