#include "csqe/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace csqe::log {
namespace {

std::atomic<Level> g_level{Level::Warn};
std::mutex g_mutex;

const char* tag(Level level) {
    switch (level) {
        case Level::Error: return "error";
        case Level::Warn: return "warn";
        case Level::Info: return "info";
        case Level::Debug: return "debug";
    }
    return "?";
}

}  // namespace

void set_level(Level level) { g_level.store(level); }

Level level() { return g_level.load(); }

void write(Level level, std::string_view message) {
    std::lock_guard<std::mutex> lock(g_mutex);
    std::fprintf(stderr, "[%s] %.*s\n", tag(level), static_cast<int>(message.size()),
                 message.data());
}

}  // namespace csqe::log
