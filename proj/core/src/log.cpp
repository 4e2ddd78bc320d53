#include "adverin/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace adverin {

namespace {

LogLevel parse_level() {
    const char* env = std::getenv("ADVERIN_LOG");
    if (env == nullptr) {
        return LogLevel::warn;
    }
    if (std::strcmp(env, "error") == 0) return LogLevel::error;
    if (std::strcmp(env, "warn") == 0) return LogLevel::warn;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
    std::fprintf(stderr, "[warn] ADVERIN_LOG='%s' not recognized, using warn\n", env);
    return LogLevel::warn;
}

void emit(LogLevel level, const char* tag, const char* fmt, va_list args) {
    if (level > log_level()) {
        return;
    }
    std::fprintf(stderr, "[%s] ", tag);
    std::vfprintf(stderr, fmt, args);
    std::fputc('\n', stderr);
}

}  // namespace

LogLevel log_level() {
    static const LogLevel level = parse_level();
    return level;
}

#define ADVERIN_DEFINE_LOG(name, level, tag)          \
    void name(const char* fmt, ...) {                 \
        va_list args;                                 \
        va_start(args, fmt);                          \
        emit(level, tag, fmt, args);                  \
        va_end(args);                                 \
    }

ADVERIN_DEFINE_LOG(log_error, LogLevel::error, "error")
ADVERIN_DEFINE_LOG(log_warn, LogLevel::warn, "warn")
ADVERIN_DEFINE_LOG(log_info, LogLevel::info, "info")
ADVERIN_DEFINE_LOG(log_debug, LogLevel::debug, "debug")

#undef ADVERIN_DEFINE_LOG

}  // namespace adverin
