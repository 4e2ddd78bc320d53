#pragma once

namespace adverin {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Level comes from ADVERIN_LOG (error|warn|info|debug), read once; the
// default is warn. Messages go to stderr.
LogLevel log_level();

#if defined(__GNUC__)
#define ADVERIN_PRINTF(a, b) __attribute__((format(printf, a, b)))
#else
#define ADVERIN_PRINTF(a, b)
#endif

void log_error(const char* fmt, ...) ADVERIN_PRINTF(1, 2);
void log_warn(const char* fmt, ...) ADVERIN_PRINTF(1, 2);
void log_info(const char* fmt, ...) ADVERIN_PRINTF(1, 2);
void log_debug(const char* fmt, ...) ADVERIN_PRINTF(1, 2);

#undef ADVERIN_PRINTF

}  // namespace adverin
