#ifndef MLAB_ERRORS_HPP
#define MLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mlab {

// Every precondition violation in the library surfaces as mlab::Error.
// Messages start with a stable "what:" prefix so tests and the replay tool
// can match on them without parsing prose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool ok, const char* msg) {
    if (!ok) fail(msg);
}

} // namespace mlab

#endif
