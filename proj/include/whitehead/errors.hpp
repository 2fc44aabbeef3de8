#ifndef WHITEHEAD_ERRORS_HPP
#define WHITEHEAD_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace whitehead {

/// Malformed textual input (tree grammar, graph file, move script).
/// `pos` is a 0-based offset into the input where parsing failed, when known.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg, std::size_t pos = std::string::npos)
        : std::runtime_error(msg), pos_(pos) {}
    std::size_t pos() const { return pos_; }

private:
    std::size_t pos_;
};

/// A size/complexity guard refused the request before any work started.
class GuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an operation does not hold for the given arguments.
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal invariant failed; this signals a bug or a broken bound,
/// never a user error.
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An EdgeRef from an older tree version was used after a mutation.
class StaleEdgeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace whitehead

#endif
