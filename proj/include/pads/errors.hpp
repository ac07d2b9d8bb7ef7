#ifndef PADS_ERRORS_HPP
#define PADS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pads {

/// Invalid configuration (bad value, unknown key, out-of-range id). Exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// API misuse, e.g. registering an entity after the run started.
class LifecycleError : public std::logic_error {
public:
    explicit LifecycleError(const std::string& what) : std::logic_error(what) {}
};

/// A behavior handler failed; the run aborts with entity and step context. Exit code 3.
class EntityFault : public std::runtime_error {
public:
    EntityFault(std::uint64_t entity, std::uint64_t step, const std::string& what)
        : std::runtime_error("entity " + std::to_string(entity) + " faulted at step " +
                             std::to_string(step) + ": " + what),
          entity_(entity), step_(step) {}
    std::uint64_t entity() const { return entity_; }
    std::uint64_t step() const { return step_; }

private:
    std::uint64_t entity_;
    std::uint64_t step_;
};

/// An interaction addressed an unknown entity; indicates registry corruption. Exit code 3.
class RoutingFault : public std::runtime_error {
public:
    explicit RoutingFault(const std::string& what) : std::runtime_error(what) {}
};

/// Entity state failed to serialize or deserialize during migration. Exit code 3.
class MigrationFault : public std::runtime_error {
public:
    explicit MigrationFault(const std::string& what) : std::runtime_error(what) {}
};

/// Broken link, unreachable peer, or mid-run disconnect. Exit code 4.
class TransportFault : public std::runtime_error {
public:
    explicit TransportFault(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed wire frame (bad magic, bad version, truncation).
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

/// pads-compare input mismatch (different step counts or shapes).
class ComparisonError : public std::runtime_error {
public:
    explicit ComparisonError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pads

#endif // PADS_ERRORS_HPP
