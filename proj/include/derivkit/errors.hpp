#pragma once

#include <stdexcept>
#include <string>

namespace derivkit {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unknown rule, relation or transform name.
class RegistryError : public Error {
public:
    explicit RegistryError(const std::string& msg) : Error("registry: " + msg) {}
};

/// A caller broke an operation's precondition (wrong output shape, bad letter, missing meta key).
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& msg) : Error("contract: " + msg) {}
};

/// A case could not be produced: transform precondition failed or a corpus ran dry.
class GenerationError : public Error {
public:
    explicit GenerationError(const std::string& msg) : Error("generation: " + msg) {}
};

/// The oracle model was handed a prompt it does not recognise.
class PromptParseError : public Error {
public:
    explicit PromptParseError(const std::string& msg) : Error("prompt parse: " + msg) {}
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& msg) : Error("transport: " + msg) {}
};

class ProviderError : public Error {
public:
    ProviderError(int status, const std::string& body_excerpt)
        : Error("provider returned HTTP " + std::to_string(status) + ": " + body_excerpt),
          status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& msg) : Error("protocol: " + msg) {}
};

/// Persisted file is truncated, corrupt, or does not match its manifest.
class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& msg) : Error("integrity: " + msg) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

}  // namespace derivkit
