#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace argmerge {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownArgument : public Error {
public:
    explicit UnknownArgument(std::string id)
        : Error("unknown argument '" + id + "'"), id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

/// A framework construction request that would break a BAF/QBAF invariant.
class InvalidFramework : public Error {
public:
    using Error::Error;
};

/// A value outside [0,1], or a non-finite value, passed where a score is expected.
class DomainError : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class ZeroVector : public Error {
public:
    using Error::Error;
};

/// Failure inside an embedding provider. Carries the batch that failed.
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, std::vector<std::string> texts)
        : Error(what), texts_(std::move(texts)) {}
    const std::vector<std::string>& texts() const noexcept { return texts_; }

private:
    std::vector<std::string> texts_;
};

class ClaimMismatch : public Error {
public:
    using Error::Error;
};

/// Same cluster pair lifted as both an attack and a support.
class RelationConflict : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class MissingPrediction : public Error {
public:
    MissingPrediction(const std::string& what, std::vector<std::string> ids)
        : Error(what), ids_(std::move(ids)) {}
    const std::vector<std::string>& claim_ids() const noexcept { return ids_; }

private:
    std::vector<std::string> ids_;
};

class ClaimSetMismatch : public Error {
public:
    ClaimSetMismatch(const std::string& what, std::vector<std::string> diff)
        : Error(what), diff_(std::move(diff)) {}
    const std::vector<std::string>& symmetric_difference() const noexcept { return diff_; }

private:
    std::vector<std::string> diff_;
};

} // namespace argmerge
