#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hux {

// Base for all library errors so callers can catch hux failures as one family.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Frame ingestion received a frame_id that does not increase the stream.
class RejectedFrame : public Error {
  public:
    using Error::Error;
};

// A scheduling call observed time moving backwards.
class ClockRegression : public Error {
  public:
    using Error::Error;
};

// An event log's stated before-counts disagree with the running reconstruction.
class InconsistentLog : public Error {
  public:
    InconsistentLog(std::int64_t event_id, const std::string& what)
        : Error(what), event_id(event_id) {}
    std::int64_t event_id;
};

class NoGazeData : public Error {
  public:
    using Error::Error;
};

class NoFrame : public Error {
  public:
    using Error::Error;
};

// Gaze point falls outside the frame; callers degrade to a scene-only turn.
class OutOfScene : public Error {
  public:
    using Error::Error;
};

class EmptyUtterance : public Error {
  public:
    using Error::Error;
};

class BackendUnavailable : public Error {
  public:
    using Error::Error;
};

class UnresolvableImage : public Error {
  public:
    using Error::Error;
};

class MissingCaption : public Error {
  public:
    using Error::Error;
};

class PersistenceFailure : public Error {
  public:
    using Error::Error;
};

// Store file could not be decoded; record_index is the zero-based failing line.
class CorruptStore : public Error {
  public:
    CorruptStore(std::size_t record_index, const std::string& what)
        : Error(what), record_index(record_index) {}
    std::size_t record_index;
};

class EmptyQuery : public Error {
  public:
    using Error::Error;
};

class AmbiguousTool : public Error {
  public:
    using Error::Error;
};

class NoAnnotations : public Error {
  public:
    using Error::Error;
};

// A report was scored against the oracle of a different scenario.
class ScriptMismatch : public Error {
  public:
    using Error::Error;
};

// Scenario or config file failed validation; line is 1-based, 0 if unknown.
class ScenarioError : public Error {
  public:
    ScenarioError(std::size_t line, const std::string& what)
        : Error(what), line(line) {}
    std::size_t line;
};

class ConfigError : public Error {
  public:
    ConfigError(const std::string& field, const std::string& what)
        : Error(what), field(field) {}
    std::string field;
};

} // namespace hux
