#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skelanon
{

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error
{
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  /// Short machine-readable category, e.g. "schema" or "config".
  virtual std::string_view kind() const noexcept { return "error"; }
};

class GeometryError : public Error
{
public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "geometry"; }
};

class ConfigError : public Error
{
public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "config"; }
};

/// Interchange file does not follow the documented schema.
class SchemaError : public Error
{
public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "schema"; }
};

/// Label data is inconsistent (unmappable face label, bad links, ...).
class ValidationError : public Error
{
public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "validation"; }
};

class IoError : public Error
{
public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "io"; }
};

}  // namespace skelanon
