#pragma once

#include <stdexcept>
#include <string>

namespace vrdkit {

/// Broad failure category. The CLI maps each category to one exit status.
enum class ErrorCategory {
  Usage,  // bad arguments or invalid configuration
  Data,   // malformed input, failed validation, aborted script
  Io,     // missing file, failed write
};

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class IoError : public Error {
 public:
  enum class Kind { FileMissing, IoFailure };

  IoError(Kind kind, std::string path, const std::string& what)
      : Error(ErrorCategory::Io, what), kind_(kind), path_(std::move(path)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& path() const noexcept { return path_; }

 private:
  Kind kind_;
  std::string path_;
};

/// A name that does not resolve against a master list (or is retired).
class UnknownNameError : public Error {
 public:
  explicit UnknownNameError(std::string name, const std::string& context = "")
      : Error(ErrorCategory::Data,
              "unknown name '" + name + "'" + (context.empty() ? "" : " in " + context)),
        name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ImageNotFoundError : public Error {
 public:
  explicit ImageNotFoundError(std::string image)
      : Error(ErrorCategory::Data, "image not found: " + image), image_(std::move(image)) {}

  const std::string& image() const noexcept { return image_; }

 private:
  std::string image_;
};

}  // namespace vrdkit
