#pragma once

#include <functional>
#include <string>
#include <vector>

namespace glab {

/// Receives non-fatal diagnostics (hypothesis violations, coarse steps, ...).
using WarningHandler = std::function<void(const std::string&)>;

/// Reports a warning through the installed handler (stderr by default).
void warn(const std::string& message);

/// Installs a handler and returns the previous one. Pass an empty handler to
/// restore the default.
WarningHandler set_warning_handler(WarningHandler handler);

/// Collects warnings for the lifetime of the object.
class WarningCapture {
 public:
  WarningCapture();
  ~WarningCapture();
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(const std::string& needle) const;

 private:
  std::vector<std::string> messages_;
  WarningHandler previous_;
};

}  // namespace glab
