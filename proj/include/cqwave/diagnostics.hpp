#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace cqwave::diag {

// Non-fatal notices (amplification warnings, nudged parameters, dropped points).
// The default sink writes to stderr; tests and the CLI may install their own.

using Sink = std::function<void(const std::string&)>;

namespace detail {
inline std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}
inline Sink& sink_slot() {
  static Sink s = [](const std::string& msg) { std::cerr << "cqwave: " << msg << '\n'; };
  return s;
}
}  // namespace detail

/// Installs a new sink and returns the previous one.
inline Sink set_sink(Sink sink) {
  std::lock_guard lock(detail::sink_mutex());
  return std::exchange(detail::sink_slot(), std::move(sink));
}

inline void emit(const std::string& msg) {
  std::lock_guard lock(detail::sink_mutex());
  if (detail::sink_slot()) detail::sink_slot()(msg);
}

/// RAII capture of diagnostics, restoring the previous sink on destruction.
class ScopedCapture {
 public:
  ScopedCapture()
      : previous_(set_sink([this](const std::string& m) { messages_.push_back(m); })) {}
  ~ScopedCapture() { set_sink(std::move(previous_)); }
  ScopedCapture(const ScopedCapture&) = delete;
  ScopedCapture& operator=(const ScopedCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(const std::string& needle) const {
    for (const auto& m : messages_)
      if (m.find(needle) != std::string::npos) return true;
    return false;
  }

 private:
  std::vector<std::string> messages_;
  Sink previous_;
};

}  // namespace cqwave::diag
