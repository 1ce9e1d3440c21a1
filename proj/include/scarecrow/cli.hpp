#pragma once

#include <atomic>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "scarecrow/config.hpp"
#include "scarecrow/detector.hpp"

namespace scarecrow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Set by the SIGINT handler; `monitor` stops ingesting when it flips.
std::atomic<bool>& interrupt_flag();

/// Stub script if configured, else weights file, else the seeded default net.
std::unique_ptr<Detector> make_detector(const GlobalConfig& cfg);

std::string version_string();

}  // namespace scarecrow
