// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include "vgru/scan.hpp"

#include <atomic>

namespace vgru {

namespace {
std::atomic<bool> compose_fault{false};
}

bool scan_compose_fault() { return compose_fault.load(std::memory_order_relaxed); }
void set_scan_compose_fault(bool on) { compose_fault.store(on, std::memory_order_relaxed); }

}  // namespace vgru
