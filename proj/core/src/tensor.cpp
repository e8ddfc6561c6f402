// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include "vgru/tensor.hpp"

namespace vgru {

std::atomic<long long> AllocStats::current{0};
std::atomic<long long> AllocStats::peak{0};

namespace {
std::atomic<bool> finite_checks{false};
}

bool finite_checks_enabled() { return finite_checks.load(std::memory_order_relaxed); }
void set_finite_checks(bool on) { finite_checks.store(on, std::memory_order_relaxed); }

}  // namespace vgru
