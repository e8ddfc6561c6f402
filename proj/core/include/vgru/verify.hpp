// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.
//
// Oracle suites: scan equivalence against the sequential reference, the
// closed-form block expansion, and finite-difference gradient checks.
// Deterministic given (precision, seed); failing cases are serialized to a
// reproduction file.

#pragma once

#include <functional>

#include "vgru/checkpoint.hpp"
#include "vgru/flops.hpp"
#include "vgru/train.hpp"

namespace vgru {

enum class Precision { f32, f64 };

inline const char* precision_name(Precision p) {
  return p == Precision::f32 ? "f32" : "f64";
}

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  double max_err = 0;
  double tolerance = 0;
  bool pass = false;
  std::string note;
};

struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Finite-difference helpers

// Central difference of eval() wrt one scalar slot.
template <typename T, typename F>
double central_diff(T* slot, F&& eval, double eps) {
  const T saved = *slot;
  *slot = T(double(saved) + eps);
  const double up = eval();
  *slot = T(double(saved) - eps);
  const double dn = eval();
  *slot = saved;
  return (up - dn) / (2.0 * eps);
}

inline double rel_err(double a, double b, double floor = 1e-6) {
  const double d = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / d;
}

// Checks a sampled subset of entries of one parameter tensor against
// central differences. Returns the worst relative error seen.
template <typename T, typename F>
double fd_check_param(Param<T>& p, F&& eval, const Tensor<T>& analytic,
                      double eps, std::size_t max_entries = 24) {
  const std::size_t n = p.value.numel();
  const std::size_t step = n <= max_entries ? 1 : n / max_entries;
  double worst = 0;
  for (std::size_t i = 0; i < n; i += step) {
    const double fd = central_diff(&p.value[i], eval, eps);
    worst = std::max(worst, rel_err(fd, double(analytic[i])));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Suite runners. `repro_dir` empty disables failure serialization.

template <typename T>
SuiteResult suite_compose(std::uint64_t seed) {
  SuiteResult r{"compose-laws"};
  r.tolerance = sizeof(T) == 8 ? 1e-12 : 1e-5;
  Rng rng = stream(seed, "verify.compose");
  for (int c = 0; c < 100; ++c) {
    const std::size_t lanes = 1 + rng.below(6);
    auto rand_pair = [&] {
      ScanPair<T> p{Tensor<T>({1, lanes}), Tensor<T>({1, lanes})};
      for (std::size_t i = 0; i < lanes; ++i) {
        p.a[i] = T(rng.uniform(0.0, 1.0));
        p.b[i] = T(rng.uniform(-2.0, 2.0));
      }
      return p;
    };
    ScanPair<T> p = rand_pair(), q = rand_pair(), s = rand_pair();
    ScanPair<T> id = scan_identity<T>(1, lanes);

    ScanPair<T> left = compose(compose(p, q), s);
    ScanPair<T> right = compose(p, compose(q, s));
    r.max_err = std::max(r.max_err, max_rel_diff(left.a, right.a));
    r.max_err = std::max(r.max_err, max_rel_diff(left.b, right.b));

    ScanPair<T> idl = compose(id, q);
    ScanPair<T> idr = compose(q, id);
    r.max_err = std::max({r.max_err, max_rel_diff(idl.a, q.a, 1e-300),
                          max_rel_diff(idl.b, q.b, 1e-300),
                          max_rel_diff(idr.a, q.a, 1e-300),
                          max_rel_diff(idr.b, q.b, 1e-300)});
    r.cases += 6;
  }
  r.pass = r.max_err <= r.tolerance;
  return r;
}

template <typename T>
ScanPair<T> random_scan_pair(std::size_t steps, std::size_t lanes, Rng& rng) {
  ScanPair<T> p{Tensor<T>({steps, lanes}), Tensor<T>({steps, lanes})};
  for (std::size_t i = 0; i < steps * lanes; ++i) {
    p.a[i] = T(rng.uniform(0.0, 1.0));  // gate-shaped decay
    p.b[i] = T(rng.uniform(-2.0, 2.0));
  }
  return p;
}

template <typename T>
SuiteResult suite_scan_equivalence(std::uint64_t seed,
                                   const std::string& repro_dir) {
  SuiteResult r{"scan-equivalence"};
  r.tolerance = sizeof(T) == 8 ? 1e-10 : 1e-5;
  Rng rng = stream(seed, "verify.scan");
  const std::size_t lengths[] = {1, 2, 3, 17, 256, 4096};
  for (std::size_t t : lengths) {
    const int reps = 34;
    for (int c = 0; c < reps; ++c) {
      const std::size_t lanes = 1 + rng.below(8);
      ScanPair<T> p = random_scan_pair<T>(t, lanes, rng);
      Tensor<T> h0({lanes});
      if (c % 2 == 0)
        for (std::size_t l = 0; l < lanes; ++l) h0[l] = T(rng.uniform(-1.0, 1.0));
      Tensor<T> ref = scan_sequential(p, h0);
      Tensor<T> par = scan_parallel(p, h0);
      const double err = max_rel_diff(ref, par);
      if (err > r.max_err) r.max_err = err;
      ++r.cases;
      if (err > r.tolerance && !repro_dir.empty() && r.note.empty()) {
        Checkpoint ck;
        ck.put("a", p.a);
        ck.put("b", p.b);
        ck.put("h0", h0);
        ck.put("expected", ref);
        ck.put("actual", par);
        const std::string path = repro_dir + "/repro_scan_equivalence.vgru";
        ck.save(path);
        r.note = "failing case written to " + path;
      }
    }
  }
  r.pass = r.max_err <= r.tolerance;
  return r;
}

template <typename T>
SuiteResult suite_scan_bounded(std::uint64_t seed) {
  SuiteResult r{"scan-boundedness"};
  r.tolerance = sizeof(T) == 8 ? 1e-9 : 1e-4;  // slack over the exact bound
  Rng rng = stream(seed, "verify.bound");
  for (int c = 0; c < 50; ++c) {
    const std::size_t t = 1 + rng.below(64), lanes = 1 + rng.below(4);
    ScanPair<T> p{Tensor<T>({t, lanes}), Tensor<T>({t, lanes})};
    Tensor<T> h0({lanes});
    double bound = 0;
    for (std::size_t l = 0; l < lanes; ++l) {
      h0[l] = T(rng.uniform(-1.5, 1.5));
      bound = std::max(bound, std::abs(double(h0[l])));
    }
    for (std::size_t i = 0; i < t * lanes; ++i) {
      const double z = rng.uniform(0.0, 1.0);
      const double cand = rng.uniform(-3.0, 3.0);
      p.a[i] = T(1.0 - z);
      p.b[i] = T(z * cand);
      bound = std::max(bound, std::abs(cand));
    }
    Tensor<T> h = scan_parallel(p, h0);
    const double excess = (double(max_abs(h)) - bound) / std::max(bound, 1.0);
    if (excess > r.max_err) r.max_err = excess;
    ++r.cases;
  }
  if (r.max_err < 0) r.max_err = 0;
  r.pass = r.max_err <= r.tolerance;
  return r;
}

template <typename T>
TwoDGRUBlock<T> random_block(std::size_t channels, Rng& rng, bool ffn = true) {
  TwoDGRUBlock<T> blk;
  blk.setup("blk", BlockSpec{channels, 3, 2.0, ffn});
  blk.init(rng);
  // jitter the norm parameters so they are not at the identity
  for (std::size_t i = 0; i < channels; ++i) {
    blk.norm1_g.value[i] = T(1.0 + 0.3 * rng.uniform(-1.0, 1.0));
    blk.norm1_b.value[i] = T(0.2 * rng.uniform(-1.0, 1.0));
    blk.norm2_g.value[i] = T(1.0 + 0.3 * rng.uniform(-1.0, 1.0));
    blk.norm2_b.value[i] = T(0.2 * rng.uniform(-1.0, 1.0));
  }
  for (std::size_t i = 0; i < blk.dw_b.value.numel(); ++i)
    blk.dw_b.value[i] = T(0.1 * rng.uniform(-1.0, 1.0));
  for (std::size_t i = 0; i < channels; ++i) {
    blk.cell_fwd.b_z.value[i] = T(0.5 * rng.uniform(-1.0, 1.0));
    blk.cell_fwd.b_h.value[i] = T(0.5 * rng.uniform(-1.0, 1.0));
    blk.cell_bwd.b_z.value[i] = T(0.5 * rng.uniform(-1.0, 1.0));
    blk.cell_bwd.b_h.value[i] = T(0.5 * rng.uniform(-1.0, 1.0));
  }
  return blk;
}

template <typename T>
SuiteResult suite_closed_form(std::uint64_t seed, const std::string& repro_dir,
                              std::size_t instances = 50) {
  SuiteResult r{"closed-form-equivalence"};
  r.tolerance = sizeof(T) == 8 ? 1e-10 : 1e-4;
  Rng rng = stream(seed, "verify.closedform");
  for (std::size_t c = 0; c < instances; ++c) {
    const std::size_t h = 1 + rng.below(4), w = 1 + rng.below(5);
    const std::size_t ch = 1 + rng.below(4), b = 1 + rng.below(2);
    TwoDGRUBlock<T> blk = random_block<T>(ch, rng);
    Tensor<T> x({b, h, w, ch});
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = T(rng.uniform(-2.0, 2.0));

    Tensor<T> core;
    (void)block_forward(blk, x, static_cast<BlockCache<T>*>(nullptr), &core);
    Tensor<T> oracle = closed_form_core(blk, x);
    const double err = max_rel_diff(core, oracle);
    if (err > r.max_err) r.max_err = err;
    ++r.cases;
    if (err > r.tolerance && !repro_dir.empty() && r.note.empty()) {
      Checkpoint ck;
      ck.put("f_in", x);
      ck.put("expected", oracle);
      ck.put("actual", core);
      const std::string path = repro_dir + "/repro_closed_form.vgru";
      ck.save(path);
      r.note = "failing case written to " + path;
    }
  }
  r.pass = r.max_err <= r.tolerance;
  return r;
}

// Gradient suites always run in 64-bit; central differences in 32-bit
// cannot resolve the stated tolerances.
SuiteResult suite_mingru_gradients(std::uint64_t seed, std::size_t instances = 50);
SuiteResult suite_block_gradients(std::uint64_t seed);
SuiteResult suite_backbone_gradients(std::uint64_t seed);

std::vector<SuiteResult> run_verify_suites(Precision p, std::uint64_t seed,
                                           const std::string& repro_dir);
std::string format_verify_report(const std::vector<SuiteResult>& suites,
                                 Precision p, std::uint64_t seed);

}  // namespace vgru
