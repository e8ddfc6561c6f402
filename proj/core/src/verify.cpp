// Copyright 2026 The VisionGRU Authors. Apache 2.0 License.

#include "vgru/verify.hpp"

namespace vgru {

namespace {

// Worst relative error between analytic and central-difference gradients
// over a sampled subset of one tensor. The floor keeps finite-difference
// noise on near-zero entries from masquerading as error.
template <typename F>
double fd_check_tensor(double* slot0, std::size_t n, std::size_t stride_cap,
                       const Tensor<double>& analytic, F&& eval, double eps) {
  double scale = 1.0;
  for (std::size_t i = 0; i < analytic.numel(); ++i)
    scale = std::max(scale, std::abs(analytic[i]));
  const double floor = 1e-3 * scale;
  const std::size_t step = n <= stride_cap ? 1 : n / stride_cap;
  double worst = 0;
  for (std::size_t i = 0; i < n; i += step) {
    const double fd = central_diff(slot0 + i, eval, eps);
    const double an = analytic[i];
    const double denom = std::max({std::abs(fd), std::abs(an), floor});
    worst = std::max(worst, std::abs(fd - an) / denom);
  }
  return worst;
}

Tensor<double> random_tensor(std::vector<std::size_t> shape, Rng& rng,
                             double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

double weighted_sum(const Tensor<double>& x, const Tensor<double>& w) {
  double s = 0;
  for (std::size_t i = 0; i < x.numel(); ++i) s += double(x[i]) * double(w[i]);
  return s;
}

}  // namespace

SuiteResult suite_mingru_gradients(std::uint64_t seed, std::size_t instances) {
  SuiteResult r{"mingru-gradients"};
  r.tolerance = 1e-5;
  const double eps = 1e-5;
  Rng rng = stream(seed, "verify.mingru_grad");
  for (std::size_t c = 0; c < instances; ++c) {
    const std::size_t t = 1 + rng.below(8), b = 1 + rng.below(2);
    const std::size_t cin = 1 + rng.below(4), ch = 1 + rng.below(4);
    MinGRUCell<double> cell;
    cell.setup("cell", cin, ch);
    cell.init(rng);
    for (std::size_t i = 0; i < ch; ++i) {
      cell.b_z.value[i] = 0.4 * rng.uniform(-1.0, 1.0);
      cell.b_h.value[i] = 0.4 * rng.uniform(-1.0, 1.0);
    }
    Tensor<double> x = random_tensor({t, b, cin}, rng, -1.5, 1.5);
    Tensor<double> w = random_tensor({t, b, ch}, rng);

    auto eval = [&] {
      return weighted_sum(mingru_forward(cell, x), w);
    };

    MinGRUCache<double> cache;
    (void)mingru_forward(cell, x, &cache);
    std::vector<Param<double>*> params;
    cell.collect(params);
    for (auto* p : params) p->zero_grad();
    Tensor<double> grad_x = mingru_backward(cell, cache, w);

    for (auto* p : params) {
      r.max_err = std::max(r.max_err, fd_check_tensor(p->value.data(),
                                                      p->value.numel(), 16,
                                                      p->grad, eval, eps));
      ++r.cases;
    }
    r.max_err = std::max(
        r.max_err, fd_check_tensor(x.data(), x.numel(), 16, grad_x, eval, eps));
    ++r.cases;
  }
  r.pass = r.max_err <= r.tolerance;
  return r;
}

SuiteResult suite_block_gradients(std::uint64_t seed) {
  SuiteResult r{"block-gradients"};
  r.tolerance = 1e-5;
  const double eps = 1e-5;
  Rng rng = stream(seed, "verify.block_grad");
  for (int c = 0; c < 4; ++c) {
    const std::size_t h = 2 + rng.below(2), w = 2 + rng.below(3);
    const std::size_t ch = 2, b = 1 + rng.below(2);
    TwoDGRUBlock<double> blk = random_block<double>(ch, rng, c % 2 == 0);
    Tensor<double> x = random_tensor({b, h, w, ch}, rng, -1.5, 1.5);
    Tensor<double> wloss = random_tensor({b, h, w, ch}, rng);

    auto eval = [&] { return weighted_sum(block_forward(blk, x), wloss); };

    BlockCache<double> cache;
    (void)block_forward(blk, x, &cache);
    std::vector<Param<double>*> params;
    blk.collect(params);
    for (auto* p : params) p->zero_grad();
    Tensor<double> gx = block_backward(blk, cache, wloss);

    for (auto* p : params) {
      r.max_err = std::max(r.max_err, fd_check_tensor(p->value.data(),
                                                      p->value.numel(), 12,
                                                      p->grad, eval, eps));
      ++r.cases;
    }
    r.max_err = std::max(r.max_err,
                         fd_check_tensor(x.data(), x.numel(), 12, gx, eval, eps));
    ++r.cases;
  }
  r.pass = r.max_err <= r.tolerance;
  return r;
}

SuiteResult suite_backbone_gradients(std::uint64_t seed) {
  SuiteResult r{"backbone-gradients"};
  r.tolerance = 1e-4;
  const double eps = 1e-5;
  Rng rng = stream(seed, "verify.backbone_grad");

  // two-block mini model covering every parameter class
  ModelSpec spec;
  spec.variant = "mini";
  spec.depths = {1, 1, 0, 0};
  spec.base_width = 8;
  spec.num_classes = 5;
  spec.res_h = spec.res_w = 32;
  Backbone<double> model(spec);
  model.init(seed);

  const std::size_t batch = 2;
  Tensor<double> img = random_tensor({batch, 32, 32, 3}, rng, -1.0, 1.0);
  std::vector<int> labels(batch);
  for (auto& l : labels) l = int(rng.below(spec.num_classes));

  auto eval = [&] {
    Tensor<double> logits = model.forward(img);
    return softmax_xent(logits, labels, 0.1);
  };

  Tape<double> tape;
  Tensor<double> logits = model.forward(img, &tape);
  Tensor<double> grad_logits;
  (void)softmax_xent(logits, labels, 0.1, &grad_logits);
  auto params = model.params();
  for (auto* p : params) p->zero_grad();
  (void)model.backward(tape, grad_logits);

  for (auto* p : params) {
    const double err = fd_check_tensor(p->value.data(), p->value.numel(), 10,
                                       p->grad, eval, eps);
    if (err > r.max_err) {
      r.max_err = err;
      if (err > r.tolerance && r.note.empty()) r.note = "worst: " + p->name;
    }
    ++r.cases;
  }
  r.pass = r.max_err <= r.tolerance;
  return r;
}

std::vector<SuiteResult> run_verify_suites(Precision p, std::uint64_t seed,
                                           const std::string& repro_dir) {
  std::vector<SuiteResult> out;
  if (p == Precision::f64) {
    out.push_back(suite_compose<double>(seed));
    out.push_back(suite_scan_equivalence<double>(seed, repro_dir));
    out.push_back(suite_scan_bounded<double>(seed));
    out.push_back(suite_closed_form<double>(seed, repro_dir));
  } else {
    out.push_back(suite_compose<float>(seed));
    out.push_back(suite_scan_equivalence<float>(seed, repro_dir));
    out.push_back(suite_scan_bounded<float>(seed));
    out.push_back(suite_closed_form<float>(seed, repro_dir));
  }
  out.push_back(suite_mingru_gradients(seed, 20));
  out.push_back(suite_block_gradients(seed));
  out.push_back(suite_backbone_gradients(seed));
  return out;
}

std::string format_verify_report(const std::vector<SuiteResult>& suites,
                                 Precision p, std::uint64_t seed) {
  std::ostringstream os;
  os << "verification report: precision=" << precision_name(p)
     << " seed=" << seed << " (gradient suites run in f64)\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %8s %14s %12s %8s\n", "suite",
                "cases", "max_rel_err", "tolerance", "status");
  os << line;
  bool all = true;
  for (const auto& s : suites) {
    std::snprintf(line, sizeof line, "%-28s %8zu %14.3e %12.1e %8s\n",
                  s.name.c_str(), s.cases, s.max_err, s.tolerance,
                  s.pass ? "PASS" : "FAIL");
    os << line;
    if (!s.note.empty()) os << "    " << s.note << "\n";
    all = all && s.pass;
  }
  os << "overall: " << (all ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace vgru
