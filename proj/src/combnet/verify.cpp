/*
 * Copyright 2026 The CombNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "combnet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "combnet/forward.hpp"
#include "combnet/loss.hpp"
#include "combnet/ops.hpp"

namespace combnet {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int pick(Rng& rng, std::initializer_list<int> xs) {
  std::uniform_int_distribution<std::size_t> d(0, xs.size() - 1);
  return *(xs.begin() + d(rng));
}

int range(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Tensor random_planar(Rng& rng, int c, int h, int w) {
  Tensor t = Tensor::planar(c, h, w);
  for (float& v : t.storage()) v = static_cast<float>(uniform(rng, -1.0, 1.0));
  return t;
}

// Fan-in scaled so outputs stay O(1) and absolute tolerances are meaningful.
WeightArray random_weights(Rng& rng, const ConvSpec& s) {
  WeightArray w(s.out_ch, s.in_per_group(), s.kh, s.kw);
  const double scale = 1.0 / std::sqrt(static_cast<double>(s.in_per_group() * s.kh * s.kw));
  for (float& v : w.data) v = static_cast<float>(uniform(rng, -scale, scale));
  return w;
}

std::vector<float> random_vec(Rng& rng, int n, double lo, double hi) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(uniform(rng, lo, hi));
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

SuiteResult suite(const char* name, double tolerance) {
  SuiteResult r;
  r.name = name;
  r.tolerance = tolerance;
  return r;
}

void record(SuiteResult& r, double dev, const std::string& what) {
  ++r.cases;
  r.max_deviation = std::max(r.max_deviation, dev);
  if (!(dev <= r.tolerance)) {
    ++r.failures;
    if (r.first_failure.empty()) r.first_failure = what + " deviation " + fmt(dev);
  }
}

PackedWeights perturbed_pack(const WeightArray& w, int groups, float delta) {
  PackedWeights p = pack_kernels(w, groups);
  if (delta != 0.0f)
    for (float& v : p.data) v += delta;
  return p;
}

SuiteResult conv_oracle_suite(Rng& rng, const VerifyOptions& opt) {
  SuiteResult r = suite("conv_oracle", 1e-5);
  for (int i = 0; i < opt.conv_cases; ++i) {
    ConvSpec s;
    s.in_ch = pick(rng, {8, 16, 32});
    const int gsel = i % 4;  // cycle so every group kind is covered
    s.groups = gsel == 0 ? 1 : gsel == 1 ? 4 : gsel == 2 ? 8 : s.in_ch;
    s.out_ch = s.groups * pick(rng, {1, 2, 3, 4});
    s.kh = s.kw = pick(rng, {1, 3, 5});
    s.dilation = 1 + (i / 4) % 4;
    s.stride = 1 + (i / 16) % 2;
    s.padding = range(rng, 0, 3) == 0 ? Padding::Valid : Padding::Same;
    s.has_bias = range(rng, 0, 1) == 1;
    const int span = s.dilation * (s.kh - 1) + 1;
    const int lo = std::max(span, 4);
    const int h = range(rng, lo, std::max(lo, 14));
    const int w = range(rng, lo, std::max(lo, 14));
    const Tensor x = random_planar(rng, s.in_ch, h, w);
    const WeightArray wt = random_weights(rng, s);
    const std::vector<float> bias = s.has_bias ? random_vec(rng, s.out_ch, -0.5, 0.5)
                                               : std::vector<float>{};
    const Tensor ref = conv2d_ref(x, wt, bias, s);
    const PackedWeights p = perturbed_pack(wt, s.groups, opt.packed_perturbation);
    const Tensor got = conv2d_packed(to_interleaved(x), p, bias, s);
    record(r, max_abs_diff(ref, got), "case " + std::to_string(i) + " " + s.describe());
  }
  return r;
}

// Comb decomposition: planar path at 1e-6, packed path at 1e-5, and the
// instrumented multiply count must equal mac_count.
std::vector<SuiteResult> comb_suites(Rng& rng, const VerifyOptions& opt) {
  SuiteResult planar = suite("comb_planar", 1e-6);
  SuiteResult packed = suite("comb_packed", 1e-5);
  SuiteResult muls = suite("comb_mul_count", 0.0);
  for (int i = 0; i < opt.comb_cases; ++i) {
    ConvSpec s;
    s.in_ch = pick(rng, {8, 16, 32});
    const int gsel = i % 4;
    s.groups = gsel == 0 ? 1 : gsel == 1 ? 4 : gsel == 2 ? 8 : s.in_ch;
    s.out_ch = s.groups * pick(rng, {1, 2, 4});
    s.kh = s.kw = pick(rng, {1, 3, 5});
    s.dilation = 1 + (i / 4) % 4;
    s.has_bias = range(rng, 0, 1) == 1;
    const int h = range(rng, s.dilation, 16);
    const int w = range(rng, s.dilation, 16);
    const Tensor x = random_planar(rng, s.in_ch, h, w);
    const WeightArray wt = random_weights(rng, s);
    const std::vector<float> bias = s.has_bias ? random_vec(rng, s.out_ch, -0.5, 0.5)
                                               : std::vector<float>{};
    const std::string what = "case " + std::to_string(i) + " " + s.describe() + " on " +
                             std::to_string(h) + "x" + std::to_string(w);
    const Tensor ref = conv2d_ref(x, wt, bias, s);
    OpCounter c;
    const Tensor a = comb_dilated_conv(x, wt, bias, s, &c);
    record(planar, max_abs_diff(ref, a), what);
    const PackedWeights p = perturbed_pack(wt, s.groups, opt.packed_perturbation);
    const Tensor b = comb_dilated_conv(to_interleaved(x), p, bias, s);
    record(packed, max_abs_diff(ref, b), what);
    const double expect = static_cast<double>(mac_count(s, h, w));
    record(muls, std::fabs(static_cast<double>(c.mul) - expect), what);
  }
  return {planar, packed, muls};
}

SuiteResult bn_fold_suite(Rng& rng, const VerifyOptions& opt) {
  SuiteResult r = suite("bn_fold", 1e-5);
  for (int i = 0; i < opt.bn_cases; ++i) {
    ConvSpec s;
    s.in_ch = pick(rng, {4, 8, 16});
    s.groups = pick(rng, {1, 4});
    s.out_ch = s.groups * pick(rng, {1, 2, 4});
    s.kh = s.kw = pick(rng, {1, 3});
    s.dilation = pick(rng, {1, 2});
    s.has_bias = range(rng, 0, 1) == 1;
    const Tensor x = random_planar(rng, s.in_ch, range(rng, 4, 10), range(rng, 4, 10));
    const WeightArray wt = random_weights(rng, s);
    const std::vector<float> bias = s.has_bias ? random_vec(rng, s.out_ch, -0.5, 0.5)
                                               : std::vector<float>{};
    BnParams bn;
    bn.gamma = random_vec(rng, s.out_ch, 0.5, 1.5);
    bn.beta = random_vec(rng, s.out_ch, -0.5, 0.5);
    bn.mean = random_vec(rng, s.out_ch, -0.5, 0.5);
    bn.var = random_vec(rng, s.out_ch, 0.5, 1.5);
    bn.epsilon = 1e-5f;
    const Tensor unfolded = batchnorm(conv2d_ref(x, wt, bias, s), bn);
    const FoldedConv f = fold_batchnorm(wt, bias, bn);
    ConvSpec fs = s;
    fs.has_bias = true;
    const Tensor folded = conv2d_ref(x, f.weights, f.bias, fs);
    record(r, max_abs_diff(unfolded, folded), "case " + std::to_string(i) + " " + s.describe());
  }
  return r;
}

double max_abs(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(static_cast<double>(a[i]) - b[i]));
  return m;
}

double heads_deviation(const HeadsOutput& a, const HeadsOutput& b) {
  double m = max_abs_diff(a.heatmaps, b.heatmaps);
  m = std::max(m, max_abs(a.visibility, b.visibility));
  m = std::max(m, max_abs(a.orientation, b.orientation));
  m = std::max(m, max_abs(a.pose, b.pose));
  if (a.aux_heatmaps.has_value() != b.aux_heatmaps.has_value()) return INFINITY;
  if (a.aux_heatmaps) m = std::max<double>(m, max_abs_diff(*a.aux_heatmaps, *b.aux_heatmaps));
  if (a.segmentation.has_value() != b.segmentation.has_value()) return INFINITY;
  if (a.segmentation) m = std::max<double>(m, max_abs_diff(*a.segmentation, *b.segmentation));
  if (a.deep_supervision.size() != b.deep_supervision.size()) return INFINITY;
  for (std::size_t i = 0; i < a.deep_supervision.size(); ++i)
    m = std::max<double>(m, max_abs_diff(a.deep_supervision[i], b.deep_supervision[i]));
  return m;
}

SuiteResult backend_suite(Rng& rng, const VerifyOptions& opt) {
  SuiteResult r = suite("backend_e2e", 1e-4);
  const GraphSpec g = build_graph(NetConfig{});
  for (int i = 0; i < opt.e2e_cases; ++i) {
    const std::uint64_t wseed = rng();
    WeightStore ws = init_weights(g, wseed);
    randomize_normalization(ws, g, wseed ^ 0x5bd1e995ull);
    const Network ref(g, ws, Backend::Reference);
    Network fast(g, ws, Backend::Optimized);
    if (opt.packed_perturbation != 0.0f) {
      // Same fault as the kernel suites, applied through the weight file.
      WeightStore bad = ws;
      for (const auto& [name, e] : ws.entries()) {
        if (name.size() < 7 || name.compare(name.size() - 7, 7, ".weight") != 0) continue;
        std::vector<float> d = e.data;
        for (float& v : d) v += opt.packed_perturbation;
        bad.set(name, e.dims, std::move(d));
      }
      fast = Network(g, bad, Backend::Optimized);
    }
    Tensor x = Tensor::planar(1, g.input_h, g.input_w);
    for (float& v : x.storage()) v = static_cast<float>(uniform(rng, 0.0, 1.0));
    const HeadsOutput a = ref.forward(x, Mode::AllHeads);
    const HeadsOutput b = fast.forward(x, Mode::AllHeads);
    record(r, heads_deviation(a, b), "case " + std::to_string(i));
  }
  return r;
}

// ||a - n|| / max(||a||, ||n||, 1e-12) with central differences.
double gradient_error(const std::function<double(const std::vector<double>&)>& f,
                      std::vector<double> x, const std::vector<double>& analytic) {
  constexpr double h = 1e-4;
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    const double num = (fp - fm) / (2 * h);
    diff += (analytic[i] - num) * (analytic[i] - num);
    na += analytic[i] * analytic[i];
    nn += num * num;
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
}

std::vector<double> random_doubles(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, -scale, scale);
  return v;
}

KeypointTargets random_targets(Rng& rng, int maps, int h, int w) {
  KeypointTargets t;
  t.points.resize(maps);
  t.fingertip.resize(maps);
  for (int k = 0; k < maps; ++k) {
    t.points[k] = {range(rng, 0, 3) != 0, range(rng, 0, h - 1), range(rng, 0, w - 1)};
    t.fingertip[k] = range(rng, 0, 3) == 0;
  }
  t.points[0].visible = true;
  return t;
}

SuiteResult loss_suite(Rng& rng, const VerifyOptions& opt) {
  SuiteResult r = suite("loss_gradients", 1e-4);
  for (int i = 0; i < opt.loss_cases; ++i) {
    const std::string tag = "case " + std::to_string(i);
    {
      LogitMaps m = LogitMaps::uniform(6, 5, 7, 0.0);
      m.data = random_doubles(rng, m.data.size(), 3.0);
      const KeypointTargets t = random_targets(rng, m.maps, m.h, m.w);
      const auto f = [&](const std::vector<double>& z) {
        LogitMaps mm = m;
        mm.data = z;
        return keypoint_ce(mm, t).loss;
      };
      record(r, gradient_error(f, m.data, keypoint_ce(m, t).grad), tag + " keypoint_ce");
    }
    {
      const std::vector<double> z = random_doubles(rng, 18, 4.0);
      std::vector<bool> y(18);
      for (std::size_t k = 0; k < y.size(); ++k) y[k] = range(rng, 0, 1) == 1;
      const auto f = [&](const std::vector<double>& v) { return visibility_bce(v, y).loss; };
      record(r, gradient_error(f, z, visibility_bce(z, y).grad), tag + " visibility_bce");
    }
    for (int variant = 0; variant < 2; ++variant) {
      const int classes = variant == 0 ? 8 : 9;
      const double eps = variant == 0 ? 0.1 : 0.0;
      const std::vector<double> z = random_doubles(rng, 2 * classes, 3.0);
      HandLabels labels;
      labels.present = {range(rng, 0, 1) == 1, true};
      labels.cls = {range(rng, 0, classes - 1), range(rng, 0, classes - 1)};
      const auto f = [&](const std::vector<double>& v) {
        return orientation_ce_soft(v, classes, labels, eps).loss;
      };
      record(r, gradient_error(f, z, orientation_ce_soft(z, classes, labels, eps).grad),
             tag + (variant == 0 ? " orientation_ce" : " handpose_ce"));
    }
    {
      LogitMaps m = LogitMaps::uniform(3, 6, 5, 0.0);
      m.data = random_doubles(rng, m.data.size(), 3.0);
      std::vector<int> y(m.plane());
      for (int& v : y) v = range(rng, 0, 2);
      const auto f = [&](const std::vector<double>& z) {
        LogitMaps mm = m;
        mm.data = z;
        return seg_ce(mm, y).loss;
      };
      record(r, gradient_error(f, m.data, seg_ce(m, y).grad), tag + " seg_ce");
    }
    {
      const int ih = 16, iw = 16, maps = 4;
      std::vector<LogitMaps> scales;
      for (int fct : {8, 4, 2}) {
        LogitMaps m = LogitMaps::uniform(maps, ih / fct, iw / fct, 0.0);
        m.data = random_doubles(rng, m.data.size(), 2.0);
        scales.push_back(std::move(m));
      }
      const KeypointTargets t = random_targets(rng, maps, ih, iw);
      const MultiScaleLoss base = deep_supervision_loss(scales, t, ih, iw);
      for (int s = 0; s < 3; ++s) {
        const auto f = [&](const std::vector<double>& z) {
          std::vector<LogitMaps> ss = scales;
          ss[s].data = z;
          return deep_supervision_loss(ss, t, ih, iw).loss;
        };
        record(r, gradient_error(f, scales[s].data, base.grads[s]),
               tag + " deep_supervision scale " + std::to_string(s));
      }
    }
  }
  return r;
}

}  // namespace

bool VerifyReport::passed() const noexcept {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed(); });
}

std::string VerifyReport::text() const {
  std::ostringstream os;
  os << "verify seed=" << seed << "\n";
  for (const SuiteResult& s : suites) {
    char line[160];
    std::snprintf(line, sizeof line, "%-16s %-4s cases=%-4d failures=%-4d max_dev=%s tol=%s\n",
                  s.name.c_str(), s.passed() ? "PASS" : "FAIL", s.cases, s.failures,
                  fmt(s.max_deviation).c_str(), fmt(s.tolerance).c_str());
    os << line;
    if (!s.passed()) os << "  first failure: " << s.first_failure << "\n";
  }
  os << (passed() ? "result: PASS\n" : "result: FAIL\n");
  return os.str();
}

VerifyReport run_verify(const VerifyOptions& opt) {
  VerifyReport rep;
  rep.seed = opt.seed;
  // Independent stream per suite so case counts do not shift other suites.
  auto stream = [&](std::uint64_t k) { return Rng(opt.seed * 0x9e3779b97f4a7c15ull + k); };
  Rng r1 = stream(1), r2 = stream(2), r3 = stream(3), r4 = stream(4), r5 = stream(5);
  rep.suites.push_back(conv_oracle_suite(r1, opt));
  for (SuiteResult& s : comb_suites(r2, opt)) rep.suites.push_back(std::move(s));
  rep.suites.push_back(bn_fold_suite(r3, opt));
  rep.suites.push_back(backend_suite(r4, opt));
  rep.suites.push_back(loss_suite(r5, opt));
  return rep;
}

}  // namespace combnet
