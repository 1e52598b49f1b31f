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

// Acceptance checks. Prints one line per criterion and exits non-zero when
// any gated criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "combnet/bench.hpp"
#include "combnet/conv.hpp"
#include "combnet/forward.hpp"
#include "combnet/graph.hpp"
#include "combnet/loss.hpp"
#include "combnet/ops.hpp"
#include "combnet/postprocess.hpp"
#include "combnet/weights.hpp"
#include "oracles.hpp"

using namespace combnet;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

void report(int n, const Outcome& o) {
  std::printf("criterion %d: %s  %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
  std::fflush(stdout);
}

std::vector<double> randn(std::mt19937_64& rng, std::size_t n, double scale = 2.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

double fd_rel_error(const std::function<double(const std::vector<double>&)>& f,
                    std::vector<double> x, const std::vector<double>& g) {
  const double h = 1e-4;
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    const double n = (fp - fm) / (2 * h);
    diff += (g[i] - n) * (g[i] - n);
    na += g[i] * g[i];
    nn += n * n;
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
}

KeypointTargets random_targets(std::mt19937_64& rng, int maps, int h, int w) {
  KeypointTargets t;
  for (int k = 0; k < maps; ++k) {
    t.points.push_back({rng() % 3 != 0, static_cast<int>(rng() % h), static_cast<int>(rng() % w)});
    t.fingertip.push_back(rng() % 4 == 0);
  }
  t.points[0].visible = true;
  return t;
}

Outcome budget() {
  Outcome o;
  const NetConfig cfg = load_config(std::string(COMBNET_SOURCE_DIR) + "/configs/reference.cfg");
  const GraphSpec g = build_graph(cfg);
  const std::uint64_t params = count_params(g), flops = count_flops(g);

  // Cross-check the parameter count against the stored arrays of the
  // inference layers.
  const WeightStore ws = init_weights(g, 1);
  std::uint64_t stored = 0;
  for (const ConvLayer* l : all_conv_layers(g, Scope::Inference))
    for (const auto& [name, e] : ws.entries())
      if (name.rfind(l->name + ".", 0) == 0 && name.find('.', l->name.size() + 1) == std::string::npos)
        stored += e.data.size();
  const std::size_t bytes = serialize_weights(ws).size();

  const double dp = params / 0.041e6 - 1.0, df = flops / 0.035e9 - 1.0;
  o.pass = std::fabs(dp) <= 0.25 && std::fabs(df) <= 0.25 && stored == params && bytes <= 300000;
  o.detail << "params=" << params << " (" << (dp >= 0 ? "+" : "") << dp * 100 << "%)"
           << " stored=" << stored << " flops=" << flops << " (" << df * 100 << "%)"
           << " weight_file=" << bytes << "B";
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(2024);
  int cases = 0, comb_cases = 0;
  double dev_ref = 0, dev_packed = 0, dev_comb = 0, dev_comb_packed = 0;
  for (int n = 0; n < 160; ++n) {
    const int gsel = n % 4, dil = 1 + (n / 4) % 4, stride = 1 + (n / 16) % 2;
    const int c = 8 * (1 + static_cast<int>(rng() % 3));
    const int groups = gsel == 0 ? 1 : gsel == 1 ? 4 : gsel == 2 ? 8 : c;
    ConvSpec s;
    s.in_ch = c;
    s.out_ch = groups == c ? c : 8 * (1 + static_cast<int>(rng() % 3));
    s.kh = s.kw = 3;
    s.stride = stride;
    s.dilation = dil;
    s.groups = groups;
    s.has_bias = true;
    const int h = std::max(dil, 5 + static_cast<int>(rng() % 10));
    const int w = std::max(dil, 5 + static_cast<int>(rng() % 10));
    const Tensor x = oracle::random_tensor(rng, c, h, w);
    const WeightArray wt = oracle::random_weights(rng, s);
    const std::vector<float> b = oracle::random_vector(rng, s.out_ch, -0.5f, 0.5f);
    int oh = 0, ow = 0;
    const auto want = oracle::conv(x.storage(), c, h, w, wt.data, b, s.out_ch, 3, stride,
                                   s.pad_h(), dil, groups, &oh, &ow);
    const Tensor ref = conv2d_ref(x, wt, b, s);
    dev_ref = std::max(dev_ref, oracle::max_abs(want, ref));
    const PackedWeights packed = pack_kernels(wt, groups);
    dev_packed = std::max(dev_packed, oracle::max_abs(want, conv2d_packed(to_interleaved(x), packed, b, s)));
    ++cases;
    if (stride == 1) {
      dev_comb = std::max<double>(dev_comb, max_abs_diff(comb_dilated_conv(x, wt, b, s), ref));
      dev_comb_packed = std::max(
          dev_comb_packed, oracle::max_abs(want, comb_dilated_conv(to_interleaved(x), packed, b, s)));
      ++comb_cases;
    }
  }
  o.pass = cases >= 100 && dev_ref <= 1e-5 && dev_packed <= 1e-5 && dev_comb <= 1e-6 &&
           dev_comb_packed <= 1e-5;
  o.detail << cases << " conv cases, " << comb_cases << " comb cases; max-abs reference="
           << dev_ref << " packed=" << dev_packed << " comb_planar=" << dev_comb
           << " comb_packed=" << dev_comb_packed;
  return o;
}

Outcome zero_overhead() {
  Outcome o;
  std::mt19937_64 rng(3);
  ConvSpec s;
  s.in_ch = s.out_ch = 32;
  s.groups = 8;
  const Tensor x = oracle::random_tensor(rng, 32, 12, 12);
  for (int d = 1; d <= 4; ++d) {
    s.dilation = d;
    const WeightArray w = oracle::random_weights(rng, s);
    OpCounter comb, stuffed;
    comb_dilated_conv(to_interleaved(x), pack_kernels(w, 8), {}, s, &comb);
    dilated_conv_zero_stuffed(x, w, {}, s, &stuffed);
    // Independent expected counts: every output pixel of every filter does
    // in_per_group * k * k (dense) or in_per_group * K * K (stuffed) muls.
    const std::uint64_t dense = 12ull * 12 * 32 * 4 * 9;
    const std::uint64_t K = d * 2 + 1;
    const std::uint64_t stuffed_want = 12ull * 12 * 32 * 4 * K * K;
    const bool ok = comb.mul == dense && mac_count(s, 12, 12) == dense && stuffed.mul == stuffed_want;
    o.pass = o.pass && ok;
    o.detail << "d=" << d << " comb=" << comb.mul << " stuffed=" << stuffed.mul << " ("
             << static_cast<double>(stuffed.mul) / comb.mul << "x)" << (d < 4 ? "; " : "");
  }
  return o;
}

Outcome bn_folding() {
  Outcome o;
  std::mt19937_64 rng(4);
  double dev = 0, dev_oracle = 0;
  for (int n = 0; n < 50; ++n) {
    ConvSpec s;
    const int gopt[] = {1, 2, 4};
    s.groups = gopt[n % 3];
    s.in_ch = s.groups * (1 + static_cast<int>(rng() % 4));
    s.out_ch = s.groups * (1 + static_cast<int>(rng() % 4));
    s.kh = s.kw = (n % 2) ? 3 : 1;
    s.has_bias = n % 4 != 0;
    const Tensor x = oracle::random_tensor(rng, s.in_ch, 7, 6);
    const WeightArray w = oracle::random_weights(rng, s);
    const std::vector<float> b = s.has_bias ? oracle::random_vector(rng, s.out_ch, -0.5f, 0.5f)
                                            : std::vector<float>{};
    BnParams bn;
    bn.gamma = oracle::random_vector(rng, s.out_ch, 0.5f, 1.5f);
    bn.beta = oracle::random_vector(rng, s.out_ch, -0.5f, 0.5f);
    bn.mean = oracle::random_vector(rng, s.out_ch, -0.5f, 0.5f);
    bn.var = oracle::random_vector(rng, s.out_ch, 0.5f, 2.0f);
    const Tensor unfolded = batchnorm(conv2d_ref(x, w, b, s), bn);
    const FoldedConv f = fold_batchnorm(w, b, bn);
    ConvSpec fs = s;
    fs.has_bias = true;
    const Tensor folded = conv2d_packed(to_interleaved(x), pack_kernels(f.weights, s.groups), f.bias, fs);
    dev = std::max<double>(dev, max_abs_diff(unfolded, to_planar(folded)));

    int oh = 0, ow = 0;
    auto want = oracle::conv(x.storage(), s.in_ch, 7, 6, w.data, b, s.out_ch, s.kh, 1, s.pad_h(), 1,
                             s.groups, &oh, &ow);
    for (int c = 0; c < s.out_ch; ++c)
      for (int i = 0; i < oh * ow; ++i) {
        double& v = want[static_cast<std::size_t>(c) * oh * ow + i];
        v = (v - bn.mean[c]) / std::sqrt(static_cast<double>(bn.var[c]) + bn.epsilon) * bn.gamma[c] +
            bn.beta[c];
      }
    dev_oracle = std::max(dev_oracle, oracle::max_abs(want, folded));
  }
  o.pass = dev <= 1e-5 && dev_oracle <= 1e-5;
  o.detail << "50 cases; folded vs unfolded max-abs=" << dev << ", folded vs oracle=" << dev_oracle;
  return o;
}

Outcome losses() {
  Outcome o;
  std::mt19937_64 rng(5);
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    LogitMaps m = LogitMaps::uniform(5, 4, 6, 0.0);
    m.data = randn(rng, m.data.size());
    const KeypointTargets t = random_targets(rng, 5, 4, 6);
    auto on_maps = [&](auto fn) {
      return [&, fn](const std::vector<double>& z) {
        LogitMaps mm = m;
        mm.data = z;
        return fn(mm).loss;
      };
    };
    worst = std::max(worst, fd_rel_error(on_maps([&](const LogitMaps& mm) { return keypoint_ce(mm, t); }),
                                         m.data, keypoint_ce(m, t).grad));
    worst = std::max(worst, fd_rel_error(on_maps([&](const LogitMaps& mm) { return aux_keypoint_ce(mm, t); }),
                                         m.data, aux_keypoint_ce(m, t).grad));
    std::vector<int> labels(m.plane());
    for (int& l : labels) l = static_cast<int>(rng() % 5);
    worst = std::max(worst, fd_rel_error(on_maps([&](const LogitMaps& mm) { return seg_ce(mm, labels); }),
                                         m.data, seg_ce(m, labels).grad));

    const auto v = randn(rng, 18, 4.0);
    std::vector<bool> y(18);
    for (std::size_t i = 0; i < 18; ++i) y[i] = rng() % 2;
    worst = std::max(worst, fd_rel_error([&](const std::vector<double>& z) { return visibility_bce(z, y).loss; },
                                         v, visibility_bce(v, y).grad));
    const HandLabels hl{{rng() % 2 == 0, true}, {static_cast<int>(rng() % 8), static_cast<int>(rng() % 8)}};
    const auto oz = randn(rng, 16);
    worst = std::max(worst, fd_rel_error(
                                [&](const std::vector<double>& z) { return orientation_ce_soft(z, 8, hl, 0.1).loss; },
                                oz, orientation_ce_soft(oz, 8, hl, 0.1).grad));
    const auto pz = randn(rng, 18);
    worst = std::max(worst, fd_rel_error([&](const std::vector<double>& z) { return handpose_ce(z, 9, hl).loss; },
                                         pz, handpose_ce(pz, 9, hl).grad));
    std::vector<LogitMaps> sc;
    for (int f : {8, 4, 2}) {
      LogitMaps mm = LogitMaps::uniform(3, 16 / f, 16 / f, 0.0);
      mm.data = randn(rng, mm.data.size());
      sc.push_back(mm);
    }
    const KeypointTargets dt = random_targets(rng, 3, 16, 16);
    const MultiScaleLoss base = deep_supervision_loss(sc, dt, 16, 16);
    for (int i = 0; i < 3; ++i)
      worst = std::max(worst, fd_rel_error(
                                  [&](const std::vector<double>& z) {
                                    auto ss = sc;
                                    ss[i].data = z;
                                    return deep_supervision_loss(ss, dt, 16, 16).loss;
                                  },
                                  sc[i].data, base.grads[i]));
  }

  LossBundle unit;
  unit.kp = unit.akp = unit.kphv = unit.cho = unit.dhp = unit.seg = unit.ds = 1.0;
  const double total = total_loss(unit);

  KeypointTargets one;
  one.points.assign(16, {});
  one.fingertip.assign(16, false);
  one.points[0] = {true, 7, 9};
  const HandLabels both{{true, true}, {0, 0}};
  const double closed[][2] = {
      {keypoint_ce(LogitMaps::uniform(16, 48, 48, 0.4), one).loss, std::log(2304.0)},
      {orientation_ce_soft(std::vector<double>(16, 0.4), 8, both, 0.1).loss, std::log(8.0)},
      {handpose_ce(std::vector<double>(18, 0.4), 9, both).loss, std::log(9.0)},
      {seg_ce(LogitMaps::uniform(3, 48, 48, 0.4), std::vector<int>(2304, 1)).loss, std::log(3.0)}};
  double closed_dev = 0;
  for (const auto& c : closed) closed_dev = std::max(closed_dev, std::fabs(c[0] - c[1]));

  o.pass = worst <= 1e-4 && total == 103.0 && closed_dev <= 1e-9;
  o.detail << "worst finite-difference rel error=" << worst << " total(unit)=" << total
           << " closed-form dev=" << closed_dev;
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const NetConfig cfg;
  const GraphSpec g = build_graph(cfg);
  std::mt19937_64 rng(6);
  double dev = 0;
  int compared = 0, identical = 0;
  for (int n = 0; n < 5; ++n) {
    WeightStore ws = init_weights(g, 100 + n);
    randomize_normalization(ws, g, 200 + n);
    const Network ref(g, ws, Backend::Reference), opt(g, ws, Backend::Optimized);
    const Tensor img = oracle::random_tensor(rng, 1, cfg.input_h, cfg.input_w, 0.0f, 1.0f);
    const HeadsOutput a = ref.forward(img, Mode::AllHeads), b = opt.forward(img, Mode::AllHeads);
    const HeadsOutput a2 = ref.forward(img, Mode::AllHeads);
    if (max_abs_diff(a.heatmaps, a2.heatmaps) != 0.0f) o.pass = false;
    dev = std::max<double>(dev, max_abs_diff(a.heatmaps, b.heatmaps));
    dev = std::max<double>(dev, max_abs_diff(*a.aux_heatmaps, *b.aux_heatmaps));
    dev = std::max<double>(dev, max_abs_diff(*a.segmentation, *b.segmentation));
    for (std::size_t i = 0; i < a.deep_supervision.size(); ++i)
      dev = std::max<double>(dev, max_abs_diff(a.deep_supervision[i], b.deep_supervision[i]));
    for (std::size_t i = 0; i < a.visibility.size(); ++i)
      dev = std::max<double>(dev, std::fabs(a.visibility[i] - b.visibility[i]));
    for (std::size_t i = 0; i < a.orientation.size(); ++i)
      dev = std::max<double>(dev, std::fabs(a.orientation[i] - b.orientation[i]));
    for (std::size_t i = 0; i < a.pose.size(); ++i)
      dev = std::max<double>(dev, std::fabs(a.pose[i] - b.pose[i]));

    const auto ka = decode_heatmaps(a.heatmaps, cfg.input_h, cfg.input_w, 0.05);
    const auto kb = decode_heatmaps(b.heatmaps, cfg.input_h, cfg.input_w, 0.05);
    const int plane = a.heatmaps.height() * a.heatmaps.width();
    const Tensor& p = a.heatmaps;  // heads are planar
    for (int k = 0; k < cfg.num_keypoints(); ++k) {
      std::vector<float> z(p.storage().begin() + k * plane, p.storage().begin() + (k + 1) * plane);
      std::partial_sort(z.begin(), z.begin() + 2, z.end(), std::greater<float>());
      if (z[0] - z[1] < 1e-3f) continue;
      ++compared;
      identical += ka[k].row == kb[k].row && ka[k].col == kb[k].col;
    }
  }
  o.pass = o.pass && dev <= 1e-4 && compared > 0 && identical == compared;
  o.detail << "5 seeded networks, all heads; max-abs=" << dev << "; decoded keypoints identical "
           << identical << "/" << compared << " (margin >= 1e-3)";
  return o;
}

Outcome substituted() {
  Outcome o;
  BenchOptions opt;
  opt.iterations = 3;
  opt.warmup = 1;
  const BenchReport r = run_bench(NetConfig{}, opt);
  for (std::size_t i = 0; i + 1 < r.cases.size(); ++i) {
    const BenchCase& zs = r.cases[i];
    const BenchCase& comb = r.cases[i + 1];
    if (zs.backend != "zero_stuffed" || comb.backend != "comb") continue;
    const bool advantage = comb.multiplies == comb.macs && comb.multiplies < zs.multiplies;
    o.pass = o.pass && advantage;
    o.detail << zs.name << " muls " << zs.multiplies << "->" << comb.multiplies << " speedup "
             << zs.median_ms / comb.median_ms << "x; ";
  }
  o.detail << "keypoint error and target-hardware latency need the proprietary dataset and "
              "device, replaced by criteria 2-6 and this multiply-count check (timings reported, "
              "not gated)";
  return o;
}

}  // namespace

int main() {
  const std::function<Outcome()> criteria[] = {budget, oracle_equivalence, zero_overhead, bn_folding,
                                               losses, end_to_end,         substituted};
  bool all = true;
  for (int i = 0; i < 7; ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "error: " << e.what();
    }
    report(i + 1, o);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
