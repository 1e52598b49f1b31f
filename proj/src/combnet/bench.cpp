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

#include "combnet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "combnet/error.hpp"

namespace combnet {

namespace {

using Clock = std::chrono::steady_clock;

struct Timing {
  double min_ms, median_ms, mean_ms;
};

Timing time_it(const std::function<void()>& fn, int iterations, int warmup) {
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> ms;
  for (int i = 0; i < iterations; ++i) {
    const auto t0 = Clock::now();
    fn();
    ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  const std::size_t n = ms.size();
  const double median = n % 2 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
  return {ms.front(), median, std::accumulate(ms.begin(), ms.end(), 0.0) / n};
}

Tensor random_input(std::mt19937_64& rng, int c, int h, int w) {
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  Tensor t = Tensor::planar(c, h, w);
  for (float& v : t.storage()) v = d(rng);
  return t;
}

WeightArray random_kernel(std::mt19937_64& rng, const ConvSpec& s) {
  std::uniform_real_distribution<float> d(-0.1f, 0.1f);
  WeightArray w(s.out_ch, s.in_per_group(), s.kh, s.kw);
  for (float& v : w.data) v = d(rng);
  return w;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Shared formatting so the table and the CSV carry the same strings.
std::vector<std::string> format_case(const BenchCase& c, const std::string& speedup) {
  char buf[7][32];
  std::snprintf(buf[0], 32, "%d", c.iterations);
  std::snprintf(buf[1], 32, "%.4f", c.min_ms);
  std::snprintf(buf[2], 32, "%.4f", c.median_ms);
  std::snprintf(buf[3], 32, "%.4f", c.mean_ms);
  std::snprintf(buf[4], 32, "%llu", static_cast<unsigned long long>(c.macs));
  std::snprintf(buf[5], 32, "%llu", static_cast<unsigned long long>(c.multiplies));
  std::snprintf(buf[6], 32, "%.2f", c.macs_per_second() / 1e6);
  return {c.name, c.backend, c.layer, buf[0], buf[1], buf[2], buf[3],
          buf[4], buf[5], buf[6], speedup};
}

const std::vector<std::string> kColumns = {"case", "backend", "layer", "iters",
                                           "min_ms", "median_ms", "mean_ms", "macs",
                                           "multiplies", "mmacs_per_s", "speedup"};

// Median speedup against the first row sharing the case name.
std::vector<std::vector<std::string>> formatted_rows(const std::vector<BenchCase>& cases) {
  std::vector<std::vector<std::string>> rows;
  for (const BenchCase& c : cases) {
    auto base = std::find_if(cases.begin(), cases.end(),
                             [&](const BenchCase& b) { return b.name == c.name; });
    std::string speedup = "-";
    if (base != cases.end() && &*base != &c && c.median_ms > 0) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", base->median_ms / c.median_ms);
      speedup = buf;
    } else if (std::count_if(cases.begin(), cases.end(),
                             [&](const BenchCase& b) { return b.name == c.name; }) > 1) {
      speedup = "1.00";
    }
    rows.push_back(format_case(c, speedup));
  }
  return rows;
}

}  // namespace

double BenchCase::macs_per_second() const noexcept {
  return median_ms > 0 ? static_cast<double>(macs) / (median_ms * 1e-3) : 0.0;
}

std::string BenchReport::table() const {
  const auto rows = formatted_rows(cases);
  std::vector<std::size_t> width(kColumns.size());
  for (std::size_t i = 0; i < kColumns.size(); ++i) width[i] = kColumns[i].size();
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::ostringstream os;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  os << "timestamp " << timestamp << "  config " << hash << "\n";
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      os << r[i] << std::string(width[i] - r[i].size(), ' ');
      os << (i + 1 < r.size() ? "  " : "\n");
    }
  };
  emit(kColumns);
  for (const auto& r : rows) emit(r);
  return os.str();
}

std::string BenchReport::csv() const {
  std::ostringstream os;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  os << "# timestamp=" << timestamp << " config=" << hash << "\n";
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << r[i] << (i + 1 < r.size() ? "," : "\n");
  };
  emit(kColumns);
  for (const auto& r : formatted_rows(cases)) emit(r);
  return os.str();
}

BenchReport run_bench(const NetConfig& cfg, const BenchOptions& opt) {
  require(opt.iterations >= 1, ErrorCode::InvalidArgument, "bench needs at least one iteration");
  require(opt.warmup >= 0, ErrorCode::InvalidArgument, "warm-up count must be >= 0");
  const GraphSpec g = build_graph(cfg);
  BenchReport rep;
  rep.timestamp = utc_now();
  rep.config_hash = config_hash(cfg);
  std::mt19937_64 rng(opt.seed);

  {
    const WeightStore ws = init_weights(g, opt.seed);
    const Network net(g, ws, opt.backend);
    Tensor x = random_input(rng, 1, g.input_h, g.input_w);
    for (float& v : x.storage()) v = 0.5f * (v + 1.0f);
    BenchCase c{"forward", backend_name(opt.backend), "full network (inference heads)"};
    OpCounter ops;
    net.forward(x, Mode::InferenceHeads, &ops);
    const Timing t = time_it([&] { net.forward(x, Mode::InferenceHeads); }, opt.iterations,
                             opt.warmup);
    c.iterations = opt.iterations;
    c.min_ms = t.min_ms;
    c.median_ms = t.median_ms;
    c.mean_ms = t.mean_ms;
    c.macs = count_macs(g);
    c.multiplies = ops.mul;
    rep.cases.push_back(c);
  }

  auto add_case = [&](const std::string& name, const std::string& backend,
                      const std::string& layer, std::uint64_t macs,
                      const std::function<void(OpCounter*)>& fn) {
    BenchCase c{name, backend, layer};
    OpCounter ops;
    fn(&ops);
    const Timing t = time_it([&] { fn(nullptr); }, opt.iterations, opt.warmup);
    c.iterations = opt.iterations;
    c.min_ms = t.min_ms;
    c.median_ms = t.median_ms;
    c.mean_ms = t.mean_ms;
    c.macs = macs;
    c.multiplies = ops.mul;
    rep.cases.push_back(c);
  };

  {
    const ConvSpec s = g.tiers[1].units[0].blocks[0].convs[1].conv;
    const int in_h = g.input_h / 2, in_w = g.input_w / 2;
    const Tensor x = random_input(rng, s.in_ch, in_h, in_w);
    const Tensor xi = to_interleaved(x);
    const WeightArray w = random_kernel(rng, s);
    const PackedWeights p = pack_kernels(w, s.groups, cfg.lane_width);
    const std::string layer = s.describe() + " @" + std::to_string(in_h) + "x" +
                              std::to_string(in_w);
    const std::uint64_t macs = mac_count(s, in_h, in_w);
    add_case("tier2_grouped", "reference", layer, macs,
             [&](OpCounter* c) { conv2d_ref(x, w, {}, s, c); });
    add_case("tier2_grouped", "optimized", layer, macs,
             [&](OpCounter* c) { conv2d_packed(xi, p, {}, s, c); });
  }

  for (int d = 2; d <= 4; ++d) {
    ConvSpec s;
    s.in_ch = s.out_ch = cfg.tier3_bottleneck;
    s.groups = cfg.tier3_groups;
    s.kh = s.kw = 3;
    s.dilation = d;
    const int in_h = g.input_h / 8, in_w = g.input_w / 8;
    const Tensor x = random_input(rng, s.in_ch, in_h, in_w);
    const Tensor xi = to_interleaved(x);
    const WeightArray w = random_kernel(rng, s);
    const PackedWeights p = pack_kernels(w, s.groups, cfg.lane_width);
    const std::string layer = s.describe() + " @" + std::to_string(in_h) + "x" +
                              std::to_string(in_w);
    const std::uint64_t macs = mac_count(s, in_h, in_w);
    const std::string name = "tier3_dilated_d" + std::to_string(d);
    add_case(name, "zero_stuffed", layer, macs,
             [&](OpCounter* c) { dilated_conv_zero_stuffed(x, w, {}, s, c); });
    add_case(name, "comb", layer, macs,
             [&](OpCounter* c) { comb_dilated_conv(xi, p, {}, s, c); });
  }
  return rep;
}

}  // namespace combnet
