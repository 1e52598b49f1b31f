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

#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "combnet/bench.hpp"
#include "combnet/report.hpp"
#include "combnet/verify.hpp"

using namespace combnet;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

VerifyOptions small(std::uint64_t seed) {
  VerifyOptions o;
  o.seed = seed;
  o.conv_cases = 20;
  o.comb_cases = 10;
  o.bn_cases = 10;
  o.e2e_cases = 3;
  o.loss_cases = 3;
  return o;
}

}  // namespace

TEST_CASE("verify passes with the default seed and is byte-identical across runs") {
  const VerifyReport a = run_verify(VerifyOptions{});
  CHECK(a.passed());
  CHECK(a.suites.size() == 7);
  for (const SuiteResult& s : a.suites) {
    CHECK_MESSAGE(s.passed(), s.name << ": " << s.first_failure);
    CHECK(s.cases > 0);
    CHECK(s.max_deviation <= s.tolerance);
  }
  CHECK(a.text() == run_verify(VerifyOptions{}).text());
}

TEST_CASE("verify passes for other seeds") {
  for (std::uint64_t seed : {2u, 17u, 12345u}) {
    const VerifyReport r = run_verify(small(seed));
    CHECK_MESSAGE(r.passed(), r.text());
  }
}

TEST_CASE("verify detects a perturbed packed kernel") {
  VerifyOptions o = small(1);
  o.packed_perturbation = 1e-2f;
  const VerifyReport r = run_verify(o);
  CHECK(!r.passed());
  bool packed_failed = false;
  for (const SuiteResult& s : r.suites)
    if (s.name == "comb_packed") packed_failed = !s.passed() && !s.first_failure.empty();
  CHECK(packed_failed);
  CHECK(r.text().find("FAIL") != std::string::npos);
}

TEST_CASE("bench with one iteration reports every case") {
  BenchOptions o;
  o.iterations = 1;
  o.warmup = 0;
  const BenchReport r = run_bench(NetConfig{}, o);
  REQUIRE(r.cases.size() == 9);
  for (const BenchCase& c : r.cases) {
    CHECK(c.iterations == 1);
    CHECK(c.min_ms == c.median_ms);
    CHECK(c.min_ms == c.mean_ms);
    CHECK(c.min_ms > 0.0);
  }
  CHECK(r.cases[0].macs == count_macs(build_graph(NetConfig{})));
  CHECK(r.timestamp.size() == 20);
  CHECK(r.timestamp.back() == 'Z');

  // Zero-stuffed multiplies grow with dilation, comb stays at the dense count.
  const std::uint64_t want_zero_stuffed[] = {460800, 903168, 1492992};
  for (int d = 0; d < 3; ++d) {
    const BenchCase& zs = r.cases[3 + 2 * d];
    const BenchCase& comb = r.cases[4 + 2 * d];
    CHECK(zs.backend == "zero_stuffed");
    CHECK(comb.backend == "comb");
    CHECK(zs.multiplies == want_zero_stuffed[d]);
    CHECK(comb.multiplies == 165888);
    CHECK(comb.macs == zs.macs);
  }
}

TEST_CASE("bench CSV and table carry identical numbers") {
  BenchOptions o;
  o.iterations = 2;
  o.warmup = 0;
  const BenchReport r = run_bench(NetConfig{}, o);
  const auto csv = split(r.csv(), '\n');
  const auto table = split(r.table(), '\n');
  REQUIRE(csv.size() == r.cases.size() + 2);
  REQUIRE(table.size() == r.cases.size() + 2);
  CHECK(csv[1] == "case,backend,layer,iters,min_ms,median_ms,mean_ms,macs,multiplies,mmacs_per_s,speedup");
  for (std::size_t i = 0; i < r.cases.size(); ++i) {
    const auto fields = split(csv[i + 2], ',');
    REQUIRE(fields.size() == 11);
    std::size_t pos = 0;
    for (const std::string& f : fields) {
      const std::size_t at = table[i + 2].find(f, pos);
      CHECK_MESSAGE(at != std::string::npos, f << " missing from: " << table[i + 2]);
      if (at != std::string::npos) pos = at + f.size();
    }
  }
}

TEST_CASE("count summary of the reference configuration") {
  const CountSummary s = summarize_counts(build_graph(NetConfig{}));
  CHECK(s.params == 42962);
  CHECK(s.flops == 32120146);
  CHECK(s.macs == 15225984);
  CHECK(s.param_delta == doctest::Approx(42962.0 / 41000.0 - 1.0));
  CHECK(s.flop_delta == doctest::Approx(32120146.0 / 35e6 - 1.0));
  CHECK(s.weight_file_bytes < kWeightFileLimit);
  CHECK(s.validation.warnings.empty());
  CHECK(s.validation.violations.empty());
  std::uint64_t inf_params = 0;
  for (const LayerCost& c : s.rows)
    if (c.inference) inf_params += c.params;
  CHECK(inf_params == s.params);
  const std::string text = count_report_text(s);
  CHECK(text.find("42962") != std::string::npos);
  CHECK(text.find("32120146") != std::string::npos);
  CHECK(text.find("tier3.ladder1.block1.spatial") != std::string::npos);
}
