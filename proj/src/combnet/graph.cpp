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

#include "combnet/graph.hpp"

#include <algorithm>

#include "combnet/error.hpp"

namespace combnet {

const char* block_kind_name(BlockKind kind) noexcept {
  switch (kind) {
    case BlockKind::ConvBNReLU: return "ConvBNReLU";
    case BlockKind::Bottleneck131: return "Bottleneck131";
    case BlockKind::DilatedBottleneckResNet: return "DilatedBottleneckResNet";
  }
  return "?";
}

namespace {

ConvLayer make_conv(std::string name, int in, int out, int k, int stride, int groups,
                    int dilation = 1, bool bn = true, bool relu = true, bool bias = false) {
  ConvLayer l;
  l.name = std::move(name);
  l.conv.in_ch = in;
  l.conv.out_ch = out;
  l.conv.kh = l.conv.kw = k;
  l.conv.stride = stride;
  l.conv.groups = groups;
  l.conv.dilation = dilation;
  l.conv.padding = Padding::Same;
  l.conv.has_bias = bias;
  l.batchnorm = bn;
  l.relu = relu;
  return l;
}

ConvLayer make_head(std::string name, int in, int out, int k = 1, int groups = 1) {
  return make_conv(std::move(name), in, out, k, 1, groups, 1, false, false, true);
}

BlockSpec single_conv_block(ConvLayer conv) {
  BlockSpec b;
  b.kind = BlockKind::ConvBNReLU;
  b.name = conv.name;
  b.convs.push_back(std::move(conv));
  return b;
}

}  // namespace

GraphSpec build_graph(const NetConfig& c) {
  require(c.input_h >= 8 && c.input_w >= 8 && c.input_h % 8 == 0 && c.input_w % 8 == 0,
          ErrorCode::Config,
          "input resolution " + std::to_string(c.input_h) + "x" + std::to_string(c.input_w) +
              " must be positive and divisible by 8");
  require(c.tier2_channels % 2 == 0, ErrorCode::Config,
          "tier2_channels must be even (two concatenated units)");
  require(!c.dilations.empty(), ErrorCode::Config, "dilations must not be empty");
  for (int d : c.dilations) require(d >= 1, ErrorCode::Config, "dilations must be >= 1");
  require(c.tier3_units >= 1, ErrorCode::Config, "tier3_units must be >= 1");
  require(c.keypoints_per_hand >= 1 && c.aux_keypoints_per_hand >= 1 &&
              c.orientation_classes >= 1 && c.pose_classes >= 1 &&
              c.segmentation_classes >= 1,
          ErrorCode::Config, "head sizes must be positive");
  require(c.lane_width >= 1, ErrorCode::Config, "lane_width must be >= 1");

  GraphSpec g;
  g.config = c;
  g.input_h = c.input_h;
  g.input_w = c.input_w;

  TierSpec t1;
  t1.index = 1;
  t1.out_channels = c.tier1_channels;
  t1.stride = 2;
  t1.units.push_back({"tier1", {single_conv_block(
                                   make_conv("tier1.conv", 1, c.tier1_channels, 3, 2, 1))}});
  g.tiers.push_back(std::move(t1));

  TierSpec t2;
  t2.index = 2;
  t2.out_channels = c.tier2_channels;
  t2.stride = 2;
  t2.concat_units = true;
  const int unit_out = c.tier2_channels / 2;
  for (int u = 0; u < 2; ++u) {
    const std::string base = "tier2.unit" + std::to_string(u + 1);
    const int in = u == 0 ? c.tier1_channels : unit_out;
    BlockSpec b;
    b.kind = BlockKind::Bottleneck131;
    b.name = base;
    b.convs.push_back(make_conv(base + ".reduce", in, c.tier2_bottleneck, 1, 1, c.tier2_groups));
    b.convs.push_back(make_conv(base + ".spatial", c.tier2_bottleneck, c.tier2_bottleneck, 3,
                                u == 0 ? 2 : 1, c.tier2_groups));
    b.convs.push_back(make_conv(base + ".expand", c.tier2_bottleneck, unit_out, 1, 1,
                                c.tier2_groups));
    t2.units.push_back({base, {std::move(b)}});
  }
  g.tiers.push_back(std::move(t2));

  TierSpec t3;
  t3.index = 3;
  t3.out_channels = c.tier3_channels;
  t3.stride = 2;
  t3.units.push_back({"tier3.entry", {single_conv_block(make_conv(
                                         "tier3.entry", c.tier2_channels, c.tier3_channels, 3,
                                         2, c.tier3_groups))}});
  for (int u = 0; u < c.tier3_units; ++u) {
    UnitSpec unit;
    unit.name = "tier3.ladder" + std::to_string(u + 1);
    for (std::size_t k = 0; k < c.dilations.size(); ++k) {
      const int d = c.dilations[k];
      BlockSpec b;
      b.kind = BlockKind::DilatedBottleneckResNet;
      b.name = unit.name + ".block" + std::to_string(k + 1);
      b.dilation = d;
      b.residual = true;
      b.convs.push_back(make_conv(b.name + ".reduce", c.tier3_channels, c.tier3_bottleneck, 1,
                                  1, c.tier3_groups));
      b.convs.push_back(make_conv(b.name + ".spatial", c.tier3_bottleneck, c.tier3_bottleneck,
                                  3, 1, c.tier3_groups, d));
      b.convs.push_back(make_conv(b.name + ".expand", c.tier3_bottleneck, c.tier3_channels, 1,
                                  1, c.tier3_groups, 1, true, false));
      unit.blocks.push_back(std::move(b));
    }
    t3.units.push_back(std::move(unit));
  }
  g.tiers.push_back(std::move(t3));

  const int K = c.num_keypoints();
  g.decoder.push_back({"decoder1", make_conv("decoder1", c.tier3_channels, K, 3, 1, K)});
  g.decoder.push_back({"decoder2", make_conv("decoder2", K, K, 3, 1, K)});
  g.heatmap_head = make_head("head.heatmap", K, K, 3, K);
  g.visibility_head = make_head("head.visibility", c.tier3_channels, c.num_visibility());

  if (c.orientation_head)
    g.orientation_head = make_head("head.orientation", c.tier3_channels, 2 * c.orientation_classes);
  if (c.pose_head) g.pose_head = make_head("head.pose", c.tier3_channels, 2 * c.pose_classes);
  if (c.aux_keypoint_head) {
    const int A = c.num_aux_keypoints();
    g.aux_decoder.push_back({"aux.decoder1", make_conv("aux.decoder1", c.tier3_channels, A, 3, 1, 1)});
    g.aux_decoder.push_back({"aux.decoder2", make_head("aux.decoder2", A, A, 3, 1)});
  }
  if (c.segmentation_head) {
    g.spatial_path.push_back(make_conv("seg.spatial1", 1, 8, 3, 2, 1));
    g.spatial_path.push_back(make_conv("seg.spatial2", 8, 16, 3, 2, 1));
    g.spatial_path.push_back(make_conv("seg.spatial3", 16, 16, 3, 2, 1));
    g.segmentation_head =
        make_head("seg.head", 16 + c.tier3_channels, c.segmentation_classes);
  }
  if (c.deep_supervision) {
    g.deep_supervision.push_back(make_head("ds.tier3", c.tier3_channels, K));
    g.deep_supervision.push_back(make_head("ds.decoder1", K, K));
    g.deep_supervision.push_back(make_head("ds.decoder2", K, K));
  }

  for (const ConvLayer* l : all_conv_layers(g)) l->conv.validate();
  return g;
}

std::vector<const ConvLayer*> all_conv_layers(const GraphSpec& g, Scope scope) {
  std::vector<const ConvLayer*> out;
  for (const auto& t : g.tiers)
    for (const auto& u : t.units)
      for (const auto& b : u.blocks)
        for (const auto& c : b.convs) out.push_back(&c);
  out.push_back(&g.visibility_head);
  for (const auto& s : g.decoder) out.push_back(&s.conv);
  out.push_back(&g.heatmap_head);
  if (scope == Scope::Inference) return out;
  if (g.orientation_head) out.push_back(&*g.orientation_head);
  if (g.pose_head) out.push_back(&*g.pose_head);
  for (const auto& s : g.aux_decoder) out.push_back(&s.conv);
  for (const auto& c : g.spatial_path) out.push_back(&c);
  if (g.segmentation_head) out.push_back(&*g.segmentation_head);
  for (const auto& c : g.deep_supervision) out.push_back(&c);
  return out;
}

ValidationReport validate_config(const GraphSpec& g, int lane_width) {
  ValidationReport r;
  // Task heads emit a count fixed by the labels (18 logits, 3 classes, ...),
  // so only feature-producing convs are held to the lane width.
  std::vector<const ConvLayer*> heads{&g.visibility_head, &g.heatmap_head};
  if (g.orientation_head) heads.push_back(&*g.orientation_head);
  if (g.pose_head) heads.push_back(&*g.pose_head);
  if (g.segmentation_head) heads.push_back(&*g.segmentation_head);
  for (const auto& s : g.aux_decoder) heads.push_back(&s.conv);
  for (const auto& c : g.deep_supervision) heads.push_back(&c);
  for (const ConvLayer* l : all_conv_layers(g)) {
    if (std::find(heads.begin(), heads.end(), l) != heads.end()) continue;
    const int per_group = l->conv.filters_per_group();
    if (per_group == 1) continue;
    if (lane_width > 0 && per_group % lane_width != 0) {
      r.warnings.push_back(l->name + ": " + std::to_string(per_group) +
                           " filters per group is not a multiple of " +
                           std::to_string(lane_width) + " lanes");
    }
  }

  const NetConfig& c = g.config;
  auto expect = [&](bool ok, const std::string& msg) {
    if (!ok) r.violations.push_back(msg);
  };
  expect(c.tier1_channels == 16, "tier 1 must output 16 channels");
  expect(c.tier2_channels == 32, "tier 2 must output 32 channels");
  expect(c.tier3_channels == 64, "tier 3 must output 64 channels");
  expect(c.tier2_groups == 4, "tier 2 grouping factor must be 4");
  expect(c.tier3_groups == 8, "tier 3 grouping factor must be 8");
  expect(c.dilations == std::vector<int>({1, 2, 3, 4}), "tier 3 ladder dilations must be 1,2,3,4");
  expect(g.input_h % 8 == 0 && g.input_w % 8 == 0, "input resolution must be divisible by 8");
  for (const auto& s : g.decoder)
    expect(s.conv.conv.groups == s.conv.conv.out_ch,
           s.name + ": decoder convs must be channel-wise");
  expect(g.heatmap_head.conv.groups == g.heatmap_head.conv.out_ch,
         "heatmap head must be channel-wise");
  for (const auto& s : g.aux_decoder)
    expect(s.conv.conv.groups == 1, s.name + ": auxiliary decoder convs must not be grouped");
  return r;
}

namespace {

class CostWalker {
 public:
  CostWalker(const GraphSpec& g, Scope scope) : g_(g), scope_(scope) {}

  std::vector<LayerCost> run() {
    const Shape image{1, 1, g_.input_h, g_.input_w};
    Shape x = image;
    for (const auto& tier : g_.tiers) x = tier_shape(tier, x);
    const Shape tier3 = x;

    const Shape pooled = pool("tier3.pool", tier3, true);
    conv(g_.visibility_head, pooled, true);

    Shape d = tier3;
    std::vector<Shape> dec_out;
    for (const auto& s : g_.decoder) {
      d = conv(s.conv, up(d), true);
      dec_out.push_back(d);
    }
    conv(g_.heatmap_head, d, true);

    if (scope_ == Scope::Inference) return std::move(rows_);

    if (g_.orientation_head) conv(*g_.orientation_head, pooled, false);
    if (g_.pose_head) conv(*g_.pose_head, pooled, false);
    Shape a = tier3;
    for (const auto& s : g_.aux_decoder) a = conv(s.conv, up(a), false);
    if (g_.segmentation_head) {
      Shape sp = image;
      for (const auto& c : g_.spatial_path) sp = conv(c, sp, false);
      Shape fused = tier3;
      fused.c += sp.c;
      conv(*g_.segmentation_head, fused, false);
    }
    if (!g_.deep_supervision.empty()) {
      conv(g_.deep_supervision[0], tier3, false);
      conv(g_.deep_supervision[1], dec_out[0], false);
      conv(g_.deep_supervision[2], dec_out[1], false);
    }
    return std::move(rows_);
  }

 private:
  static Shape up(Shape s) {
    s.h *= 2;
    s.w *= 2;
    return s;
  }

  Shape tier_shape(const TierSpec& tier, Shape x) {
    int concat_c = 0;
    for (const auto& unit : tier.units) {
      for (const auto& block : unit.blocks) {
        const Shape in = x;
        for (const auto& c : block.convs) x = conv(c, x, true);
        if (block.residual) {
          LayerCost r;
          r.name = block.name + ".residual";
          r.kind = OpKind::Residual;
          r.in = in;
          r.out = x;
          r.flops = 2 * x.count();
          rows_.push_back(std::move(r));
        }
      }
      concat_c += x.c;
    }
    if (tier.concat_units) x.c = concat_c;
    return x;
  }

  Shape conv(const ConvLayer& l, const Shape& in, bool inference) {
    const ConvSpec& s = l.conv;
    require(in.c == s.in_ch, ErrorCode::Config,
            l.name + ": input has " + std::to_string(in.c) + " channels, conv expects " +
                std::to_string(s.in_ch));
    LayerCost r;
    r.name = l.name;
    r.kind = OpKind::Conv;
    r.conv = l;
    r.in = in;
    r.out = Shape{in.n, s.out_ch, s.out_h(in.h), s.out_w(in.w)};
    r.inference = inference;
    const std::uint64_t elems = r.out.count();
    r.macs = mac_count(s, in.h, in.w);
    r.flops = 2 * r.macs + (s.has_bias ? elems : 0) + (l.batchnorm ? 2 * elems : 0) +
              (l.relu ? elems : 0);
    r.params = conv_layer_params(l);
    const Shape out = r.out;
    rows_.push_back(std::move(r));
    return out;
  }

  Shape pool(const std::string& name, const Shape& in, bool inference) {
    LayerCost r;
    r.name = name;
    r.kind = OpKind::GlobalPool;
    r.in = in;
    r.out = Shape{in.n, in.c, 1, 1};
    r.inference = inference;
    r.flops = in.count() + static_cast<std::uint64_t>(in.n) * in.c;
    const Shape out = r.out;
    rows_.push_back(std::move(r));
    return out;
  }

  const GraphSpec& g_;
  Scope scope_;
  std::vector<LayerCost> rows_;
};

}  // namespace

std::uint64_t conv_layer_params(const ConvLayer& l) {
  const ConvSpec& s = l.conv;
  return static_cast<std::uint64_t>(s.out_ch) * s.in_per_group() * s.kh * s.kw +
         (s.has_bias ? s.out_ch : 0) + (l.batchnorm ? 4ull * s.out_ch : 0);
}

std::vector<LayerCost> enumerate_layers(const GraphSpec& g, Scope scope) {
  return CostWalker(g, scope).run();
}

std::uint64_t count_params(const GraphSpec& g, Scope scope) {
  std::uint64_t total = 0;
  for (const auto& r : enumerate_layers(g, scope)) total += r.params;
  return total;
}

std::uint64_t count_flops(const GraphSpec& g, Scope scope) {
  std::uint64_t total = 0;
  for (const auto& r : enumerate_layers(g, scope)) total += r.flops;
  return total;
}

std::uint64_t count_macs(const GraphSpec& g, Scope scope) {
  std::uint64_t total = 0;
  for (const auto& r : enumerate_layers(g, scope)) total += r.macs;
  return total;
}

}  // namespace combnet
