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

#include "combnet/forward.hpp"

#include "combnet/error.hpp"
#include "combnet/ops.hpp"

namespace combnet {

const char* backend_name(Backend b) noexcept {
  return b == Backend::Reference ? "reference" : "optimized";
}

Backend parse_backend(const std::string& name) {
  if (name == "reference") return Backend::Reference;
  if (name == "optimized") return Backend::Optimized;
  fail(ErrorCode::InvalidArgument, "unknown backend '" + name + "'");
}

Network::Network(GraphSpec graph, const WeightStore& weights, Backend backend)
    : graph_(std::move(graph)), backend_(backend) {
  const float eps = graph_.config.bn_epsilon;
  for (const ConvLayer* l : all_conv_layers(graph_)) {
    LayerParams p = layer_params(weights, *l, eps);
    PreparedConv pc;
    pc.layer = *l;
    if (backend_ == Backend::Reference) {
      pc.weights = std::move(p.weights);
      pc.bias = std::move(p.bias);
      pc.bn = std::move(p.bn);
    } else {
      pc.folded_spec = l->conv;
      if (p.bn) {
        FoldedConv f = fold_batchnorm(p.weights, p.bias, *p.bn);
        pc.packed = pack_kernels(f.weights, l->conv.groups, graph_.config.lane_width);
        pc.folded_bias = std::move(f.bias);
        pc.folded_spec.has_bias = true;
      } else {
        pc.packed = pack_kernels(p.weights, l->conv.groups, graph_.config.lane_width);
        pc.folded_bias = std::move(p.bias);
      }
    }
    convs_.emplace(l->name, std::move(pc));
  }
}

const Network::PreparedConv& Network::prepared(const std::string& name) const {
  auto it = convs_.find(name);
  require(it != convs_.end(), ErrorCode::MissingWeights, "no prepared conv '" + name + "'");
  return it->second;
}

namespace {

class Executor {
 public:
  Executor(const Network& net, OpCounter* counter, std::vector<TraceEntry>* trace)
      : net_(net), counter_(counter), trace_(trace) {}

  Layout layout() const {
    return net_.backend() == Backend::Reference ? Layout::ChannelPlanar
                                                : Layout::ChannelInterleaved;
  }

  Tensor conv(const ConvLayer& l, const Tensor& x) {
    const auto& pc = net_.prepared(l.name);
    OpCounter ops;
    Tensor y;
    if (net_.backend() == Backend::Reference) {
      y = conv2d_ref(x, pc.weights, pc.bias, l.conv, &ops);
      if (pc.bn) y = batchnorm(y, *pc.bn, &ops);
    } else {
      const ConvSpec& s = pc.folded_spec;
      const bool comb = s.dilation > 1 && s.stride == 1 && s.padding == Padding::Same &&
                        s.kh % 2 == 1 && s.kw % 2 == 1;
      y = comb ? comb_dilated_conv(x, pc.packed, pc.folded_bias, s, &ops)
               : conv2d_packed(x, pc.packed, pc.folded_bias, s, &ops);
    }
    if (l.relu) relu_inplace(y, &ops);
    record(l.name, y, ops);
    return y;
  }

  Tensor residual(const std::string& name, const Tensor& skip, const Tensor& branch) {
    OpCounter ops;
    Tensor y = add(skip, branch, &ops);
    relu_inplace(y, &ops);
    record(name, y, ops);
    return y;
  }

  Tensor pool(const std::string& name, const Tensor& x) {
    OpCounter ops;
    Tensor y = global_avg_pool(x, &ops);
    record(name, y, ops);
    return y;
  }

 private:
  void record(const std::string& name, const Tensor& y, const OpCounter& ops) {
    if (counter_) *counter_ += ops;
    if (trace_) trace_->push_back({name, y.shape(), ops});
  }

  const Network& net_;
  OpCounter* counter_;
  std::vector<TraceEntry>* trace_;
};

std::vector<float> flatten_vector(const Tensor& t) {
  const Tensor p = with_layout(t, Layout::ChannelPlanar);
  return p.storage();
}

Tensor run_tier(Executor& ex, const TierSpec& tier, Tensor x) {
  std::vector<Tensor> unit_outputs;
  for (const auto& unit : tier.units) {
    for (const auto& block : unit.blocks) {
      const Tensor in = x;
      for (const auto& c : block.convs) x = ex.conv(c, x);
      if (block.residual) x = ex.residual(block.name + ".residual", in, x);
    }
    if (tier.concat_units) unit_outputs.push_back(x);
  }
  if (tier.concat_units) return concat_channels(unit_outputs);
  return x;
}

}  // namespace

HeadsOutput Network::forward(const Tensor& image, Mode mode, OpCounter* counter,
                             std::vector<TraceEntry>* trace) const {
  require(image.batch() == 1 && image.channels() == 1 && image.height() == graph_.input_h &&
              image.width() == graph_.input_w,
          ErrorCode::ShapeMismatch,
          "input image must be 1x" + std::to_string(graph_.input_h) + "x" +
              std::to_string(graph_.input_w));
  Executor ex(*this, counter, trace);
  const Tensor input = with_layout(image, ex.layout());

  Tensor x = input;
  for (const auto& tier : graph_.tiers) x = run_tier(ex, tier, x);
  const Tensor tier3 = x;

  HeadsOutput out;
  const Tensor pooled = ex.pool("tier3.pool", tier3);
  out.visibility = flatten_vector(ex.conv(graph_.visibility_head, pooled));

  std::vector<Tensor> dec_out;
  Tensor d = tier3;
  for (const auto& s : graph_.decoder) {
    d = ex.conv(s.conv, upsample_nearest_2x(d));
    dec_out.push_back(d);
  }
  out.heatmaps = with_layout(ex.conv(graph_.heatmap_head, d), Layout::ChannelPlanar);
  if (mode == Mode::InferenceHeads) return out;

  if (graph_.orientation_head)
    out.orientation = flatten_vector(ex.conv(*graph_.orientation_head, pooled));
  if (graph_.pose_head) out.pose = flatten_vector(ex.conv(*graph_.pose_head, pooled));
  if (!graph_.aux_decoder.empty()) {
    Tensor a = tier3;
    for (const auto& s : graph_.aux_decoder) a = ex.conv(s.conv, upsample_nearest_2x(a));
    out.aux_heatmaps = with_layout(a, Layout::ChannelPlanar);
  }
  if (graph_.segmentation_head) {
    Tensor sp = input;
    for (const auto& c : graph_.spatial_path) sp = ex.conv(c, sp);
    Tensor seg = ex.conv(*graph_.segmentation_head, concat_channels({sp, tier3}));
    seg = upsample_nearest_2x(upsample_nearest_2x(seg));
    out.segmentation = with_layout(seg, Layout::ChannelPlanar);
  }
  if (!graph_.deep_supervision.empty()) {
    const Tensor* inputs[3] = {&tier3, &dec_out[0], &dec_out[1]};
    for (int i = 0; i < 3; ++i)
      out.deep_supervision.push_back(with_layout(
          ex.conv(graph_.deep_supervision[i], *inputs[i]), Layout::ChannelPlanar));
  }
  return out;
}

HeadsOutput forward(const GraphSpec& g, const WeightStore& weights, const Tensor& image,
                    Backend backend, Mode mode, OpCounter* counter) {
  return Network(g, weights, backend).forward(image, mode, counter);
}

}  // namespace combnet
