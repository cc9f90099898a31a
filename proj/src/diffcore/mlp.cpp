#include "cpw/diffcore/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpw/diffcore/ops.hpp"
#include "cpw/error.hpp"

namespace cpw::diffcore {

Batch make_batch(const Dataset& data) {
  Batch b;
  b.dim = data.empty() ? 0 : data.front().x.size();
  b.x.reserve(data.size() * b.dim);
  b.labels.reserve(data.size());
  for (const auto& ex : data) {
    if (ex.x.size() != b.dim) throw DimensionError("examples have inconsistent feature length");
    b.x.insert(b.x.end(), ex.x.begin(), ex.x.end());
    b.labels.push_back(ex.y);
  }
  return b;
}

Batch make_batch(const std::vector<RegressionPair>& data) {
  Batch b;
  b.dim = data.empty() ? 0 : data.front().x.size();
  for (const auto& p : data) {
    if (p.x.size() != b.dim) throw DimensionError("pairs have inconsistent feature length");
    b.x.insert(b.x.end(), p.x.begin(), p.x.end());
    b.targets.push_back(p.y);
  }
  return b;
}

std::vector<double> dense_stack_forward(const NetworkParams& params, std::size_t first_layer,
                                        std::size_t end_layer, std::span<const double> x, std::size_t n,
                                        MlpWorkspace& ws) {
  const std::size_t count = end_layer - first_layer;
  ws.pre.resize(count);
  ws.post.resize(count);
  ws.wt.resize(count);
  std::span<const double> input = x;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t l = first_layer + k;
    const LayerSpec& spec = params.layer(l);
    if (spec.kind != LayerKind::dense) throw DimensionError("expected a dense layer", l);
    if (input.size() != n * spec.in) {
      throw DimensionError("input width does not match layer fan-in " + std::to_string(spec.in), l);
    }
    const Tensor& w = params.block(l, 0);
    const Tensor& b = params.block(l, 1);

    auto& wt = ws.wt[k];
    wt.resize(spec.in * spec.out);
    for (std::size_t o = 0; o < spec.out; ++o) {
      for (std::size_t i = 0; i < spec.in; ++i) wt[i * spec.out + o] = w(o, i);
    }

    auto& z = ws.pre[k];
    auto& a = ws.post[k];
    z.resize(n * spec.out);
    a.resize(n * spec.out);
    for (std::size_t r = 0; r < n; ++r) {
      double* zr = z.data() + r * spec.out;
      std::copy(b.data(), b.data() + spec.out, zr);
      const double* in = input.data() + r * spec.in;
      for (std::size_t i = 0; i < spec.in; ++i) axpy(in[i], wt.data() + i * spec.out, zr, spec.out);
    }
    bool finite = true;
    for (std::size_t j = 0; j < z.size(); ++j) {
      a[j] = activate(spec.act, z[j]);
      finite = finite && std::isfinite(a[j]);
    }
    if (!finite) throw NumericError("non-finite activation", l);
    input = a;
  }
  return count == 0 ? std::vector<double>(x.begin(), x.end()) : ws.post.back();
}

std::vector<double> dense_stack_backward(const NetworkParams& params, std::size_t first_layer,
                                         std::size_t end_layer, std::span<const double> x, std::size_t n,
                                         std::span<const double> dout, NetworkParams& grad, MlpWorkspace& ws) {
  const std::size_t count = end_layer - first_layer;
  ws.delta.assign(dout.begin(), dout.end());
  for (std::size_t k = count; k-- > 0;) {
    const std::size_t l = first_layer + k;
    const LayerSpec& spec = params.layer(l);
    const Tensor& w = params.block(l, 0);
    Tensor& dw = grad.block(l, 0);
    Tensor& db = grad.block(l, 1);
    const auto& z = ws.pre[k];
    const double* input = k == 0 ? x.data() : ws.post[k - 1].data();

    // delta currently holds dL/da for this layer; turn it into dL/dz.
    if (spec.act != Activation::identity) {
      for (std::size_t j = 0; j < ws.delta.size(); ++j) ws.delta[j] *= activate_derivative(spec.act, z[j]);
    }
    ws.delta_prev.assign(n * spec.in, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double* dz = ws.delta.data() + r * spec.out;
      const double* in = input + r * spec.in;
      double* din = ws.delta_prev.data() + r * spec.in;
      for (std::size_t o = 0; o < spec.out; ++o) {
        const double g = dz[o];
        if (g == 0.0) continue;
        db[o] += g;
        axpy(g, in, dw.data() + o * spec.in, spec.in);
        axpy(g, w.data() + o * spec.in, din, spec.in);
      }
    }
    for (double v : dw.values()) {
      if (!std::isfinite(v)) throw NumericError("non-finite gradient", l);
    }
    ws.delta.swap(ws.delta_prev);
  }
  return ws.delta;
}

std::vector<double> mlp_forward_batch(const NetworkParams& params, std::span<const double> x, std::size_t n,
                                      MlpWorkspace& ws) {
  return dense_stack_forward(params, 0, params.num_layers(), x, n, ws);
}

std::vector<double> mlp_forward_batch(const NetworkParams& params, std::span<const double> x, std::size_t n) {
  MlpWorkspace ws;
  return mlp_forward_batch(params, x, n, ws);
}

std::vector<double> mlp_forward(const NetworkParams& params, std::span<const double> x) {
  return mlp_forward_batch(params, x, 1);
}

namespace {

// Fills `dout` with d(mean loss)/d(output) and returns the mean loss.
double head_loss(const LossHead& head, const Batch& batch, const std::vector<double>& out, std::size_t width,
                 std::vector<double>* dout) {
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  if (dout) dout->assign(out.size(), 0.0);
  double total = 0.0;
  if (std::holds_alternative<CrossEntropyHead>(head)) {
    const double cap = -std::log(kProbabilityFloor);
    for (std::size_t r = 0; r < n; ++r) {
      const double* logits = out.data() + r * width;
      const std::size_t y = batch.labels[r];
      if (y >= width) throw DimensionError("label " + std::to_string(y) + " out of range");
      const double m = *std::max_element(logits, logits + width);
      double s = 0.0;
      for (std::size_t c = 0; c < width; ++c) s += std::exp(logits[c] - m);
      const double log_z = m + std::log(s);
      const double nll = log_z - logits[y];
      if (nll < cap) {
        total += nll;
        if (dout) {
          double* d = dout->data() + r * width;
          for (std::size_t c = 0; c < width; ++c) d[c] = std::exp(logits[c] - log_z) * inv_n;
          d[y] -= inv_n;
        }
      } else {
        total += cap;
      }
    }
  } else {
    const double q = std::get<PinballHead>(head).q;
    if (width != 1) throw DimensionError("pinball head needs a scalar output");
    for (std::size_t r = 0; r < n; ++r) {
      total += pinball_loss(q, batch.targets[r], out[r]);
      if (dout) (*dout)[r] = pinball_grad_yhat(q, batch.targets[r], out[r]) * inv_n;
    }
  }
  return total * inv_n;
}

}  // namespace

double mean_loss(const NetworkParams& params, const Batch& batch, const LossHead& head) {
  if (batch.size() == 0) throw DataError("empty batch");
  MlpWorkspace ws;
  const auto out = mlp_forward_batch(params, batch.x, batch.size(), ws);
  return head_loss(head, batch, out, params.layer(params.num_layers() - 1).out, nullptr);
}

double loss_and_grad(const NetworkParams& params, const Batch& batch, const LossHead& head,
                     NetworkParams& grad, MlpWorkspace& ws) {
  const std::size_t n = batch.size();
  if (n == 0) throw DataError("empty batch");
  if (!(grad.architecture() == params.architecture())) grad = NetworkParams(params.architecture());
  else grad.set_zero();
  const auto out = mlp_forward_batch(params, batch.x, n, ws);
  std::vector<double> dout;
  const double loss = head_loss(head, batch, out, params.layer(params.num_layers() - 1).out, &dout);
  dense_stack_backward(params, 0, params.num_layers(), batch.x, n, dout, grad, ws);
  return loss;
}

LossGrad loss_and_grad(const NetworkParams& params, const Batch& batch, const LossHead& head) {
  LossGrad r;
  MlpWorkspace ws;
  r.loss = loss_and_grad(params, batch, head, r.grad, ws);
  return r;
}

double squared_norm(const NetworkParams& params) noexcept {
  double s = 0.0;
  for (const auto& t : params.blocks()) s += dot(t.data(), t.data(), t.size());
  return s;
}

NetworkParams squared_norm_grad(const NetworkParams& params) {
  NetworkParams g = params;
  g.scale(2.0);
  return g;
}

}  // namespace cpw::diffcore
