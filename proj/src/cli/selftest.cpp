// Copyright 2026 The wsrglow-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wsrglow/cli/selftest.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "wsrglow/common/rng.hpp"
#include "wsrglow/dsp/metrics.hpp"
#include "wsrglow/dsp/mulaw.hpp"
#include "wsrglow/flow/flow.hpp"
#include "wsrglow/ndgrad/grad_check.hpp"
#include "wsrglow/ndgrad/ops.hpp"

namespace wsrglow::cli {
namespace {

using ndgrad::Graph;
using ndgrad::Tensor;

constexpr int kTinyRatio = 2;

flow::ModelConfig tiny_config() {
  flow::ModelConfig c;
  c.n_flows = 2;
  c.wn_layers = 2;
  c.wn_channels = 8;
  return c;
}

audio::Waveform random_wave(Rng& rng, std::size_t n, int rate, double amp) {
  audio::Waveform w;
  w.sample_rate = rate;
  w.samples.resize(n);
  for (auto& s : w.samples) s = static_cast<float>(amp * (2.0 * rng.uniform() - 1.0));
  return w;
}

template <typename F>
CheckResult timed(const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

CheckResult check_gradients() {
  flow::Model<double> model(tiny_config(), {}, 11);
  randomize_for_testing(model, 12, 0.05, 0.1);
  Rng rng(13);
  const auto lr = random_wave(rng, 16, 8000, 0.8);
  const auto hr = random_wave(rng, 16 * kTinyRatio, 16000, 0.8);
  auto loss = [&](const Graph<double>& g) {
    auto cond = flow::condition_for(g, lr, model, kTinyRatio);
    return flow::analyze(g, hr, cond, model).nll;
  };
  ndgrad::GradCheckOptions opt;
  opt.seed = 14;
  auto report = ndgrad::grad_check(model.params(), loss, opt);
  CheckResult r;
  r.value = report.max_rel_error;
  r.tolerance = 1e-4;
  r.passed = report.max_rel_error < r.tolerance;
  r.detail = std::to_string(report.entries.size()) + " probes, worst " + report.worst_parameter;
  return r;
}

CheckResult check_round_trip() {
  flow::Model<double> model(tiny_config(), {}, 21);
  randomize_for_testing(model, 22, 0.05, 0.1);
  Rng rng(23);
  const auto lr = random_wave(rng, 16, 8000, 0.8);
  const auto hr = random_wave(rng, 16 * kTinyRatio, 16000, 0.8);
  Graph<double> g(false);
  auto cond = flow::condition_for(g, lr, model, kTinyRatio);
  auto res = flow::analyze(g, hr, cond, model);
  auto back = flow::unsqueeze(flow::generate(res.z, cond, model));
  double err = 0;
  for (std::size_t i = 0; i < hr.samples.size(); ++i) {
    err = std::max(err, std::abs(back.value()[i] - static_cast<double>(hr.samples[i])));
  }
  CheckResult r;
  r.value = err;
  r.tolerance = 1e-9;
  r.passed = err < r.tolerance;
  return r;
}

CheckResult check_jacobian(bool flip) {
  flow::Model<double> model(tiny_config(), {}, 31);
  randomize_for_testing(model, 32, 0.3, 0.2);
  Rng rng(33);
  const auto lr = random_wave(rng, 8, 8000, 0.8);
  const std::size_t d = 8 * kTinyRatio;
  Tensor<double> x({d});
  for (auto& v : x.storage()) v = 0.8 * (2.0 * rng.uniform() - 1.0);

  Graph<double> g(false);
  auto cond = flow::condition_for(g, lr, model, kTinyRatio);
  flow::AnalyzeOptions opt;
  opt.flip_coupling_log_det = flip;
  auto forward = [&](const Tensor<double>& in) {
    return flow::unsqueeze(flow::analyze(g.constant(in), cond, model, opt).z).value();
  };
  const double analytic = flow::analyze(g.constant(x), cond, model, opt).log_det.value().item();

  const double eps = 1e-6;
  Tensor<double> jac({d, d});
  for (std::size_t j = 0; j < d; ++j) {
    Tensor<double> xp = x, xm = x;
    xp[j] += eps;
    xm[j] -= eps;
    const auto fp = forward(xp), fm = forward(xm);
    for (std::size_t i = 0; i < d; ++i) jac.at(i, j) = (fp[i] - fm[i]) / (2 * eps);
  }
  const double numeric = ndgrad::log_abs_det(jac);
  CheckResult r;
  r.value = std::abs(analytic - numeric);
  r.tolerance = 1e-3;
  r.passed = r.value < r.tolerance;
  char buf[96];
  std::snprintf(buf, sizeof buf, "analytic %.6f, finite-difference %.6f", analytic, numeric);
  r.detail = buf;
  return r;
}

CheckResult check_metrics() {
  Rng rng(41);
  double worst = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 4096 + 512 * static_cast<std::size_t>(trial);
    auto ref = random_wave(rng, n, 16000, 0.9);
    auto hyp = ref;
    for (auto& s : hyp.samples) s += static_cast<float>(0.05 * rng.normal());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
      num += double(hyp.samples[i]) * hyp.samples[i];
      const double e = double(ref.samples[i]) - hyp.samples[i];
      den += e * e;
    }
    const double direct = 10.0 * std::log10(num / den);
    worst = std::max(worst, std::abs(direct - dsp::snr(ref, hyp)));
  }
  auto ref = random_wave(rng, 4096, 16000, 0.9);
  const bool identity_ok = std::isinf(dsp::snr(ref, ref)) && dsp::snr(ref, ref) > 0 && dsp::lsd(ref, ref) == 0.0;
  CheckResult r;
  r.value = worst;
  r.tolerance = 1e-6;
  r.passed = worst < r.tolerance && identity_ok;
  r.detail = identity_ok ? "identity pair: inf / 0" : "identity pair sentinel wrong";
  return r;
}

CheckResult check_mulaw() {
  double round_trip = 0, companded = 0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = -1.0 + i / 10000.0;
    const double y = dsp::mulaw_encode(x);
    round_trip = std::max(round_trip, std::abs(dsp::mulaw_decode(y) - x));
    companded = std::max(companded, std::abs(dsp::dequantize_256(dsp::quantize_256(y)) - y));
  }
  const bool endpoints = dsp::mulaw_encode(1.0) == 1.0 && dsp::mulaw_encode(-1.0) == -1.0 &&
                         dsp::mulaw_encode(0.0) == 0.0 && dsp::mulaw_decode(1.0) == 1.0;
  CheckResult r;
  r.value = round_trip;
  r.tolerance = 1e-9;
  // The quantizer may move a companded value by at most half a bin (1/256).
  r.passed = round_trip < r.tolerance && companded <= 1.0 / 256 + 1e-12 && endpoints;
  char buf[96];
  std::snprintf(buf, sizeof buf, "quantizer error %.6g (bound %.6g)", companded, 1.0 / 256);
  r.detail = buf;
  return r;
}

}  // namespace

template <typename T>
void randomize_for_testing(flow::Model<T>& model, std::uint64_t seed, double end_std, double mix_std) {
  Rng rng(seed);
  for (const auto& layer : model.layers()) {
    for (auto* p : {layer.wn.end_weight, layer.wn.end_bias}) {
      for (auto& v : p->value.storage()) v = static_cast<T>(end_std * rng.normal());
    }
    for (auto& v : layer.mix->value.storage()) v += static_cast<T>(mix_std * rng.normal());
  }
}

template void randomize_for_testing(flow::Model<float>&, std::uint64_t, double, double);
template void randomize_for_testing(flow::Model<double>&, std::uint64_t, double, double);

std::vector<CheckResult> run_selftest(const SelftestOptions& options) {
  std::vector<CheckResult> out;
  out.push_back(timed("gradient check", check_gradients));
  out.push_back(timed("invertibility round trip", check_round_trip));
  out.push_back(timed("jacobian log-det", [&] { return check_jacobian(options.flip_coupling_log_det); }));
  out.push_back(timed("metric oracles", check_metrics));
  out.push_back(timed("mu-law round trip", check_mulaw));
  return out;
}

std::string format_results(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-26s %-6s %12s %12s %8s  %s\n", "check", "result", "error", "tolerance", "sec",
                "detail");
  os << buf;
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%-26s %-6s %12.4g %12.4g %8.2f  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                  r.value, r.tolerance, r.seconds, r.detail.c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace wsrglow::cli
