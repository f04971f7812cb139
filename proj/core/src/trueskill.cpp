// Copyright 2026 The sdxkit Authors
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

#include "sdx/trueskill.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "sdx/error.hpp"

namespace sdx {
namespace {

double pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// phi(x) / Phi(x). Far in the lower tail Phi underflows; there the Mills
// ratio expansion gives the ratio directly.
double pdf_over_cdf(double x) {
  if (x > -30.0) return pdf(x) / cdf(x);
  const double x2 = x * x;
  const double mills = (1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)) / -x;
  return 1.0 / mills;
}

void check(double value, const char* what) {
  if (!std::isfinite(value)) fail(Errc::kNumericalFailure, std::string("TrueSkill: non-finite ") + what);
}

}  // namespace

void validate(const TrueSkillParams& p) {
  if (!(p.sigma0 > 0.0) || !(p.beta > 0.0) || !(p.tau >= 0.0) || !std::isfinite(p.mu0)) {
    fail(Errc::kInvalidArgument, "TrueSkill parameters need sigma0 > 0, beta > 0, tau >= 0");
  }
  if (!(p.draw_probability >= 0.0 && p.draw_probability < 1.0)) {
    fail(Errc::kInvalidArgument, "draw_probability must lie in [0, 1)");
  }
}

void validate(const Rating& r) {
  if (!std::isfinite(r.mu) || !(r.sigma > 0.0) || !std::isfinite(r.sigma)) {
    fail(Errc::kInvalidArgument, "rating needs a finite mu and sigma > 0");
  }
}

double draw_margin(const TrueSkillParams& p) {
  if (p.draw_probability == 0.0) return 0.0;
  const boost::math::normal_distribution<double> normal;
  return boost::math::quantile(normal, (p.draw_probability + 1.0) / 2.0) * std::numbers::sqrt2 * p.beta;
}

double v_win(double t, double e) { return pdf_over_cdf(t - e); }

double w_win(double t, double e) {
  const double v = v_win(t, e);
  return v * (v + t - e);
}

double v_draw(double t, double e) {
  // Odd in t; evaluate on |t| where the denominator is best conditioned.
  const double a = std::abs(t);
  const double denom = cdf(e - a) - cdf(-e - a);
  if (!(denom > 0.0)) fail(Errc::kNumericalFailure, "TrueSkill: draw likelihood underflow");
  const double v = (pdf(-e - a) - pdf(e - a)) / denom;
  return t < 0.0 ? -v : v;
}

double w_draw(double t, double e) {
  const double a = std::abs(t);
  const double denom = cdf(e - a) - cdf(-e - a);
  if (!(denom > 0.0)) fail(Errc::kNumericalFailure, "TrueSkill: draw likelihood underflow");
  const double v = v_draw(a, e);
  return v * v + ((e - a) * pdf(e - a) + (e + a) * pdf(e + a)) / denom;
}

std::pair<Rating, Rating> trueskill_update(const Rating& winner, const Rating& loser, bool draw,
                                           const TrueSkillParams& params) {
  validate(params);
  validate(winner);
  validate(loser);
  const double s1 = winner.sigma * winner.sigma + params.tau * params.tau;
  const double s2 = loser.sigma * loser.sigma + params.tau * params.tau;
  const double c2 = 2.0 * params.beta * params.beta + s1 + s2;
  const double c = std::sqrt(c2);
  const double t = (winner.mu - loser.mu) / c;
  const double e = draw_margin(params) / c;
  const double v = draw ? v_draw(t, e) : v_win(t, e);
  const double w = draw ? w_draw(t, e) : w_win(t, e);
  check(v, "v");
  check(w, "w");
  if (!(w > 0.0 && w < 1.0)) fail(Errc::kNumericalFailure, "TrueSkill: variance factor outside (0, 1)");

  Rating a{winner.mu + s1 / c * v, std::sqrt(s1 * (1.0 - s1 / c2 * w))};
  Rating b{loser.mu - s2 / c * v, std::sqrt(s2 * (1.0 - s2 / c2 * w))};
  check(a.mu, "mu");
  check(b.mu, "mu");
  if (!(a.sigma > 0.0) || !(b.sigma > 0.0)) fail(Errc::kNumericalFailure, "TrueSkill: sigma collapsed to zero");
  return {a, b};
}

double draw_probability(const Rating& a, const Rating& b, const TrueSkillParams& params) {
  validate(params);
  validate(a);
  validate(b);
  const double b2 = 2.0 * params.beta * params.beta;
  const double c2 = b2 + a.sigma * a.sigma + b.sigma * b.sigma;
  const double d = a.mu - b.mu;
  return std::sqrt(b2 / c2) * std::exp(-d * d / (2.0 * c2));
}

double draw_margin_mass(const Rating& a, const Rating& b, const TrueSkillParams& params) {
  validate(params);
  validate(a);
  validate(b);
  const double c = std::sqrt(2.0 * params.beta * params.beta + a.sigma * a.sigma + b.sigma * b.sigma);
  const double eps = draw_margin(params);
  const double d = a.mu - b.mu;
  return cdf((eps - d) / c) - cdf((-eps - d) / c);
}

std::vector<RankedModel> rank(const std::map<std::string, Rating>& ratings) {
  std::vector<RankedModel> out;
  for (const auto& [model, r] : ratings) out.push_back({0, model, r});
  std::stable_sort(out.begin(), out.end(), [](const RankedModel& x, const RankedModel& y) {
    if (x.rating.mu != y.rating.mu) return x.rating.mu > y.rating.mu;
    return x.model < y.model;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
  return out;
}

nlohmann::json to_json(const Rating& r) { return {{"mu", r.mu}, {"sigma", r.sigma}}; }

nlohmann::json to_json(const std::vector<RankedModel>& ranking) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : ranking) {
    out.push_back({{"rank", r.rank}, {"model", r.model}, {"mu", r.rating.mu}, {"sigma", r.rating.sigma}});
  }
  return out;
}

}  // namespace sdx
