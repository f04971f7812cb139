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

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace sdx {

struct Rating {
  double mu = 25.0;
  double sigma = 25.0 / 3.0;

  bool operator==(const Rating&) const = default;
};

struct TrueSkillParams {
  double mu0 = 25.0;
  double sigma0 = 25.0 / 3.0;
  double beta = 25.0 / 6.0;
  double tau = 25.0 / 300.0;
  double draw_probability = 0.10;  // sets the draw margin

  Rating initial() const { return {mu0, sigma0}; }
};

void validate(const TrueSkillParams& params);
void validate(const Rating& rating);

// Draw margin epsilon = Phi^-1((p + 1) / 2) * sqrt(2) * beta.
double draw_margin(const TrueSkillParams& params);

// Truncated-Gaussian corrections. t is the normalized performance gap and
// e the normalized draw margin.
double v_win(double t, double e);
double w_win(double t, double e);
double v_draw(double t, double e);
double w_draw(double t, double e);

// Two-player update. With draw == true the order of the arguments does not
// matter. Throws NumericalFailure on degenerate results.
std::pair<Rating, Rating> trueskill_update(const Rating& winner, const Rating& loser, bool draw,
                                           const TrueSkillParams& params = {});

// Match quality: sqrt(2 b^2 / c^2) * exp(-(mu1 - mu2)^2 / (2 c^2)) with
// c^2 = 2 b^2 + s1^2 + s2^2. This is the figure TrueSkill reports as the
// probability of a draw.
double draw_probability(const Rating& a, const Rating& b, const TrueSkillParams& params = {});

// P(|perf_a - perf_b| < epsilon) under the performance-difference Gaussian.
double draw_margin_mass(const Rating& a, const Rating& b, const TrueSkillParams& params = {});

struct RankedModel {
  int rank = 0;
  std::string model;
  Rating rating;
};

// Descending mu; equal mu falls back to the model name.
std::vector<RankedModel> rank(const std::map<std::string, Rating>& ratings);

nlohmann::json to_json(const Rating& rating);
nlohmann::json to_json(const std::vector<RankedModel>& ranking);

}  // namespace sdx
