//
// Copyright 2026 The caseembed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <span>
#include <vector>

namespace caseembed {

double mean(std::span<const double> v);

// Sample standard deviation (divisor n - 1).
double sample_stddev(std::span<const double> v);

// p in [0, 100], linear interpolation between the closest order statistics.
double percentile(std::vector<double> values, double p);

}  // namespace caseembed
