// Copyright 2026 The ReverB Authors
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

#include "reverb/gradcheck.h"

#include <gtest/gtest.h>

namespace reverb {
namespace {

TEST(Gradcheck, DefaultNetworkPasses) {
  const GradcheckReport r = run_gradcheck(GradcheckOptions{});
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.max_rel_error(), 1e-3);
  EXPECT_GT(r.checked, 100u);
}

TEST(Gradcheck, SeveralSeedsAndTimesteps) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (std::size_t timesteps : {1u, 3u}) {
      GradcheckOptions o;
      o.seed = seed;
      o.timesteps = timesteps;
      const GradcheckReport r = run_gradcheck(o);
      EXPECT_TRUE(r.passed) << "seed " << seed << " T " << timesteps << " err "
                            << r.max_rel_error();
    }
  }
}

TEST(Gradcheck, MemorylessNeuronsPass) {
  GradcheckOptions o;
  o.tau = 0.0;
  EXPECT_TRUE(run_gradcheck(o).passed);
}

TEST(Gradcheck, CorruptedGradientFails) {
  GradcheckOptions o;
  o.corrupt = [](NetworkGrads& g) { g.layers[1].w[0] += 0.5; };
  const GradcheckReport r = run_gradcheck(o);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_rel_error_w, 1e-3);

  GradcheckOptions a;
  a.corrupt = [](NetworkGrads& g) { g.layers[1].alpha[0] += 0.5; };
  EXPECT_FALSE(run_gradcheck(a).passed);
}

TEST(Gradcheck, RelativeError) {
  EXPECT_EQ(relative_error(1e-8, -1e-8), 0.0);
  EXPECT_EQ(relative_error(2.0, 1.0), 0.5);
  EXPECT_EQ(relative_error(-1.0, 1.0), 2.0);
}

}  // namespace
}  // namespace reverb
