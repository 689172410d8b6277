// Copyright 2026 The mmdest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MMDEST_MMDEST_HPP_
#define MMDEST_MMDEST_HPP_

#include "mmdest/check.hpp"
#include "mmdest/exact_sum.hpp"
#include "mmdest/generators.hpp"
#include "mmdest/kernels.hpp"
#include "mmdest/latent.hpp"
#include "mmdest/mmd.hpp"
#include "mmdest/normal.hpp"
#include "mmdest/optim.hpp"
#include "mmdest/parallel.hpp"
#include "mmdest/robustness.hpp"
#include "mmdest/theory.hpp"
#include "mmdest/types.hpp"

#endif  // MMDEST_MMDEST_HPP_
