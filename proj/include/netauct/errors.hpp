// Copyright 2026 The netauct Authors
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

#include <stdexcept>
#include <string>

namespace netauct {

/// Thrown when a mechanism pass breaks one of its own bookkeeping
/// invariants (negative weight, infeasible welfare program, ...). These
/// are implementation bugs, never user errors, and are surfaced loudly
/// instead of being papered over.
class InternalInvariantError : public std::logic_error {
 public:
  explicit InternalInvariantError(const std::string& what)
      : std::logic_error("internal invariant violated: " + what) {}
};

/// A welfare maximization was asked to respect contradictory constraints
/// (forced set too large, forced buyer excluded or not participating).
class InfeasibleProgramError : public InternalInvariantError {
 public:
  explicit InfeasibleProgramError(const std::string& what)
      : InternalInvariantError("infeasible welfare program: " + what) {}
};

}  // namespace netauct
