// Copyright 2026 The szmix Authors
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

#pragma once

#include <cstdint>

namespace szmix {

/// Query-complexity counters for one protocol step (or any scoped region).
struct CostLedger {
    std::uint64_t walk_calls = 0;                ///< controlled-W applications
    std::uint64_t diffusion_calls = 0;           ///< U_P / V_P applications outside W
    std::uint64_t projective_measurements = 0;   ///< |pi> projective measurement attempts
    std::uint64_t amplification_iterations = 0;  ///< Grover-type iterations
    std::uint64_t wall_steps = 0;                ///< fresh state preparations started

    CostLedger& operator+=(const CostLedger& o) {
        walk_calls += o.walk_calls;
        diffusion_calls += o.diffusion_calls;
        projective_measurements += o.projective_measurements;
        amplification_iterations += o.amplification_iterations;
        wall_steps += o.wall_steps;
        return *this;
    }

    friend CostLedger operator-(CostLedger a, const CostLedger& b) {
        a.walk_calls -= b.walk_calls;
        a.diffusion_calls -= b.diffusion_calls;
        a.projective_measurements -= b.projective_measurements;
        a.amplification_iterations -= b.amplification_iterations;
        a.wall_steps -= b.wall_steps;
        return a;
    }

    friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

/// Routes charges on the current thread to `ledger` until destroyed. Scopes
/// nest, and a charge reaches every ledger of every enclosing scope.
class LedgerScope {
public:
    explicit LedgerScope(CostLedger& ledger);
    ~LedgerScope();
    LedgerScope(const LedgerScope&) = delete;
    LedgerScope& operator=(const LedgerScope&) = delete;

private:
    friend struct LedgerAccess;
    CostLedger* ledger_;
    LedgerScope* previous_;
};

/// The innermost ledger on this thread, or nullptr.
CostLedger* active_ledger() noexcept;

void charge_walk_calls(std::uint64_t n) noexcept;
void charge_diffusion_calls(std::uint64_t n) noexcept;
void charge_projective_measurement() noexcept;
void charge_amplification_iterations(std::uint64_t n) noexcept;
void charge_wall_step() noexcept;

}  // namespace szmix
