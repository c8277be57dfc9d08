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

#include "szmix/cost_ledger.hpp"

namespace szmix {

namespace {
thread_local LedgerScope* g_innermost = nullptr;
}  // namespace

struct LedgerAccess {
    template <class F>
    static void each(F&& f) noexcept {
        for (LedgerScope* s = g_innermost; s != nullptr; s = s->previous_) f(*s->ledger_);
    }
    static CostLedger* innermost() noexcept { return g_innermost ? g_innermost->ledger_ : nullptr; }
};

LedgerScope::LedgerScope(CostLedger& ledger) : ledger_(&ledger), previous_(g_innermost) { g_innermost = this; }

LedgerScope::~LedgerScope() { g_innermost = previous_; }

CostLedger* active_ledger() noexcept { return LedgerAccess::innermost(); }

void charge_walk_calls(std::uint64_t n) noexcept {
    LedgerAccess::each([n](CostLedger& l) { l.walk_calls += n; });
}

void charge_diffusion_calls(std::uint64_t n) noexcept {
    LedgerAccess::each([n](CostLedger& l) { l.diffusion_calls += n; });
}

void charge_projective_measurement() noexcept {
    LedgerAccess::each([](CostLedger& l) { ++l.projective_measurements; });
}

void charge_amplification_iterations(std::uint64_t n) noexcept {
    LedgerAccess::each([n](CostLedger& l) { l.amplification_iterations += n; });
}

void charge_wall_step() noexcept {
    LedgerAccess::each([](CostLedger& l) { ++l.wall_steps; });
}

}  // namespace szmix
