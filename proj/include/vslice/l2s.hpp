// SPDX-License-Identifier: Apache-2.0
//
// Link-to-system abstraction: a mutual-information effective SINR mapping
// surrogate (capped Shannon MI per RB, mean-MI compression, logistic BLER)
// plus Chase-combining HARQ.

#ifndef VSLICE_L2S_HPP
#define VSLICE_L2S_HPP

#include <span>

#include "vslice/common.hpp"

namespace vslice {

struct MiCurve {
    int modulation_order_bits = 4;
    double mi_threshold = 3.0;
    double slope = 10.0;
};

/// min(log2(1 + sinr), modulation_order_bits), bits per symbol.
double mi_per_rb(double sinr_linear, const MiCurve& curve);

/// Arithmetic mean of per-RB MI. Empty input is a contract violation.
double effective_mi(std::span<const double> per_rb_mi);

/// 1 / (1 + exp(slope * (MI - threshold))).
double bler(double effective_mi, const MiCurve& curve);

/// SINR whose (uncapped) MI equals `mi`: 2^mi - 1.
double sinr_for_mi(double mi);

struct HarqProcess {
    VehicleId vehicle = 0;
    double accumulated_sinr = 0.0; // Chase-combined, linear
    int attempts = 0;              // failed attempts on the pending block
    double pending_bits = 0.0;     // size of the pending block, 0 when idle
};

struct HarqOutcome {
    double delivered_bits = 0.0;
    bool success = false;
    bool retransmit = false; // block stays pending
    bool dropped = false;    // gave up after max_retx retransmissions
};

/// Applies one transmission attempt with a known decoding result. A new block
/// of `block_bits` starts when the process is idle; a pending block keeps its
/// original size and accumulates SINR.
HarqOutcome harq_apply(HarqProcess& process, double attempt_sinr, double block_bits, bool success, int max_retx);

/// Combines the attempt SINR, evaluates BLER on the combined SINR and draws the
/// decoding result.
HarqOutcome harq_step(HarqProcess& process, double attempt_sinr, double block_bits, const MiCurve& curve,
                      int max_retx, Rng& rng);

} // namespace vslice

#endif
