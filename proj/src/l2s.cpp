// SPDX-License-Identifier: Apache-2.0

#include "vslice/l2s.hpp"

#include <algorithm>
#include <numeric>

namespace vslice {

double mi_per_rb(double sinr_linear, const MiCurve& curve)
{
    if (sinr_linear < 0.0) throw ContractViolation("mi_per_rb: negative SINR");
    if (std::isinf(sinr_linear)) return curve.modulation_order_bits;
    return std::min(std::log2(1.0 + sinr_linear), static_cast<double>(curve.modulation_order_bits));
}

double effective_mi(std::span<const double> per_rb_mi)
{
    if (per_rb_mi.empty()) throw ContractViolation("effective_mi: empty sequence");
    return std::accumulate(per_rb_mi.begin(), per_rb_mi.end(), 0.0) / static_cast<double>(per_rb_mi.size());
}

double bler(double effective_mi, const MiCurve& curve)
{
    if (effective_mi < 0.0) throw ContractViolation("bler: negative MI");
    return 1.0 / (1.0 + std::exp(curve.slope * (effective_mi - curve.mi_threshold)));
}

double sinr_for_mi(double mi) { return std::exp2(mi) - 1.0; }

HarqOutcome harq_apply(HarqProcess& process, double attempt_sinr, double block_bits, bool success, int max_retx)
{
    if (process.pending_bits <= 0.0) {
        process.pending_bits = block_bits;
        process.accumulated_sinr = 0.0;
        process.attempts = 0;
    }
    process.accumulated_sinr += attempt_sinr;

    HarqOutcome out;
    if (success) {
        out.success = true;
        out.delivered_bits = process.pending_bits;
    } else {
        ++process.attempts;
        if (process.attempts > max_retx) {
            out.dropped = true;
        } else {
            out.retransmit = true;
            return out;
        }
    }
    process.pending_bits = 0.0;
    process.accumulated_sinr = 0.0;
    process.attempts = 0;
    return out;
}

HarqOutcome harq_step(HarqProcess& process, double attempt_sinr, double block_bits, const MiCurve& curve,
                      int max_retx, Rng& rng)
{
    const double combined = (process.pending_bits > 0.0 ? process.accumulated_sinr : 0.0) + attempt_sinr;
    const double p_err = bler(mi_per_rb(combined, curve), curve);
    const bool ok = !rng.bernoulli(p_err);
    return harq_apply(process, attempt_sinr, block_bits, ok, max_retx);
}

} // namespace vslice
