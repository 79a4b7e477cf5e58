#pragma once

#include "inlinerec/multiset.hpp"

namespace inlinerec {

// Classifier recoveries plus decompiler recoveries. The two are disjoint by
// construction (reconciliation dropped the markers of decompiler-recovered
// calls), so the union is the multiset sum.
inline Multiset combine(const Multiset& model, const Multiset& decompiler) {
    return model + decompiler;
}

} // namespace inlinerec
