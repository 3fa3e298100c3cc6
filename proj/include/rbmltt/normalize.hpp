#pragma once

#include "rbmltt/bound.hpp"
#include "rbmltt/term.hpp"

namespace rbm {

/// Full normal form by substitution, including under binders. Natural-number
/// sums are kept in a canonical shape, succ^c(a1 + ... + ak) with the neutral
/// atoms sorted, so `add (succ k) m` and `succ (add k m)` coincide.
TermPtr normalize(const TermPtr& t);

/// Definitional equality: equal normal forms.
bool convertible(const TermPtr& a, const TermPtr& b);

/// Size reading of the normal form, or an opaque application when none exists.
BoundPtr size_of_normal(const TermPtr& t);

/// Resolver for bound applications: closes the term with the numerals given
/// by the lookup, normalizes, and reads back a numeral.
const TermResolver& term_resolver();

}  // namespace rbm
