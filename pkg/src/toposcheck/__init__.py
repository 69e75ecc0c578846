"""toposcheck: exhaustive verification of interval-based synthetic structure
(simplices, horns, partiality, completeness conditions) in finite presheaf
toposes, with counterexample witnesses."""

__version__ = "0.1.0"
