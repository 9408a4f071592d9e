"""Sparse signal container."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gomp_lab.linalg import as_index_set, as_vector


@dataclass(frozen=True, eq=False)
class SparseSignal:
    """A length-``length`` vector stored as ``(support, values)``.

    ``support`` is strictly increasing and ``values[i]`` is the entry at
    ``support[i]``.  Pursuit estimates reuse this type, so zero values are
    allowed here; :meth:`validate` enforces the planted-signal invariants.
    """

    length: int
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.intp).ravel()
        values = as_vector(self.values) if len(support) else np.zeros(0)
        if values.shape != support.shape:
            raise ValueError("support and values must have the same length")
        order = np.argsort(support, kind="stable")
        object.__setattr__(self, "support", as_index_set(support[order], self.length))
        object.__setattr__(self, "values", values[order])

    @classmethod
    def from_dense(cls, x, atol=0.0):
        x = as_vector(x)
        support = np.flatnonzero(np.abs(x) > atol)
        return cls(x.size, support, x[support])

    @property
    def K(self) -> int:
        return int(self.support.size)

    def dense(self) -> np.ndarray:
        x = np.zeros(self.length)
        x[self.support] = self.values
        return x

    def restricted(self, indices) -> np.ndarray:
        """Entries of the dense vector at ``indices`` (zeros off-support)."""
        return self.dense()[np.asarray(indices, dtype=np.intp)]

    def satisfies_gamma(self, gamma) -> bool:
        mags = np.abs(self.values)
        return bool(mags.size and mags.min() > mags.max() / gamma)

    def validate(self, gamma=None):
        if self.K < 1:
            raise ValueError("a planted signal needs at least one nonzero")
        if np.any(self.values == 0.0):
            raise ValueError("planted signal values must all be nonzero")
        if gamma is not None and not self.satisfies_gamma(gamma):
            from gomp_lab.errors import GammaViolation

            raise GammaViolation(
                f"min |x| = {np.abs(self.values).min():.6g} is not above max |x| / gamma "
                f"= {np.abs(self.values).max() / gamma:.6g}"
            )
        return self
