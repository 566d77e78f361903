"""Partial Stokes operators of the two beams in truncated Fock space.

For beam ``a`` with mode operators ``a_H``, ``a_V``:

    S_0^a = aH+ aH + aV+ aV          S_2^a = aH+ aV + aV+ aH
    S_1^a = aH+ aH - aV+ aV          S_3^a = i (aV+ aH - aH+ aV)

and likewise for beam ``b``; the compound-beam operators are the sums
``S_i = S_i^a + S_i^b``.  On the interior of the truncated space (kets
that no raising transition pushes past the cutoff) they satisfy the
angular-momentum algebra ``[S_1, S_2] = 2i S_3`` and cyclic.

Two evaluation routes are provided and cross-checked in the tests:
explicit scipy.sparse matrices (the default), and a matrix-free
application on the reshaped amplitude tensor used automatically for
very large cutoffs, where building CSR matrices would waste memory.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import FourModeBasis
from .states import FourModeState, NumericError

log = logging.getLogger(__name__)

BEAMS = ("a", "b")
#: beam -> (index of its H mode, index of its V mode) in the basis ordering
_BEAM_MODES = {"a": (0, 1), "b": (2, 3)}

#: above this dimension variance evaluation switches to the matrix-free path
TENSOR_PATH_DIM = 1_500_000

#: dense expansion guard
DENSE_DIM_LIMIT = 5000


@dataclass
class HermitianOperator:
    """A Hermitian observable as a sparse matrix over a FourModeBasis."""

    matrix: sp.csr_matrix
    basis: FourModeBasis
    name: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        if self.dim > DENSE_DIM_LIMIT:
            raise ValueError(
                f"refusing dense expansion at dimension {self.dim} > {DENSE_DIM_LIMIT}"
            )
        return self.matrix.toarray()

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.conj().T
        return 0.0 if d.nnz == 0 else float(np.max(np.abs(d.data)))

    def __matmul__(self, other: "HermitianOperator") -> sp.csr_matrix:
        return self.matrix @ other.matrix


def _hop_matrix(basis: FourModeBasis, i: int, j: int, coef: complex) -> tuple:
    """COO pieces of coef * c_i+ c_j (i != j)."""
    occ = basis.occupations()
    s = basis.strides
    src = np.arange(basis.dim)
    ok = (occ[i] < basis.n_max) & (occ[j] > 0)
    amp = coef * np.sqrt((occ[i][ok] + 1.0) * occ[j][ok])
    tgt = src[ok] + s[i] - s[j]
    return tgt, src[ok], amp


def _single_beam_matrix(component: int, beam: str, basis: FourModeBasis) -> sp.csr_matrix:
    h, v = _BEAM_MODES[beam]
    occ = basis.occupations()
    dim = basis.dim
    if component == 0:
        return sp.diags((occ[h] + occ[v]).astype(np.float64)).tocsr()
    if component == 1:
        return sp.diags((occ[h] - occ[v]).astype(np.float64)).tocsr()
    if component == 2:
        r1, c1, v1 = _hop_matrix(basis, h, v, 1.0)
        r2, c2, v2 = _hop_matrix(basis, v, h, 1.0)
    elif component == 3:
        r1, c1, v1 = _hop_matrix(basis, v, h, 1.0j)
        r2, c2, v2 = _hop_matrix(basis, h, v, -1.0j)
    else:
        raise ValueError(f"Stokes component must be 0..3, got {component}")
    rows = np.concatenate([r1, r2])
    cols = np.concatenate([c1, c2])
    vals = np.concatenate([v1, v2])
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def stokes_operator(component: int, beam: str, basis: FourModeBasis) -> HermitianOperator:
    """S_component of one beam ('a', 'b') or of the compound beam ('total')."""
    if beam in _BEAM_MODES:
        mat = _single_beam_matrix(component, beam, basis)
        name = f"S_{component}^{beam}"
    elif beam == "total":
        mat = _single_beam_matrix(component, "a", basis) + _single_beam_matrix(component, "b", basis)
        name = f"S_{component}"
    else:
        raise ValueError(f"beam must be 'a', 'b' or 'total', got {beam!r}")
    return HermitianOperator(mat, basis, name)


def combination_matrix(coeffs: dict, basis: FourModeBasis) -> sp.csr_matrix:
    """Sparse matrix of O = sum coeffs[(component, beam)] * S_component^beam."""
    out = None
    for (component, beam), c in coeffs.items():
        if c == 0.0:
            continue
        term = _single_beam_matrix(component, beam, basis) * c
        out = term if out is None else out + term
    if out is None:
        return sp.csr_matrix((basis.dim, basis.dim))
    return out.tocsr()


def commutator(op1: HermitianOperator, op2: HermitianOperator) -> sp.csr_matrix:
    return op1.matrix @ op2.matrix - op2.matrix @ op1.matrix


# -- matrix-free application -------------------------------------------------


def _apply_single_tensor(component: int, beam: str, tensor: np.ndarray) -> np.ndarray:
    """O tensor for one S_component^beam; tensor shape (d, d, d, d)."""
    d = tensor.shape[0]
    h, v = _BEAM_MODES[beam]
    n = np.arange(d, dtype=np.float64)

    def on_axes(arr, axis_h, axis_v):
        nh = n.reshape([-1 if ax == axis_h else 1 for ax in range(4)])
        nv = n.reshape([-1 if ax == axis_v else 1 for ax in range(4)])
        if component == 0:
            return arr * (nh + nv)
        if component == 1:
            return arr * (nh - nv)
        # hopping weights: w[p, q] = sqrt((p+1)(q+1)) for the shifted blocks
        w = np.sqrt(np.outer(np.arange(1, d), np.arange(1, d))) if d > 1 else np.zeros((0, 0))
        out = np.zeros_like(arr)
        if d == 1:
            return out
        sl_lo = [slice(None)] * 4
        sl_hi = [slice(None)] * 4
        # term "raise H, lower V": out[i, j] += sqrt(i (j+1)) psi[i-1, j+1]
        sl_lo[axis_h], sl_lo[axis_v] = slice(1, None), slice(None, -1)
        sl_hi[axis_h], sl_hi[axis_v] = slice(None, -1), slice(1, None)
        shape = [1, 1, 1, 1]
        shape[axis_h], shape[axis_v] = d - 1, d - 1
        wb = w.reshape(shape)
        t1 = wb * arr[tuple(sl_hi)]
        # term "lower H, raise V": out[i, j] += sqrt((i+1) j) psi[i+1, j-1]
        # (same symmetric weight array serves both shifted blocks)
        t2 = wb * arr[tuple(sl_lo)]
        if component == 2:
            out[tuple(sl_lo)] += t1
            out[tuple(sl_hi)] += t2
        else:  # component == 3: i (aV+ aH - aH+ aV)
            out[tuple(sl_lo)] += -1j * t1
            out[tuple(sl_hi)] += 1j * t2
        return out

    return on_axes(tensor, h, v)


def apply_combination_tensor(coeffs: dict, tensor: np.ndarray) -> np.ndarray:
    """Matrix-free O @ psi on the (d, d, d, d) amplitude tensor."""
    out = np.zeros_like(tensor, dtype=np.complex128)
    for (component, beam), c in coeffs.items():
        if c == 0.0:
            continue
        out += c * _apply_single_tensor(component, beam, tensor)
    return out


# -- moments -----------------------------------------------------------------


def _as_vector(state, basis: FourModeBasis | None) -> tuple[np.ndarray, FourModeBasis]:
    if isinstance(state, FourModeState):
        basis = basis or FourModeBasis(state.n_max)
        return state.dense(basis), basis
    vec = np.asarray(state)
    if basis is None:
        n_levels = round(vec.size ** 0.25)
        if n_levels**4 != vec.size:
            raise ValueError("cannot infer basis from vector length")
        basis = FourModeBasis(n_levels - 1)
    return vec.astype(np.complex128, copy=False), basis


def _real_expectation(num: complex, den: float, what: str) -> float:
    val = num / den
    if abs(val.imag) > 1e-10 * max(1.0, abs(val)):
        raise NumericError(f"{what}: imaginary leakage {val.imag:.3e}")
    return float(val.real)


def expectation(op: HermitianOperator, state) -> float:
    """<state|op|state> / <state|state>, asserting a real result."""
    vec, _ = _as_vector(state, op.basis)
    den = float(np.vdot(vec, vec).real)
    if den == 0.0:
        raise ValueError("zero state")
    return _real_expectation(np.vdot(vec, op.matrix @ vec), den, op.name or "expectation")


def variance_of_combination(
    coeffs: dict, state, basis: FourModeBasis | None = None, method: str = "auto"
) -> float:
    """Variance of O = sum c_k S_k on a pure state.

    coeffs maps ``(component, beam)`` to a real coefficient, e.g.
    ``{(2, 'a'): 1.0, (2, 'b'): -1.0}`` for ``S_2^a - S_2^b``.  Since O
    is Hermitian, ``<O^2>`` is evaluated as ``||O psi||^2`` -- one
    operator application, never an operator product.  Tiny negative
    results from roundoff are clamped to zero (logged); negative values
    beyond roundoff raise :class:`NumericError`.
    """
    vec, basis = _as_vector(state, basis)
    den = float(np.vdot(vec, vec).real)
    if den == 0.0:
        raise ValueError("zero state")
    if method == "auto":
        method = "tensor" if basis.dim > TENSOR_PATH_DIM else "sparse"
    if method == "sparse":
        ov = combination_matrix(coeffs, basis) @ vec
    elif method == "tensor":
        d = basis.n_levels
        ov = apply_combination_tensor(coeffs, vec.reshape(d, d, d, d)).reshape(-1)
    else:
        raise ValueError(f"method must be auto/sparse/tensor, got {method!r}")
    mean = _real_expectation(np.vdot(vec, ov), den, "combination mean")
    second = float(np.vdot(ov, ov).real) / den
    var = second - mean * mean
    if var < 0.0:
        scale = max(second, 1.0)
        if var >= -1e-10 * scale:
            log.warning("variance %.3e clamped to 0 (roundoff)", var)
            return 0.0
        raise NumericError(f"variance {var:.3e} negative beyond roundoff")
    return var
