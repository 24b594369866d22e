"""Dense state-vector simulation of stabilizer-based linear computation.

Qudits are ``d``-dimensional with ``d = p^r``.  The local Weyl operator is
``X(a) Z(b)`` with ``X(a)|j> = |j + a>`` and ``Z(b)|j> = w^{tr(j b)} |j>``,
``w = exp(2 pi i / p)``.  A length-``2N`` vector ``x`` (X exponents first,
then Z exponents) labels the tensor product of local operators.

With these conventions ``W(u) W(v) = w^{-tr<u, v>} W(v) W(u)`` where
``<u, v> = u_X . v_Z - u_Z . v_X``.  Consequently, if ``|psi>`` is stabilized
by ``c W(g)``, the encoded state ``W(x)|psi>`` has eigenvalue
``w^{tr(g_Z . x_X - g_X . x_Z)}``.  Reading row ``i`` of a transfer matrix
``[Ml | Mr]`` therefore uses the observable labelled ``(-Mr_i | Ml_i)``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .construct import EncodingPlan, SOMatrix, check_so, classical_decode
from .errors import (
    AmbiguousCharacter,
    CompletionFailure,
    DimensionMismatch,
    NondeterministicOutcome,
    PhaseAssignmentFailure,
    StateTooLarge,
)
from .gf import FieldSpec, trace_dual_basis
from .matf import MatF, mat_rank, nullspace, vstack

DEFAULT_MAX_DIM = 4096
DETERMINISM_TOL = 1e-6


@functools.lru_cache(maxsize=32)
def _local_tables(field: FieldSpec) -> tuple[np.ndarray, np.ndarray]:
    """``src[a][k] = k - a`` and ``phase[b][j] = w^{tr(j b)}``."""
    d, p = field.d, field.p
    el = np.arange(d)
    src = np.stack([field.sub(el, np.int64(a)) for a in range(d)])
    tr = np.stack([field.trace(field.mul(el, np.int64(b))) for b in range(d)])
    phase = np.exp(2j * np.pi * tr / p)
    return src, phase


def weyl(field: FieldSpec, x: int, z: int) -> np.ndarray:
    """The ``d x d`` unitary ``X(x) Z(z)``."""
    src, phase = _local_tables(field)
    d = field.d
    out = np.zeros((d, d), dtype=complex)
    dest = field.add(np.arange(d), np.int64(x))
    out[dest, np.arange(d)] = phase[z]
    return out


def symplectic_form(field: FieldSpec, u, v) -> int:
    """``u_X . v_Z - u_Z . v_X`` over the field."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if u.shape != v.shape or u.ndim != 1 or u.size % 2:
        raise DimensionMismatch(f"incompatible Pauli vectors of shapes {u.shape} and {v.shape}")
    n = u.size // 2
    uv = MatF(field, u[None, :n]) @ MatF(field, v[n:, None])
    vu = MatF(field, u[None, n:]) @ MatF(field, v[:n, None])
    return int((uv - vu).array[0, 0])


def _check_dim(field: FieldSpec, n: int, cap: int) -> int:
    dim = field.d**n
    if dim > cap:
        raise StateTooLarge(dim, cap)
    return dim


def big_weyl(field: FieldSpec, x, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Dense ``d^N x d^N`` matrix of ``W(x)``, qudit 1 as the most significant factor."""
    x = np.asarray(x, dtype=np.int64)
    n = x.size // 2
    _check_dim(field, n, max_dim)
    out = np.ones((1, 1), dtype=complex)
    for k in range(n):
        out = np.kron(out, weyl(field, int(x[k]), int(x[k + n])))
    return out


def apply_weyl(field: FieldSpec, amps: np.ndarray, x) -> np.ndarray:
    """``W(x)`` applied to a flat amplitude vector without forming the matrix."""
    x = np.asarray(x, dtype=np.int64)
    n = x.size // 2
    d = field.d
    src, phase = _local_tables(field)
    psi = amps.reshape((d,) * n)
    for k in range(n):
        a, b = int(x[k]), int(x[k + n])
        if b:
            shape = [1] * n
            shape[k] = d
            psi = psi * phase[b].reshape(shape)
        if a:
            psi = np.take(psi, src[a], axis=k)
    return psi.reshape(-1)


@dataclass(frozen=True)
class QuditState:
    amplitudes: np.ndarray
    N: int
    field: FieldSpec

    def __post_init__(self):
        if self.amplitudes.shape != (self.field.d**self.N,):
            raise DimensionMismatch("amplitude vector does not match d^N")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1) > 1e-9:
            raise ValueError(f"state norm {norm} differs from 1")

    def expectation(self, x, phase: complex = 1.0) -> complex:
        return complex(np.vdot(self.amplitudes, phase * apply_weyl(self.field, self.amplitudes, x)))


@dataclass(frozen=True)
class IsotropicBasis:
    """Independent, pairwise symplectically orthogonal vectors in ``F_d^{2N}``."""

    field: FieldSpec
    vectors: np.ndarray
    phases: tuple[complex, ...] | None = None

    @property
    def N(self) -> int:
        return self.vectors.shape[1] // 2

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def is_isotropic(self) -> bool:
        vs = self.vectors
        return all(
            symplectic_form(self.field, vs[i], vs[j]) == 0 for i in range(len(vs)) for j in range(i + 1, len(vs))
        )


def _pairing_matrix(field: FieldSpec, rows: np.ndarray) -> MatF:
    """Rows ``(-r_Z | r_X)`` so that ``C @ v`` lists ``<r, v>`` for each ``r``."""
    n = rows.shape[1] // 2
    return MatF(field, np.hstack([field.neg(rows[:, n:]), rows[:, :n]]))


def lagrangian_completion(so: SOMatrix) -> IsotropicBasis:
    """Extend the row space of ``[Ml | Mr]`` to a maximal isotropic subspace.

    Repeatedly adds the first vector of the symplectic complement that lies
    outside the current span; the complement of an isotropic space of
    dimension ``k < N`` always has dimension ``2N - k > k``.
    """
    field = so.field
    N = so.N
    if not check_so(so.Ml, so.Mr):
        raise CompletionFailure("input is not self-orthogonal")
    rows = so.M.array.copy()
    rank = mat_rank(MatF(field, rows))
    while rank < N:
        comp = nullspace(_pairing_matrix(field, rows)).array
        for v in comp:
            cand = np.vstack([rows, v[None]])
            if mat_rank(MatF(field, cand)) > rank:
                rows, rank = cand, rank + 1
                break
        else:
            raise CompletionFailure("symplectic complement contained in current span")
    basis = IsotropicBasis(field, rows)
    if not basis.is_isotropic():
        raise CompletionFailure("completed basis is not isotropic")
    return basis


def _scaled_generators(basis: IsotropicBasis) -> np.ndarray:
    """F_p-generators of the stabilizer: every basis vector times ``g^k``, ``k < r``."""
    field = basis.field
    scales = [field.p**k for k in range(field.r)]
    return np.array([field.mul(v, np.int64(s)) for v in basis.vectors for s in scales], dtype=np.int64)


def stabilizer_state(basis: IsotropicBasis) -> tuple[QuditState, IsotropicBasis]:
    """Joint +1 eigenstate of the phased generators, and the phases chosen.

    Starting from ``|0...0>``, each generator ``O`` (with ``O^p = lam I``) is
    projected onto one of its eigenspaces; eigenvalues are tried in the order
    ``lam^{1/p} w^k``, ``k = 0, 1, ...``, and the first with nonzero overlap is
    kept.  The stored phase is the inverse eigenvalue.
    """
    field = basis.field
    N, p = basis.N, field.p
    if basis.dim != N:
        raise PhaseAssignmentFailure(f"basis has dimension {basis.dim}, need {N}")
    dim = field.d**N
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0
    phases = []
    omega = np.exp(2j * np.pi / p)
    for g in _scaled_generators(basis):
        powers = [psi]
        for _ in range(p):
            powers.append(apply_weyl(field, powers[-1], g))
        probe = np.zeros(dim, dtype=complex)
        probe[0] = 1.0
        for _ in range(p):
            probe = apply_weyl(field, probe, g)
        lam = probe[0]
        root = lam ** (1 / p)
        for k in range(p):
            mu = root * omega**k
            proj = sum(powers[t] / mu**t for t in range(p)) / p
            norm = np.linalg.norm(proj)
            if norm > 1e-6:
                psi = proj / norm
                phases.append(1 / mu)
                break
        else:
            raise PhaseAssignmentFailure("no eigenspace of a generator meets the current state")
    state = QuditState(psi, N, field)
    for g, c in zip(_scaled_generators(basis), phases):
        if abs(state.expectation(g, c) - 1) > 1e-9:
            raise PhaseAssignmentFailure("prepared state is not stabilized")
    return state, IsotropicBasis(field, basis.vectors, tuple(phases))


def encode(state: QuditState, x) -> QuditState:
    x = np.asarray(x, dtype=np.int64)
    if x.size != 2 * state.N:
        raise DimensionMismatch(f"x has length {x.size}, expected {2 * state.N}")
    return QuditState(apply_weyl(state.field, state.amplitudes, x), state.N, state.field)


def readout_matrix(so: SOMatrix) -> SOMatrix:
    """Observable labels ``(-Mr | Ml)`` whose eigenvalues spell out ``Ml x_X + Mr x_Z``."""
    return SOMatrix(-so.Mr, so.Ml)


def _observables(field: FieldSpec, rows: np.ndarray) -> list[list[np.ndarray]]:
    scales = [field.p**k for k in range(field.r)]
    return [[field.mul(row, np.int64(s)) for s in scales] for row in rows]


def reference_phases(state: QuditState, so: SOMatrix) -> list[list[complex]]:
    """Phases ``c`` with ``c W(v)|psi> = |psi>`` for every readout observable ``v``."""
    out = []
    for obs in _observables(state.field, readout_matrix(so).M.array):
        row = []
        for v in obs:
            e = state.expectation(v)
            if abs(abs(e) - 1) > DETERMINISM_TOL:
                raise NondeterministicOutcome("readout row is outside the stabilizer")
            row.append(1 / e)
        out.append(row)
    return out


def measure_rows(state: QuditState, so: SOMatrix, phases) -> tuple[np.ndarray, float]:
    """Deterministic readout ``y`` (length ``kappa``) and the smallest ``|<O>|`` seen."""
    field = state.field
    p = field.p
    dual = trace_dual_basis(field) if field.r > 1 else [1]
    y = np.zeros(so.kappa, dtype=np.int64)
    min_mod = 1.0
    for i, (obs, cs) in enumerate(zip(_observables(field, readout_matrix(so).M.array), phases)):
        value = 0
        for v, c, dual_k in zip(obs, cs, dual):
            e = state.expectation(v, c)
            min_mod = min(min_mod, abs(e))
            if abs(e) < 1 - DETERMINISM_TOL:
                raise NondeterministicOutcome(f"row {i}: |<O>| = {abs(e):.3g}")
            k = np.angle(e) * p / (2 * np.pi)
            t = int(np.rint(k))
            if abs(k - t) > 1e-6:
                raise AmbiguousCharacter(f"row {i}: phase is not a p-th root of unity")
            value = field.add(value, field.mul(t % p, dual_k))
        y[i] = value
    return y, min_mod


class PlanSimulator:
    """Prepared simulation of one encoding plan.

    State preparation, reference phases and the calibration map are computed
    once; :meth:`run` then costs one encoding and ``kappa * r`` expectations.
    """

    def __init__(self, plan: EncodingPlan, max_dim: int = DEFAULT_MAX_DIM):
        self.plan = plan
        self.field = plan.field
        self.so = plan.so
        _check_dim(self.field, self.so.N, max_dim)
        self.basis = lagrangian_completion(readout_matrix(self.so))
        self.state, self.basis = stabilizer_state(self.basis)
        self.phases = reference_phases(self.state, self.so)
        self.calibration = self._calibrate()

    def measure(self, x) -> tuple[np.ndarray, float]:
        return measure_rows(encode(self.state, x), self.so, self.phases)

    def _calibrate(self) -> np.ndarray:
        """Per-row scale ``s_i`` with ``measured_i = s_i (M x)_i`` from unit probes."""
        field = self.field
        M = self.so.M.array
        scale = np.zeros(self.so.kappa, dtype=np.int64)
        probes = []
        for j in range(2 * self.so.N):
            x = np.zeros(2 * self.so.N, dtype=np.int64)
            x[j] = 1
            probes.append((j, self.measure(x)[0]))
        for i in range(self.so.kappa):
            j = int(np.flatnonzero(M[i])[0])
            y_j = dict(probes)[j]
            scale[i] = field.mul(int(y_j[i]), field.inv(int(M[i, j])))
        for j, y in probes:
            expect = field.mul(scale, M[:, j])
            if not np.array_equal(expect, y):
                raise NondeterministicOutcome("readout is not a per-row rescaling of the transfer matrix")
        minus_one = field.neg(1)
        if not np.all((scale == 1) | (scale == minus_one)):
            raise NondeterministicOutcome(f"calibration {scale.tolist()} is not a sign pattern")
        return scale

    def transfer(self, x) -> tuple[np.ndarray, float]:
        """Simulated ``y = M x`` after undoing the calibration signs."""
        y, mod = self.measure(x)
        return self.field.mul(y, self.field.inv(self.calibration)), mod

    def run(self, W1, W2) -> tuple[np.ndarray, np.ndarray, float]:
        y, mod = self.transfer(self.plan.encode_input(W1, W2))
        Y1, Y2 = classical_decode(self.plan, y)
        return Y1, Y2, mod


def end_to_end(plan: EncodingPlan, W1, W2, max_dim: int = DEFAULT_MAX_DIM) -> tuple[np.ndarray, np.ndarray]:
    Y1, Y2, _ = PlanSimulator(plan, max_dim).run(W1, W2)
    return Y1, Y2
