"""Self-orthogonal transfer matrices for two-instance linear computation.

The user wants ``Y = V_1 W_1 + ... + V_S W_S`` for two independent data
instances.  Server ``s`` precodes its first instance with ``P_s^{-1}`` and the
servers jointly contribute ``c`` auxiliary qudits, giving the transfer matrix::

    [ V P   Hp |  0   0  ]
    [  0    0  |  V   Gp ]

whose left and right halves ``(Ml, Mr)`` form a self-orthogonal pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    BlockTooWide,
    DimensionMismatch,
    KTooLarge,
    RankDeficientInput,
    RankDeficientV,
    RedundantBlock,
    SingularPrecoder,
)
from .gf import FieldSpec
from .matf import MatF, blkdiag, hstack, mat_inverse, mat_rank, matmul_array, rank_normal_form, vstack


@dataclass(frozen=True)
class LCProblem:
    """``K`` linear combinations of ``S`` data streams, ``V = [V_1 | ... | V_S]``."""

    field: FieldSpec
    K: int
    blocks: tuple[MatF, ...]
    name: str | None = None

    @property
    def S(self) -> int:
        return len(self.blocks)

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(b.cols for b in self.blocks)

    @property
    def m(self) -> int:
        return sum(self.widths)

    @property
    def V(self) -> MatF:
        return hstack(self.blocks)

    def identity_precoders(self) -> list[MatF]:
        return [MatF.identity(self.field, w) for w in self.widths]


def validate_problem(field: FieldSpec, K: int, blocks: Sequence, name: str | None = None) -> LCProblem:
    """Check the standing rank assumptions and return an :class:`LCProblem`.

    ``blocks`` may hold :class:`MatF` instances or nested integer lists.
    """
    mats = []
    for s, b in enumerate(blocks, start=1):
        mat = b if isinstance(b, MatF) else MatF.from_ints(field, b)
        if mat.field != field:
            raise DimensionMismatch(f"server {s}: block is over {mat.field}, expected {field}")
        if mat.rows != K:
            raise DimensionMismatch(f"server {s}: block has {mat.rows} rows, expected K={K}")
        if mat.cols == 0:
            raise DimensionMismatch(f"server {s}: block has no columns")
        mats.append(mat)
    if not mats:
        raise DimensionMismatch("problem needs at least one server")
    for s, mat in enumerate(mats, start=1):
        if mat.cols > K:
            raise BlockTooWide(f"server {s}: m_s={mat.cols} exceeds K={K}")
    m = sum(mat.cols for mat in mats)
    if K > m:
        raise KTooLarge(f"K={K} exceeds total width m={m}")
    for s, mat in enumerate(mats, start=1):
        rk = mat_rank(mat)
        if rk < mat.cols:
            raise RedundantBlock(f"server {s}: rank(V_s)={rk} < m_s={mat.cols}")
    rk = mat_rank(hstack(mats))
    if rk < K:
        raise RankDeficientV(f"rank(V)={rk} < K={K}; requested combinations are dependent")
    return LCProblem(field, K, tuple(mats), name)


@dataclass(frozen=True)
class SOMatrix:
    Ml: MatF
    Mr: MatF

    def __post_init__(self):
        if self.Ml.shape != self.Mr.shape:
            raise DimensionMismatch(f"Ml {self.Ml.shape} and Mr {self.Mr.shape} differ")
        if self.Ml.field != self.Mr.field:
            raise DimensionMismatch("Ml and Mr are over different fields")

    @property
    def field(self) -> FieldSpec:
        return self.Ml.field

    @property
    def kappa(self) -> int:
        return self.Ml.rows

    @property
    def N(self) -> int:
        return self.Ml.cols

    @property
    def M(self) -> MatF:
        return hstack([self.Ml, self.Mr])

    def apply(self, x) -> np.ndarray:
        """Classical transfer ``y = Ml x[:N] + Mr x[N:]``."""
        x = np.asarray(x, dtype=np.int64).reshape(-1, 1)
        if x.shape[0] != 2 * self.N:
            raise DimensionMismatch(f"x has length {x.shape[0]}, expected {2 * self.N}")
        return matmul_array(self.field, self.M.array, x).ravel()


@dataclass(frozen=True)
class SOCheck:
    """Verdict of :func:`check_so`; truthy iff the pair is self-orthogonal."""

    ok: bool
    condition: str | None = None
    entry: tuple[int, int] | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "condition": self.condition,
            "entry": list(self.entry) if self.entry is not None else None,
            "detail": self.detail,
        }


def check_so(Ml: MatF, Mr: MatF) -> SOCheck:
    """Full row rank of ``[Ml, Mr]`` and symmetry of ``Mr @ Ml.T``."""
    if Ml.shape != Mr.shape:
        raise DimensionMismatch(f"Ml {Ml.shape} and Mr {Mr.shape} differ")
    kappa = Ml.rows
    rk = mat_rank(hstack([Ml, Mr]))
    if rk != kappa:
        return SOCheck(False, "rank", None, f"rank([Ml, Mr]) = {rk} != kappa = {kappa}")
    prod = (Mr @ Ml.T).array
    bad = np.argwhere(prod != prod.T)
    if bad.size:
        i, j = (int(v) for v in bad[0])
        return SOCheck(
            False,
            "symmetry",
            (i, j),
            f"(Mr Ml^T)[{i},{j}] = {prod[i, j]} but (Mr Ml^T)[{j},{i}] = {prod[j, i]}",
        )
    return SOCheck(True)


def _check_pair(H: MatF, G: MatF) -> None:
    if H.shape != G.shape:
        raise DimensionMismatch(f"H {H.shape} and G {G.shape} differ")
    K, m = H.shape
    if K > m:
        raise RankDeficientInput(f"K={K} exceeds m={m}")
    if mat_rank(H) != K or mat_rank(G) != K:
        raise RankDeficientInput("H and G must both have full row rank")


def pair_transform(H: MatF, G: MatF) -> tuple[MatF, MatF, int]:
    """Invertible ``B1, B2`` that pair the rows of ``B1 H`` and ``B2 G``.

    After the transform, ``(B1 H)(B2 G)^T`` is diagonal and its first ``c``
    diagonal entries are the only nonzero ones, with ``c = rank(H G^T)``.
    """
    _check_pair(H, G)
    U1, lam, U2 = rank_normal_form(H @ G.T)
    c = int(np.count_nonzero(np.diagonal(lam.array)))
    return U1, U2.T, c


def expand_to_so(H: MatF, G: MatF) -> tuple[MatF, MatF, int]:
    """Columns ``Hp, Gp`` (``K x c`` each) with ``H G^T + Hp Gp^T = 0``.

    The diagonal completion is built in the paired basis and pulled back
    through ``B1^{-1}`` and ``B2^{-1}``.
    """
    B1, B2, c = pair_transform(H, G)
    field = H.field
    K = H.rows
    lam = np.diagonal((B1 @ H @ (B2 @ G).T).array)
    hbar = np.zeros((K, c), dtype=np.int64)
    gbar = np.zeros((K, c), dtype=np.int64)
    for i in range(c):
        hbar[i, i] = field.neg(int(lam[i]))
        gbar[i, i] = 1
    Hp = mat_inverse(B1) @ MatF(field, hbar)
    Gp = mat_inverse(B2) @ MatF(field, gbar)
    assert (H @ G.T + Hp @ Gp.T).is_zero(), "expansion failed to cancel H G^T"
    return Hp, Gp, c


def allocate_aux(widths: Sequence[int], c: int, policy="balanced") -> tuple[int, ...]:
    """Split ``c`` auxiliary qudits among servers.

    ``policy`` is ``"balanced"`` (greedy min-max of ``m_s + a_s``, lowest index
    on ties), ``"server=k"`` (all on 1-based server ``k``), or an explicit
    sequence of counts summing to ``c``.
    """
    S = len(widths)
    if isinstance(policy, str):
        if policy == "balanced":
            alloc = [0] * S
            for _ in range(c):
                load = [w + a for w, a in zip(widths, alloc)]
                peak = max(load)
                s = min(range(S), key=lambda t: (max(peak, load[t] + 1), t))
                alloc[s] += 1
            return tuple(alloc)
        if policy.startswith("server="):
            k = int(policy.split("=", 1)[1])
            if not 1 <= k <= S:
                raise ValueError(f"server index {k} outside 1..{S}")
            alloc = [0] * S
            alloc[k - 1] = c
            return tuple(alloc)
        if "," in policy or policy.isdigit():
            policy = [int(t) for t in policy.split(",")]
        else:
            raise ValueError(f"unknown allocation policy {policy!r}")
    alloc = tuple(int(a) for a in policy)
    if len(alloc) != S or any(a < 0 for a in alloc) or sum(alloc) != c:
        raise ValueError(f"allocation {alloc} must have {S} nonnegative entries summing to c={c}")
    return alloc


@dataclass(frozen=True)
class EncodingPlan:
    problem: LCProblem
    precoders: tuple[MatF, ...]
    c: int
    Hp: MatF
    Gp: MatF
    so: SOMatrix
    allocation: tuple[int, ...]
    rate: Fraction = dc_field(compare=False)

    @property
    def K(self) -> int:
        return self.problem.K

    @property
    def field(self) -> FieldSpec:
        return self.problem.field

    @property
    def P(self) -> MatF:
        return blkdiag(list(self.precoders))

    def encode_input(self, W1, W2) -> np.ndarray:
        """The ``2N`` classical symbols fed to the qudits: ``[P^-1 W1; 0; W2; 0]``."""
        field = self.field
        m = self.problem.m
        W1 = np.asarray(W1, dtype=np.int64).reshape(-1, 1)
        W2 = np.asarray(W2, dtype=np.int64).reshape(-1, 1)
        if W1.shape[0] != m or W2.shape[0] != m:
            raise DimensionMismatch(f"data vectors must have length m={m}")
        pre = matmul_array(field, mat_inverse(self.P).array, W1).ravel()
        zeros = np.zeros(self.c, dtype=np.int64)
        return np.concatenate([pre, zeros, W2.ravel(), zeros])

    def expected_output(self, W1, W2) -> tuple[np.ndarray, np.ndarray]:
        V = self.problem.V.array
        f = self.field
        y1 = matmul_array(f, V, np.asarray(W1, dtype=np.int64).reshape(-1, 1)).ravel()
        y2 = matmul_array(f, V, np.asarray(W2, dtype=np.int64).reshape(-1, 1)).ravel()
        return y1, y2


def assemble_so(H: MatF, Hp: MatF, G: MatF, Gp: MatF) -> SOMatrix:
    field = H.field
    K, m = H.shape
    c = Hp.cols
    top = hstack([H, Hp])
    bottom = hstack([G, Gp])
    zero = MatF.zeros(field, K, m + c)
    return SOMatrix(vstack([top, zero]), vstack([zero, bottom]))


def build_plan(problem: LCProblem, precoders: Sequence[MatF] | None = None, alloc="balanced") -> EncodingPlan:
    if precoders is None:
        precoders = problem.identity_precoders()
    precoders = tuple(precoders)
    if len(precoders) != problem.S:
        raise DimensionMismatch(f"{len(precoders)} precoders for {problem.S} servers")
    for s, (P, w) in enumerate(zip(precoders, problem.widths), start=1):
        if P.shape != (w, w):
            raise DimensionMismatch(f"server {s}: precoder shape {P.shape}, expected {(w, w)}")
        if mat_rank(P) < w:
            raise SingularPrecoder(f"server {s}: precoder is singular")
    V = problem.V
    H = V @ blkdiag(list(precoders))
    Hp, Gp, c = expand_to_so(H, V)
    so = assemble_so(H, Hp, V, Gp)
    allocation = allocate_aux(problem.widths, c, alloc)
    rate = Fraction(2 * problem.K, problem.m + c)
    return EncodingPlan(problem, precoders, c, Hp, Gp, so, allocation, rate)


def classical_decode(plan: EncodingPlan, y) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.int64).ravel()
    K = plan.K
    if y.shape[0] != 2 * K:
        raise DimensionMismatch(f"outcome has length {y.shape[0]}, expected {2 * K}")
    return y[:K], y[K:]


def verify_plan(plan: EncodingPlan, trials: int = 100, seed: int = 0) -> list[dict]:
    """Every failed invariant of a (possibly hand-edited) plan; empty when sound."""
    failures: list[dict] = []
    problem, field = plan.problem, plan.field
    K, m, c = problem.K, problem.m, plan.c

    verdict = check_so(plan.so.Ml, plan.so.Mr)
    if not verdict:
        failures.append({"check": "self_orthogonal", **verdict.as_dict()})

    for s, (P, w) in enumerate(zip(plan.precoders, problem.widths), start=1):
        if P.shape != (w, w) or mat_rank(P) < w:
            failures.append({"check": "precoder", "server": s, "detail": "not an invertible m_s x m_s matrix"})
    if len(plan.precoders) != problem.S or any(f["check"] == "precoder" for f in failures):
        if len(plan.precoders) != problem.S:
            failures.append({"check": "precoder", "detail": f"{len(plan.precoders)} precoders for {problem.S} servers"})
        return failures

    zero = np.zeros((K, m + c), dtype=np.int64)
    expected = {
        "Ml": np.vstack([np.hstack([(problem.V @ plan.P).array, plan.Hp.array]), zero]),
        "Mr": np.vstack([zero, np.hstack([problem.V.array, plan.Gp.array])]),
    }
    for name, actual in (("Ml", plan.so.Ml.array), ("Mr", plan.so.Mr.array)):
        bad = np.argwhere(actual != expected[name])
        if bad.size:
            i, j = (int(v) for v in bad[0])
            failures.append(
                {
                    "check": "transfer_structure",
                    "matrix": name,
                    "entry": [i, j],
                    "detail": f"{name}[{i},{j}] = {actual[i, j]}, expected {expected[name][i, j]}",
                }
            )

    rng = np.random.default_rng(seed)
    for t in range(trials):
        W1 = rng.integers(0, field.d, size=m)
        W2 = rng.integers(0, field.d, size=m)
        y = plan.so.apply(plan.encode_input(W1, W2))
        want = np.concatenate(plan.expected_output(W1, W2))
        if not np.array_equal(y, want):
            row = int(np.flatnonzero(y != want)[0])
            failures.append({"check": "transfer_identity", "trial": t, "row": row, "detail": "M x != [V W1; V W2]"})
            break

    if len(plan.allocation) != problem.S or sum(plan.allocation) != c or min(plan.allocation, default=0) < 0:
        failures.append({"check": "allocation", "detail": f"{list(plan.allocation)} does not split c={c}"})
    if plan.rate != Fraction(2 * K, m + c):
        failures.append({"check": "rate", "detail": f"{plan.rate} != 2K/(m+c) = {Fraction(2 * K, m + c)}"})
    return failures
