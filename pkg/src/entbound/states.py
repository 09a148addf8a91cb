"""Constructors for the named bipartite states and families used throughout,
plus seeded random state/channel generators for property-test corpora."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidDimsError
from .linalg import BipartiteState, make_state

_COMPLETENESS_ATOL = 1e-10
_PROB_ATOL = 1e-9
_OUTCOME_CUTOFF = 1e-12


def max_entangled(d: int) -> BipartiteState:
    """Phi(d) = (1/d) sum_{i,j} |ii><jj| on d tensor d."""
    if d < 2:
        raise DomainError(f"max_entangled requires d >= 2, got {d}")
    psi = np.zeros(d * d, dtype=np.complex128)
    psi[np.arange(d) * d + np.arange(d)] = 1.0 / np.sqrt(d)
    return make_state(np.outer(psi, psi.conj()), d, d)


def sigma_r(r: float) -> BipartiteState:
    """Rank-2 mixture r|v0><v0| + (1-r)|v1><v1| on 2 tensor 2,
    v0 = (|10> - |11>)/sqrt2, v1 = (|00> + |10> + |11>)/sqrt3."""
    if not 0.0 < r < 1.0:
        raise DomainError(f"sigma_r requires 0 < r < 1, got {r}")
    v0 = np.array([0.0, 0.0, 1.0, -1.0], dtype=np.complex128) / np.sqrt(2.0)
    v1 = np.array([1.0, 0.0, 1.0, 1.0], dtype=np.complex128) / np.sqrt(3.0)
    mat = r * np.outer(v0, v0.conj()) + (1.0 - r) * np.outer(v1, v1.conj())
    return make_state(mat, 2, 2)


def rho_alpha(alpha: float) -> BipartiteState:
    """Rank-3 family on 3 tensor 3: equal mixture of
    |psi_m> = sqrt(alpha)|m,m+1> + sqrt(1-alpha)|m+1,m>, indices mod 3."""
    if not 0.0 < alpha <= 0.5:
        raise DomainError(f"rho_alpha requires 0 < alpha <= 0.5, got {alpha}")
    mat = np.zeros((9, 9), dtype=np.complex128)
    a, b = np.sqrt(alpha), np.sqrt(1.0 - alpha)
    for m in range(3):
        mm = (m + 1) % 3
        psi = np.zeros(9, dtype=np.complex128)
        psi[3 * m + mm] = a
        psi[3 * mm + m] = b
        mat += np.outer(psi, psi.conj()) / 3.0
    return make_state(mat, 3, 3)


def antisym_state() -> BipartiteState:
    """Normalized projector onto the 3-dimensional antisymmetric subspace
    of 3 tensor 3 (span of |ij> - |ji| for i < j)."""
    mat = np.zeros((9, 9), dtype=np.complex128)
    for i in range(3):
        for j in range(i + 1, 3):
            v = np.zeros(9, dtype=np.complex128)
            v[3 * i + j] = 1.0 / np.sqrt(2.0)
            v[3 * j + i] = -1.0 / np.sqrt(2.0)
            mat += np.outer(v, v.conj()) / 3.0
    return make_state(mat, 3, 3)


def random_state(d_a: int, d_b: int, rank: int, seed: int) -> BipartiteState:
    """Ginibre-induced random state of the requested rank; deterministic per seed."""
    n = d_a * d_b
    if not 1 <= rank <= n:
        raise DomainError(f"rank must lie in [1, {n}], got {rank}")
    rng = np.random.default_rng(seed)
    g = (rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))) / np.sqrt(2.0)
    mat = g @ g.conj().T
    return make_state(mat / np.trace(mat).real, d_a, d_b)


def random_pure_state(d_a: int, d_b: int, seed: int) -> BipartiteState:
    return random_state(d_a, d_b, 1, seed)


def random_separable(d_a: int, d_b: int, terms: int, seed: int) -> BipartiteState:
    """Convex mixture of random product pure states; PPT by construction."""
    if terms < 1:
        raise DomainError(f"terms must be >= 1, got {terms}")
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(terms))
    mat = np.zeros((d_a * d_b, d_a * d_b), dtype=np.complex128)
    for t in range(terms):
        a = rng.standard_normal(d_a) + 1j * rng.standard_normal(d_a)
        b = rng.standard_normal(d_b) + 1j * rng.standard_normal(d_b)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        v = np.kron(a, b)
        mat += probs[t] * np.outer(v, v.conj())
    return make_state(mat, d_a, d_b)


@dataclass(frozen=True)
class LocalKrausChannel:
    """Product-form Kraus families with outcomes labeled by index pairs.

    Each side is complete on its own: sum K^dag K = I within 1e-10. The
    pairing selects which (A outcome, B outcome) combinations are kept as
    joint outcomes; total outcome probability is validated at apply time.
    """

    kraus_a: tuple
    kraus_b: tuple
    pairing: tuple

    def __post_init__(self):
        ka = tuple(np.asarray(k, dtype=np.complex128) for k in self.kraus_a)
        kb = tuple(np.asarray(k, dtype=np.complex128) for k in self.kraus_b)
        object.__setattr__(self, "kraus_a", ka)
        object.__setattr__(self, "kraus_b", kb)
        for side, ks in (("A", ka), ("B", kb)):
            if not ks:
                raise DomainError(f"side {side} has no Kraus elements")
            d = ks[0].shape[0]
            for k in ks:
                if k.shape != (d, d):
                    raise InvalidDimsError(f"side {side} Kraus elements must share a square shape")
            total = sum(k.conj().T @ k for k in ks)
            dev = float(np.max(np.abs(total - np.eye(d))))
            if dev > _COMPLETENESS_ATOL:
                raise DomainError(f"side {side} Kraus family not complete (deviation {dev:.3e})")
        for ia, ib in self.pairing:
            if not (0 <= ia < len(ka) and 0 <= ib < len(kb)):
                raise DomainError(f"pairing ({ia}, {ib}) indexes outside the Kraus families")

    @property
    def d_a(self) -> int:
        return self.kraus_a[0].shape[0]

    @property
    def d_b(self) -> int:
        return self.kraus_b[0].shape[0]


@dataclass(frozen=True)
class StateEnsemble:
    members: tuple  # of (probability, BipartiteState)

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        total = 0.0
        for prob, state in self.members:
            if prob < 0:
                raise DomainError(f"ensemble probability {prob} is negative")
            if not isinstance(state, BipartiteState):
                raise DomainError("ensemble members must be BipartiteState values")
            total += prob
        if abs(total - 1.0) > _PROB_ATOL:
            raise DomainError(f"ensemble probabilities sum to {total}, not 1")


def apply_local_channel(rho: BipartiteState, ch: LocalKrausChannel) -> StateEnsemble:
    """Outcome ensemble of (K_A tensor K_B) rho (.)^dag over the channel pairing.

    Outcomes below probability 1e-12 are dropped; the kept probabilities must
    still total 1 (the pairing has to cover a trace-preserving family)."""
    if (ch.d_a, ch.d_b) != (rho.dims.d_a, rho.dims.d_b):
        raise DomainError(
            f"channel acts on {ch.d_a}x{ch.d_b}, state is {rho.dims.d_a}x{rho.dims.d_b}"
        )
    members = []
    total = 0.0
    for ia, ib in ch.pairing:
        op = np.kron(ch.kraus_a[ia], ch.kraus_b[ib])
        out = op @ rho.mat @ op.conj().T
        prob = float(np.trace(out).real)
        total += prob
        if prob < _OUTCOME_CUTOFF:
            continue
        members.append((prob, make_state(out / prob, rho.dims.d_a, rho.dims.d_b)))
    if abs(total - 1.0) > _PROB_ATOL:
        raise DomainError(
            f"channel pairing keeps total probability {total:.12g}; it must be trace preserving"
        )
    return StateEnsemble(tuple(members))


def projective_measurement(d: int) -> tuple:
    """Kraus family of the computational-basis measurement on one d-level side."""
    return tuple(np.outer(_e(d, i), _e(d, i)) for i in range(d))


def _e(d, i):
    v = np.zeros(d, dtype=np.complex128)
    v[i] = 1.0
    return v


def identity_channel(d_a: int, d_b: int) -> LocalKrausChannel:
    ida = (np.eye(d_a, dtype=np.complex128),)
    idb = (np.eye(d_b, dtype=np.complex128),)
    return LocalKrausChannel(kraus_a=ida, kraus_b=idb, pairing=((0, 0),))


def random_local_channel(d_a: int, d_b: int, n_a: int, n_b: int, seed: int) -> LocalKrausChannel:
    """Random trace-preserving local Kraus families with full outcome pairing."""
    rng = np.random.default_rng(seed)

    def family(d, n):
        gs = [
            (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
            for _ in range(n)
        ]
        total = sum(g.conj().T @ g for g in gs)
        w, u = np.linalg.eigh(total)
        inv_half = (u / np.sqrt(w)) @ u.conj().T
        return tuple(g @ inv_half for g in gs)

    pairing = tuple((i, j) for i in range(n_a) for j in range(n_b))
    return LocalKrausChannel(kraus_a=family(d_a, n_a), kraus_b=family(d_b, n_b), pairing=pairing)


def tensor_state(a: BipartiteState, b: BipartiteState) -> BipartiteState:
    """Tensor product regrouped so both A factors precede both B factors."""
    da1, db1 = a.dims.d_a, a.dims.d_b
    da2, db2 = b.dims.d_a, b.dims.d_b
    big = np.kron(a.mat, b.mat)
    big = big.reshape(da1, db1, da2, db2, da1, db1, da2, db2)
    big = big.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    n = da1 * db1 * da2 * db2
    return make_state(big.reshape(n, n), da1 * da2, db1 * db2)


def kron_power_state(rho: BipartiteState, n: int) -> BipartiteState:
    """n-fold tensor power with (A...A)(B...B) subsystem regrouping."""
    if n < 1:
        raise DomainError(f"kron power requires n >= 1, got {n}")
    out = rho
    for _ in range(n - 1):
        out = tensor_state(out, rho)
    return out
