"""Entanglement bound computations on bipartite states.

Every SDP-backed quantity returns a MeasureResult carrying the certified
primal and dual objective values, their gap, the log2 value in ebits, the
optimizing matrix when one exists, and the interior-point iteration count.
Clamps applied to certified values are the theorem-backed ones only
(W >= 1 since R = I is feasible, fidelities live in [0, 1], mu* <= 1
since R = I is feasible for the distillation program).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ConsistencyError, DomainError, SolverError
from .linalg import (
    RANK_TOL,
    BipartiteState,
    HermitianMatrix,
    hermitize,
    negative_projector,
    op_norm_arr,
    partial_transpose,
    ptranspose_arr,
    support_projector,
    trace_norm_arr,
)
from .sdp import EqConstraint, LinTerm, PsdConstraint, SdpProblem, SolverConfig, TraceTerm, solve
from .states import kron_power_state

NPPT_EIG_THRESHOLD = -1e-8
PRIMAL_DUAL_AGREE_TOL = 1e-6
MULTI_COPY_DIM_CAP = 100
_ADDITIVITY_TOL = 1e-5


@dataclass(frozen=True)
class MeasureResult:
    value_log2: float
    primal_value: float
    dual_value: float
    gap: float
    witness: HermitianMatrix | None = None
    iterations: int = 0


def _solved(problem: SdpProblem, config: SolverConfig | None, what: str):
    sol = solve(problem, config)
    if sol.status != "optimal":
        raise SolverError(f"{what}: solver finished with status {sol.status}", status=sol.status)
    return sol


def _eye(n):
    return np.eye(n, dtype=np.complex128)


def log_negativity(rho: BipartiteState, config: SolverConfig | None = None) -> MeasureResult:
    """log2 of the trace norm of the partial transpose; closed form, no SDP."""
    tn = trace_norm_arr(ptranspose_arr(rho.mat, rho.dims.d_a, rho.dims.d_b))
    value = max(1.0, tn)  # trace norm >= |trace| = 1 for any state
    return MeasureResult(
        value_log2=math.log2(value), primal_value=tn, dual_value=tn, gap=0.0
    )


def w_primal(rho: BipartiteState, config: SolverConfig | None = None) -> MeasureResult:
    """max Re tr(rho^PT R) over -I <= R <= I with R^PT >= 0."""
    n = rho.dims.total
    pt_dims = (rho.dims.d_a, rho.dims.d_b)
    rho_pt = ptranspose_arr(rho.mat, *pt_dims)
    problem = SdpProblem(
        sense="max",
        variables=[("R", n, "hermitian")],
        objective=[("R", rho_pt)],
        constraints=[
            PsdConstraint(dim=n, const=_eye(n), terms=(LinTerm("R", -1.0),), label="I - R"),
            PsdConstraint(dim=n, const=_eye(n), terms=(LinTerm("R", 1.0),), label="I + R"),
            PsdConstraint(dim=n, terms=(LinTerm("R", 1.0, pt_dims),), label="R pt"),
        ],
    )
    sol = _solved(problem, config, "w_primal")
    value = max(1.0, 0.5 * (sol.primal_value + sol.dual_value))
    return MeasureResult(
        value_log2=math.log2(value),
        primal_value=sol.primal_value,
        dual_value=sol.dual_value,
        gap=sol.gap,
        witness=sol.assignments["R"],
        iterations=sol.iterations,
    )


def w_dual(rho: BipartiteState, config: SolverConfig | None = None) -> MeasureResult:
    """min tr(U + V) over U, V >= 0 with (U - V)^PT >= rho; the witness is
    the minimizing X = (U - V)^PT, which dominates rho."""
    n = rho.dims.total
    pt_dims = (rho.dims.d_a, rho.dims.d_b)
    eye = _eye(n)
    problem = SdpProblem(
        sense="min",
        variables=[("U", n, "hermitian-psd"), ("V", n, "hermitian-psd")],
        objective=[("U", eye), ("V", eye)],
        constraints=[
            PsdConstraint(
                dim=n,
                const=-rho.mat,
                terms=(LinTerm("U", 1.0, pt_dims), LinTerm("V", -1.0, pt_dims)),
                label="(U-V) pt >= rho",
            ),
        ],
    )
    sol = _solved(problem, config, "w_dual")
    value = max(1.0, 0.5 * (sol.primal_value + sol.dual_value))
    x = ptranspose_arr(
        sol.assignments["U"].mat - sol.assignments["V"].mat, *pt_dims
    )
    return MeasureResult(
        value_log2=math.log2(value),
        primal_value=sol.primal_value,
        dual_value=sol.dual_value,
        gap=sol.gap,
        witness=HermitianMatrix(x),
        iterations=sol.iterations,
    )


def e_w(rho: BipartiteState, config: SolverConfig | None = None) -> MeasureResult:
    """log2 W from both program forms, cross-checked against each other."""
    wp = w_primal(rho, config)
    wd = w_dual(rho, config)
    vp = max(1.0, 0.5 * (wp.primal_value + wp.dual_value))
    vd = max(1.0, 0.5 * (wd.primal_value + wd.dual_value))
    if abs(vp - vd) > PRIMAL_DUAL_AGREE_TOL:
        raise ConsistencyError(
            f"W program forms disagree: max-form {vp!r} vs min-form {vd!r} "
            f"(|diff| {abs(vp - vd):.3e} > {PRIMAL_DUAL_AGREE_TOL})"
        )
    value = 0.5 * (vp + vd)
    return MeasureResult(
        value_log2=math.log2(value),
        primal_value=vp,
        dual_value=vd,
        gap=abs(vp - vd),
        witness=wp.witness,
        iterations=wp.iterations + wd.iterations,
    )


def fidelity_ppt(rho: BipartiteState, k: float, config: SolverConfig | None = None) -> MeasureResult:
    """Best overlap with a k-level maximally entangled target over PPT
    operations: max Re tr(rho Q), 0 <= Q <= I, -(1/k)I <= Q^PT <= (1/k)I."""
    if k < 1.0:
        raise DomainError(f"fidelity_ppt requires k >= 1, got {k}")
    n = rho.dims.total
    pt_dims = (rho.dims.d_a, rho.dims.d_b)
    eye = _eye(n)
    inv_k = 1.0 / float(k)
    problem = SdpProblem(
        sense="max",
        variables=[("Q", n, "hermitian-psd")],
        objective=[("Q", rho.mat)],
        constraints=[
            PsdConstraint(dim=n, const=eye, terms=(LinTerm("Q", -1.0),), label="I - Q"),
            PsdConstraint(
                dim=n, const=inv_k * eye, terms=(LinTerm("Q", -1.0, pt_dims),), label="k upper"
            ),
            PsdConstraint(
                dim=n, const=inv_k * eye, terms=(LinTerm("Q", 1.0, pt_dims),), label="k lower"
            ),
        ],
    )
    sol = _solved(problem, config, "fidelity_ppt")
    value = min(1.0, max(1e-300, 0.5 * (sol.primal_value + sol.dual_value)))
    return MeasureResult(
        value_log2=math.log2(value),
        primal_value=sol.primal_value,
        dual_value=sol.dual_value,
        gap=sol.gap,
        witness=sol.assignments["Q"],
        iterations=sol.iterations,
    )


def npt_witness_bound(rho: BipartiteState) -> tuple[float, HermitianMatrix]:
    """Closed-form feasible witness R = I - P_minus / max(lam, 1/2) where
    P_minus projects onto the negative eigenspace of rho^PT and lam is the
    operator norm of P_minus^PT. Returns (tr(rho^PT R), R); the value lower
    bounds the max-form W program and exceeds 1 exactly on NPPT states."""
    pt = partial_transpose(rho.rho, rho.dims)
    pminus = negative_projector(pt).mat
    n = rho.dims.total
    lam = op_norm_arr(ptranspose_arr(pminus, rho.dims.d_a, rho.dims.d_b))
    r = _eye(n) - pminus / max(lam, 0.5)
    value = float(np.real(np.trace(pt.mat @ r)))
    return value, HermitianMatrix(r)


def _support_split(rho: BipartiteState) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of the support and kernel of rho (columns), with the
    same rank cutoff as support_projector and real-valued vectors whenever rho
    itself is real."""
    mat = rho.mat
    if float(np.max(np.abs(mat.imag))) <= 1e-13:
        vals, vecs = np.linalg.eigh(mat.real)
        vecs = vecs.astype(np.complex128)
    else:
        vals, vecs = np.linalg.eigh(mat)
    cutoff = RANK_TOL * max(float(vals[-1]), 0.0)
    mask = vals > cutoff
    return vecs[:, mask], vecs[:, ~mask]


def _pinning_probes(supp: np.ndarray, ker: np.ndarray) -> list[tuple[np.ndarray, float]]:
    """Hermitian probes (with target values) that fix a matrix to the identity
    on span(supp): the support block itself plus every support-kernel cross
    component.  Imaginary-direction probes are dropped for real bases; they
    constrain nothing once the problem is restricted to real symmetric
    matrices, and keeping the restriction is lossless for real data."""
    real_basis = (
        float(np.max(np.abs(supp.imag))) <= 1e-13
        and (ker.size == 0 or float(np.max(np.abs(ker.imag))) <= 1e-13)
    )
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    probes = []
    r = supp.shape[1]
    for i in range(r):
        vi = supp[:, i]
        probes.append((np.outer(vi, vi.conj()), 1.0))
        for j in range(i + 1, r):
            vj = supp[:, j]
            cross = np.outer(vi, vj.conj())
            probes.append(((cross + cross.conj().T) * inv_sqrt2, 0.0))
            if not real_basis:
                probes.append((1j * (cross - cross.conj().T) * inv_sqrt2, 0.0))
        for k in range(ker.shape[1]):
            wk = ker[:, k]
            cross = np.outer(vi, wk.conj())
            probes.append(((cross + cross.conj().T) * inv_sqrt2, 0.0))
            if not real_basis:
                probes.append((1j * (cross - cross.conj().T) * inv_sqrt2, 0.0))
    return probes


def det_distill_one_copy(rho: BipartiteState, config: SolverConfig | None = None) -> MeasureResult:
    """One-copy deterministic distillation rate: with P the support projector,
    minimize mu subject to P <= R <= I and -mu I <= R^PT <= mu I, then report
    -log2 of the optimum.

    P <= R <= I pinches R to the identity on the support, so the feasible set
    has no interior as written.  The pinch is imposed here as explicit
    equalities, with the two sandwich constraints replaced by R >= 0 and
    I + P - R >= 0; on the pinned set these are equivalent and the reduced
    problem is strictly feasible."""
    n = rho.dims.total
    pt_dims = (rho.dims.d_a, rho.dims.d_b)
    supp, ker = _support_split(rho)
    eye = _eye(n)
    if supp.shape[1] == n:
        # full-rank state: R = I is the only feasible point and |I^PT| = 1
        return MeasureResult(
            value_log2=0.0,
            primal_value=1.0,
            dual_value=1.0,
            gap=0.0,
            witness=HermitianMatrix(eye),
            iterations=0,
        )
    p_supp = hermitize(supp @ supp.conj().T)
    one = np.array([[1.0]], dtype=np.complex128)
    problem = SdpProblem(
        sense="min",
        variables=[("R", n, "hermitian-psd"), ("mu", 1, "hermitian")],
        objective=[("mu", one)],
        constraints=[
            PsdConstraint(
                dim=n,
                const=eye + p_supp,
                terms=(LinTerm("R", -1.0),),
                label="slack off support",
            ),
            PsdConstraint(
                dim=n,
                terms=(TraceTerm("mu", one, eye), LinTerm("R", -1.0, pt_dims)),
                label="mu upper",
            ),
            PsdConstraint(
                dim=n,
                terms=(TraceTerm("mu", one, eye), LinTerm("R", 1.0, pt_dims)),
                label="mu lower",
            ),
        ],
        equalities=[
            EqConstraint(terms=(("R", probe),), rhs=target, label="R pinned on support")
            for probe, target in _pinning_probes(supp, ker)
        ],
    )
    sol = _solved(problem, config, "det_distill_one_copy")
    # mu* is at most 1 (R = I attains it) and at least 1/n (trace bound on
    # the operator norm of R^PT given R >= P).
    mu = min(1.0, max(0.5 / n, 0.5 * (sol.primal_value + sol.dual_value)))
    return MeasureResult(
        value_log2=-math.log2(mu),
        primal_value=sol.primal_value,
        dual_value=sol.dual_value,
        gap=sol.gap,
        witness=sol.assignments["R"],
        iterations=sol.iterations,
    )


def w0(rho: BipartiteState, config: SolverConfig | None = None) -> MeasureResult:
    """max Re tr(rho R) over 0 <= R <= tr(rho R) I with -I <= R^PT <= I;
    log2 of the optimum matches det_distill_one_copy.

    Since tr(rho (tI - R)) = 0 at t = tr(rho R), every feasible R equals t I
    on the support of rho and the set has no interior.  The scale t becomes
    an explicit variable, the pinch becomes equalities, and the cap turns
    into t(I + P) - R >= 0, which is strictly feasible on the pinned set."""
    n = rho.dims.total
    pt_dims = (rho.dims.d_a, rho.dims.d_b)
    supp, ker = _support_split(rho)
    eye = _eye(n)
    if supp.shape[1] == n:
        # full-rank state: R = t I forced, and |R^PT| <= 1 caps t at 1
        return MeasureResult(
            value_log2=0.0,
            primal_value=1.0,
            dual_value=1.0,
            gap=0.0,
            witness=HermitianMatrix(eye),
            iterations=0,
        )
    p_supp = hermitize(supp @ supp.conj().T)
    one = np.array([[1.0]], dtype=np.complex128)
    equalities = []
    for probe, target in _pinning_probes(supp, ker):
        if target:
            # diagonal support probe: tr(probe R) must track t itself
            equalities.append(
                EqConstraint(
                    terms=(("R", probe), ("t", -target * one)),
                    rhs=0.0,
                    label="R pinned to t on support",
                )
            )
        else:
            equalities.append(
                EqConstraint(terms=(("R", probe),), rhs=0.0, label="R pinned to t on support")
            )
    problem = SdpProblem(
        sense="max",
        variables=[("R", n, "hermitian-psd"), ("t", 1, "hermitian")],
        objective=[("t", one)],
        constraints=[
            PsdConstraint(
                dim=n,
                terms=(TraceTerm("t", one, eye + p_supp), LinTerm("R", -1.0)),
                label="slack off support",
            ),
            PsdConstraint(dim=n, const=eye, terms=(LinTerm("R", -1.0, pt_dims),), label="pt upper"),
            PsdConstraint(dim=n, const=eye, terms=(LinTerm("R", 1.0, pt_dims),), label="pt lower"),
        ],
        equalities=equalities,
    )
    sol = _solved(problem, config, "w0")
    value = max(1.0, 0.5 * (sol.primal_value + sol.dual_value))
    return MeasureResult(
        value_log2=math.log2(value),
        primal_value=sol.primal_value,
        dual_value=sol.dual_value,
        gap=sol.gap,
        witness=sol.assignments["R"],
        iterations=sol.iterations,
    )


def multi_copy(
    measure, rho: BipartiteState, n: int, config: SolverConfig | None = None
) -> MeasureResult:
    """Evaluate a measure on the regrouped n-fold tensor power of rho."""
    if not 1 <= n <= 3:
        raise DomainError(f"multi_copy supports 1 <= n <= 3, got {n}")
    composite = (rho.dims.d_a * rho.dims.d_b) ** n
    if composite > MULTI_COPY_DIM_CAP:
        raise CapacityError(
            f"{n}-copy state dimension {composite} exceeds the solver cap of {MULTI_COPY_DIM_CAP}"
        )
    big = kron_power_state(rho, n)
    result = measure(big, config=config)
    if measure is e_w:
        single = e_w(rho, config=config)
        expect = n * single.value_log2
        if abs(result.value_log2 - expect) > _ADDITIVITY_TOL:
            raise ConsistencyError(
                f"E_W additivity violated on {n} copies: {result.value_log2!r} vs "
                f"{expect!r} (tol {_ADDITIVITY_TOL})"
            )
    return result


def ppt_classification(rho: BipartiteState) -> str:
    """'ppt', 'nppt', or 'boundary' for the band just below zero where the
    sign of the smallest partial-transpose eigenvalue is not trustworthy."""
    pt = ptranspose_arr(rho.mat, rho.dims.d_a, rho.dims.d_b)
    lmin = float(np.linalg.eigvalsh(pt)[0])
    if lmin >= 0.0:
        return "ppt"
    if lmin < NPPT_EIG_THRESHOLD:
        return "nppt"
    return "boundary"
