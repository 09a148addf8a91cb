"""Interior-point engine behind sdp.solve.

Compiles a modeled problem onto an orthonormal Hermitian coordinate basis
(one real coordinate per matrix entry degree of freedom), then runs an
infeasible-start primal-dual path-following method with Nesterov-Todd
scaling and a Mehrotra predictor-corrector step. Dense, deterministic,
single-threaded; sized for matrix variables up to ~100 rows total.

When every datum in the problem is real, variables are restricted to real
symmetric coordinates. The imaginary coordinates decouple exactly in that
case (conjugating any solution by entrywise complex conjugation preserves
feasibility and objective), so the restriction is lossless and the reduced
dual certificates remain certificates for the full problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import kernels
from .errors import CapacityError, InvalidStateError, NumericError
from .linalg import hermitize, ptranspose_arr
from .sdp import LinTerm, PsdConstraint, SdpProblem

# Total variable dimension cap, counted after real embedding (2n per n-dim
# Hermitian variable). Keeps dense Schur assembly and factorization tractable.
EMBEDDED_DIM_CAP = 208

_REAL_DATA_TOL = 1e-13
_RT2 = np.sqrt(2.0)


# ---------------------------------------------------------------------------
# coordinate basis


def _basis_entries(n: int, real_mode: bool):
    """Entry table of an orthonormal Hermitian basis of dimension n.

    Coordinate a is the matrix E_a = sum_e vals[a,e] |rows[a,e]><cols[a,e]|;
    diagonal units first, then sqrt(1/2)-scaled real (and, unless real_mode,
    imaginary) off-diagonal pairs in lexicographic order.
    """
    mv = n * (n + 1) // 2 if real_mode else n * n
    rows = np.zeros((mv, 2), dtype=np.int64)
    cols = np.zeros((mv, 2), dtype=np.int64)
    vals = np.zeros((mv, 2), dtype=np.complex128)
    cnts = np.zeros(mv, dtype=np.int64)
    a = 0
    for p in range(n):
        rows[a, 0] = cols[a, 0] = p
        vals[a, 0] = 1.0
        cnts[a] = 1
        a += 1
    inv = 1.0 / _RT2
    for p in range(n):
        for q in range(p + 1, n):
            rows[a], cols[a] = (p, q), (q, p)
            vals[a] = (inv, inv)
            cnts[a] = 2
            a += 1
            if not real_mode:
                rows[a], cols[a] = (p, q), (q, p)
                vals[a] = (1j * inv, -1j * inv)
                cnts[a] = 2
                a += 1
    return rows, cols, vals, cnts


def _hvec(X, rows, cols, vals):
    return np.real(np.sum(vals * X[cols, rows], axis=1))


def _unhvec(yv, rows, cols, vals, n):
    X = np.zeros((n, n), dtype=np.complex128)
    np.add.at(X, (rows.ravel(), cols.ravel()), (vals * yv[:, None]).ravel())
    return X


def _pt_map(rows, cols, d_a, d_b):
    r2 = (rows // d_b) * d_b + cols % d_b
    c2 = (cols // d_b) * d_b + rows % d_b
    return r2, c2


# ---------------------------------------------------------------------------
# compiled form


@dataclass
class CompiledBlock:
    n: int
    const: np.ndarray
    label: str
    rows: np.ndarray  # (m, W) int64
    cols: np.ndarray
    vals: np.ndarray  # (m, W) complex
    cnts: np.ndarray  # (m,) int64
    tterms: tuple  # of (coeff, pvec (m,), K (n, n))
    sem_terms: tuple  # original model terms, for basis-free evaluation
    dnorm: float = 0.0


@dataclass
class Compiled:
    var_names: list
    var_dims: dict
    var_slices: dict
    bases: dict
    m: int
    c: np.ndarray
    sense_mult: float
    constant: float
    blocks: list
    A: np.ndarray
    b: np.ndarray
    real_mode: bool
    rows_st: np.ndarray
    cols_st: np.ndarray
    vals_st: np.ndarray
    cnts_st: np.ndarray
    nmax: int
    static_infeasible: bool = False
    eq_keep: np.ndarray = None  # indices of equality rows with a nonzero gradient


def _problem_is_real(problem: SdpProblem) -> bool:
    def _real(arr):
        return float(np.max(np.abs(np.imag(arr)))) <= _REAL_DATA_TOL if arr.size else True

    for _, C in problem.objective:
        if not _real(C):
            return False
    for con in problem.constraints:
        if not _real(con.const):
            return False
        for t in con.terms:
            if not isinstance(t, LinTerm) and not (_real(t.probe) and _real(t.gain)):
                return False
    for eq in problem.equalities:
        if any(not _real(p) for _, p in eq.terms):
            return False
    return True


def compile_problem(problem: SdpProblem) -> Compiled:
    if not problem.variables:
        raise InvalidStateError("problem has no variables")
    embedded = sum(2 * dim for _, dim, _ in problem.variables)
    if embedded > EMBEDDED_DIM_CAP:
        raise CapacityError(
            f"total variable dimension after real embedding is {embedded}, "
            f"exceeding the solver cap of {EMBEDDED_DIM_CAP}"
        )

    real_mode = _problem_is_real(problem)
    var_names = [name for name, _, _ in problem.variables]
    var_dims = {name: dim for name, dim, _ in problem.variables}
    bases = {}
    var_slices = {}
    off = 0
    for name, dim, _ in problem.variables:
        bases[name] = _basis_entries(dim, real_mode)
        mv = bases[name][0].shape[0]
        var_slices[name] = slice(off, off + mv)
        off += mv
    m = off

    c_user = np.zeros(m)
    for name, C in problem.objective:
        br, bc, bv, _ = bases[name]
        c_user[var_slices[name]] += _hvec(C, br, bc, bv)
    sense_mult = 1.0 if problem.sense == "max" else -1.0
    c = sense_mult * c_user

    cons = list(problem.constraints)
    for name, dim, kind in problem.variables:
        if kind == "hermitian-psd":
            cons.append(PsdConstraint(dim=dim, terms=(LinTerm(name),), label=f"{name} >= 0"))

    blocks = []
    static_infeasible = False
    for con in cons:
        entry_lists = [[] for _ in range(m)]
        tterms = []
        for t in con.terms:
            sl = var_slices[t.var]
            br, bc, bv, bcnt = bases[t.var]
            if isinstance(t, LinTerm):
                tr, tc = (br, bc) if t.pt_dims is None else _pt_map(br, bc, *t.pt_dims)
                tv = bv * t.coeff
                for a in range(br.shape[0]):
                    lst = entry_lists[sl.start + a]
                    for e in range(bcnt[a]):
                        lst.append((tr[a, e], tc[a, e], tv[a, e]))
            else:
                pvec = np.zeros(m)
                pvec[sl] = _hvec(t.probe, br, bc, bv)
                tterms.append((float(t.coeff), pvec, t.gain.copy()))
        if not con.terms and float(np.linalg.eigvalsh(con.const)[0]) < -1e-12:
            static_infeasible = True
        W = max((len(lst) for lst in entry_lists), default=0)
        W = max(W, 1)
        rows = np.zeros((m, W), dtype=np.int64)
        cols = np.zeros((m, W), dtype=np.int64)
        vals = np.zeros((m, W), dtype=np.complex128)
        cnts = np.zeros(m, dtype=np.int64)
        for i, lst in enumerate(entry_lists):
            for e, (r, cc, u) in enumerate(lst):
                rows[i, e], cols[i, e], vals[i, e] = r, cc, u
            cnts[i] = len(lst)
        blocks.append(
            CompiledBlock(
                n=con.dim,
                const=con.const.astype(np.complex128),
                label=con.label,
                rows=rows,
                cols=cols,
                vals=vals,
                cnts=cnts,
                tterms=tuple(tterms),
                sem_terms=tuple(con.terms),
                dnorm=float(np.linalg.norm(con.const, 2)) if con.dim else 0.0,
            )
        )

    p = len(problem.equalities)
    A = np.zeros((p, m))
    b = np.zeros(p)
    for r, eq in enumerate(problem.equalities):
        for v, probe in eq.terms:
            br, bc, bv, _ = bases[v]
            A[r, var_slices[v]] += _hvec(probe, br, bc, bv)
        b[r] = eq.rhs

    # An equality whose gradient vanishes on the coordinate space (imaginary
    # probes against real data after the real embedding) is either trivially
    # satisfied or unsatisfiable; keep only rows that actually constrain y.
    if p:
        row_inf = np.max(np.abs(A), axis=1)
        ascale = max(float(np.max(row_inf)), 1.0)
        zero_rows = row_inf <= 1e-14 * ascale
        if np.any(zero_rows & (np.abs(b) > 1e-12)):
            static_infeasible = True
        eq_keep = np.flatnonzero(~zero_rows)
    else:
        eq_keep = np.zeros(0, dtype=np.int64)

    nb = len(blocks)
    nmax = max((blk.n for blk in blocks), default=1)
    Wmax = max((blk.rows.shape[1] for blk in blocks), default=1)
    rows_st = np.zeros((nb, m, Wmax), dtype=np.int64)
    cols_st = np.zeros((nb, m, Wmax), dtype=np.int64)
    vals_st = np.zeros((nb, m, Wmax), dtype=np.complex128)
    cnts_st = np.zeros((nb, m), dtype=np.int64)
    for j, blk in enumerate(blocks):
        w = blk.rows.shape[1]
        rows_st[j, :, :w] = blk.rows
        cols_st[j, :, :w] = blk.cols
        vals_st[j, :, :w] = blk.vals
        cnts_st[j] = blk.cnts

    return Compiled(
        var_names=var_names,
        var_dims=var_dims,
        var_slices=var_slices,
        bases=bases,
        m=m,
        c=c,
        sense_mult=sense_mult,
        constant=problem.constant,
        blocks=blocks,
        A=A,
        b=b,
        real_mode=real_mode,
        rows_st=rows_st,
        cols_st=cols_st,
        vals_st=vals_st,
        cnts_st=cnts_st,
        nmax=nmax,
        static_infeasible=static_infeasible,
        eq_keep=eq_keep,
    )


# ---------------------------------------------------------------------------
# evaluation helpers


def apply_block(blk: CompiledBlock, y: np.ndarray) -> np.ndarray:
    """Structural + trace-term image F_j(y), without the constant."""
    mat = np.zeros((blk.n, blk.n), dtype=np.complex128)
    np.add.at(mat, (blk.rows.ravel(), blk.cols.ravel()), (blk.vals * y[:, None]).ravel())
    for coeff, pvec, K in blk.tterms:
        mat += (coeff * float(pvec @ y)) * K
    return mat


def gather_block(comp: Compiled, blk: CompiledBlock, Amat: np.ndarray) -> np.ndarray:
    """Adjoint: vector of <F_i, A> over all coordinates for one block."""
    out = kernels.gather_inner(Amat, blk.rows, blk.cols, blk.vals, blk.cnts)
    for coeff, pvec, K in blk.tterms:
        out = out + (coeff * float(np.real(np.trace(K @ Amat)))) * pvec
    return out


def block_matrix(comp: Compiled, blk: CompiledBlock, xs: dict) -> np.ndarray:
    """Basis-free evaluation of const + terms at explicit variable matrices."""
    mat = blk.const.copy()
    for t in blk.sem_terms:
        X = np.asarray(xs[t.var], dtype=np.complex128)
        if isinstance(t, LinTerm):
            img = X if t.pt_dims is None else ptranspose_arr(X, *t.pt_dims)
            mat = mat + t.coeff * img
        else:
            mat = mat + t.coeff * float(np.real(np.trace(t.probe @ X))) * t.gain
    return hermitize(mat)


def assignments_from(comp: Compiled, y: np.ndarray) -> dict:
    out = {}
    for name in comp.var_names:
        br, bc, bv, _ = comp.bases[name]
        out[name] = _unhvec(y[comp.var_slices[name]], br, bc, bv, comp.var_dims[name])
    return out


# ---------------------------------------------------------------------------
# numerics


def _eigh(mat):
    try:
        return np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc


def _pos_clip(w):
    hi = float(w[-1])
    if hi <= 0.0:
        raise NumericError("iterate lost positive definiteness")
    return np.maximum(w, hi * 1e-14)


def _nt_scaling(S, Z):
    """V with V S V = Z, plus S^{-1}."""
    dz, Uz = _eigh(Z)
    dz = _pos_clip(dz)
    Zh = (Uz * np.sqrt(dz)) @ Uz.conj().T
    dt, Ut = _eigh(hermitize(Zh @ S @ Zh))
    dt = _pos_clip(dt)
    Tmh = (Ut / np.sqrt(dt)) @ Ut.conj().T
    V = hermitize(Zh @ Tmh @ Zh)
    ds, Us = _eigh(S)
    ds = _pos_clip(ds)
    Sinv = hermitize((Us / ds) @ Us.conj().T)
    return V, Sinv


def _second_order_term(V, S, dS, dZ):
    """Mehrotra correction, solved in the scaled space: the Lyapunov equation
    (U Vsc + Vsc U)/2 = sym(DS DZ) with Vsc = V^{1/2} S V^{1/2}."""
    dv, Uv = _eigh(V)
    dv = _pos_clip(dv)
    Vh = (Uv * np.sqrt(dv)) @ Uv.conj().T
    Vmh = (Uv / np.sqrt(dv)) @ Uv.conj().T
    DS = Vh @ dS @ Vh
    DZ = Vmh @ dZ @ Vmh
    Nmat = hermitize(DS @ DZ + DZ @ DS) * 0.5
    d, U = _eigh(hermitize(Vh @ S @ Vh))
    d = _pos_clip(d)
    Ntil = U.conj().T @ Nmat @ U
    Util = 2.0 * Ntil / (d[:, None] + d[None, :])
    return hermitize(Vh @ (U @ Util @ U.conj().T) @ Vh)


def _gondzio_target(V, S, Z, dS, dZ, ap, ad, smu, beta_min=0.1, beta_max=10.0):
    """Product-space correction herding the tentative complementarity
    eigenvalues into [beta_min smu, beta_max smu], pulled back to the
    right-hand-side space through the same Lyapunov solve as the Mehrotra
    term.  Returns the extra target and the largest outlier magnitude."""
    dv, Uv = _eigh(V)
    dv = _pos_clip(dv)
    Vh = (Uv * np.sqrt(dv)) @ Uv.conj().T
    Vmh = (Uv / np.sqrt(dv)) @ Uv.conj().T
    DS = Vh @ (S + ap * dS) @ Vh
    DZ = Vmh @ (Z + ad * dZ) @ Vmh
    P = hermitize(DS @ DZ + DZ @ DS) * 0.5
    pe, Pu = _eigh(P)
    lo, hi = beta_min * smu, beta_max * smu
    t = np.where(pe < lo, lo - pe, np.where(pe > hi, hi - pe, 0.0))
    if not np.any(t):
        return np.zeros_like(P), 0.0
    Tm = (Pu * t) @ Pu.conj().T
    d, U = _eigh(hermitize(Vh @ S @ Vh))
    d = _pos_clip(d)
    Ttil = U.conj().T @ Tm @ U
    Util = 2.0 * Ttil / (d[:, None] + d[None, :])
    return hermitize(Vh @ (U @ Util @ U.conj().T) @ Vh), float(np.max(np.abs(t)))


def _max_step(X, dX):
    """Largest t with X + t dX >= 0, for X > 0; inf when dX >= 0."""
    n = X.shape[0]
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        L = np.linalg.cholesky(X + (1e-14 * max(1.0, float(np.trace(X).real))) * np.eye(n))
    B = sla.solve_triangular(L, dX, lower=True)
    H = sla.solve_triangular(L, B.conj().T, lower=True).conj().T
    lmin = float(np.linalg.eigvalsh(hermitize(H))[0])
    if lmin >= -1e-16:
        return np.inf
    return 1.0 / (-lmin)


def _assemble_M(comp: Compiled, Vs):
    m = comp.m
    nb = len(comp.blocks)
    M = np.zeros((m, m))
    vstack = np.zeros((nb, comp.nmax, comp.nmax), dtype=np.complex128)
    for j, blk in enumerate(comp.blocks):
        vstack[j, : blk.n, : blk.n] = Vs[j]
    kernels.schur_accumulate(M, vstack, comp.rows_st, comp.cols_st, comp.vals_st, comp.cnts_st)
    for j, blk in enumerate(comp.blocks):
        if not blk.tterms:
            continue
        V = Vs[j]
        for coeff, pvec, K in blk.tterms:
            VKV = V @ K @ V
            w = kernels.gather_inner(VKV, blk.rows, blk.cols, blk.vals, blk.cnts)
            M += coeff * (np.outer(pvec, w) + np.outer(w, pvec))
        for cr, pr, Kr in blk.tterms:
            for cs, ps, Ks in blk.tterms:
                t = float(np.real(np.trace(Kr @ V @ Ks @ V)))
                M += (cr * cs * t) * np.outer(pr, ps)
    return M


def _factor_kkt(M, A):
    """Factor the KKT system; the returned solver applies iterative
    refinement, which matters once mu pushes M's conditioning toward the
    float64 cliff near convergence.  Near the optimum M's diagonal spans
    many orders of magnitude, so the system is symmetrically equilibrated
    first: without that, kappa can pass 1/eps and refinement stops
    converging.  With equalities the augmented saddle system is LU-factored
    directly: far cheaper than a Schur complement when the row count is a
    sizable fraction of m."""
    m = M.shape[0]
    p = A.shape[0]
    dscale = max(float(np.max(np.diag(M))), 1e-300)
    for jit in (0.0, 1e-14, 1e-12, 1e-10, 1e-8):
        if p == 0:
            Mj = M + (jit * dscale) * np.eye(m)
            d = np.sqrt(np.maximum(np.abs(Mj).max(axis=1), 1e-300))
            try:
                ch = sla.cho_factor(
                    Mj / d[:, None] / d[None, :], lower=True, check_finite=False
                )
            except (np.linalg.LinAlgError, ValueError):
                continue

            def base(g, re_, ch=ch, d=d):
                return sla.cho_solve(ch, g / d, check_finite=False) / d, np.zeros(0)

        else:
            K = np.zeros((m + p, m + p))
            K[:m, :m] = M + (jit * dscale) * np.eye(m)
            K[:m, m:] = A.T
            K[m:, :m] = A
            K[m:, m:] = -(jit * dscale) * np.eye(p)
            d = np.sqrt(np.maximum(np.abs(K).max(axis=1), 1e-300))
            try:
                lu = sla.lu_factor(K / d[:, None] / d[None, :], check_finite=False)
            except (np.linalg.LinAlgError, ValueError):
                continue

            def base(g, re_, lu=lu, d=d):
                rhs = np.concatenate([g, re_]) / d
                sol = sla.lu_solve(lu, rhs, check_finite=False) / d
                return sol[:m], sol[m:]

        def solve(g, re_, base=base):
            dy, dl = base(g, re_)
            if not (np.all(np.isfinite(dy)) and np.all(np.isfinite(dl))):
                raise NumericError("KKT solve produced non-finite step")
            gscale = max(float(np.max(np.abs(g))) if m else 0.0, 1e-300)
            prev = np.inf
            for _ in range(4):
                r1 = g - M @ dy
                if p:
                    r1 -= A.T @ dl
                    r2 = re_ - A @ dy
                else:
                    r2 = re_
                rnorm = float(np.max(np.abs(r1))) if m else 0.0
                if p:
                    rnorm = max(rnorm, float(np.max(np.abs(r2))))
                if rnorm <= 1e-15 * gscale or rnorm >= prev:
                    break
                prev = rnorm
                e1, e2 = base(r1, r2)
                if not (np.all(np.isfinite(e1)) and np.all(np.isfinite(e2))):
                    break
                dy = dy + e1
                dl = dl + e2
            return dy, dl

        return solve
    return None


# ---------------------------------------------------------------------------
# the solver loop


def run(comp: Compiled, cfg, callback=None) -> dict:
    m = comp.m
    blocks = comp.blocks
    nb = len(blocks)
    Ntot = sum(blk.n for blk in blocks)

    # Internally only the equality rows with a nonzero gradient take part;
    # their multipliers are scattered back to the full row list on exit.
    keep = comp.eq_keep if comp.eq_keep is not None else np.arange(comp.b.size)
    A = comp.A[keep] if comp.b.size else comp.A
    b = comp.b[keep] if comp.b.size else comp.b
    p = b.size

    def user_vals(pobj_lin, dobj_lin):
        return (
            comp.sense_mult * pobj_lin + comp.constant,
            comp.sense_mult * dobj_lin + comp.constant,
        )

    def result(status, snap):
        pv, dv = user_vals(snap["pobj"], snap["dobj"])
        lam_full = np.zeros(comp.b.size)
        if p:
            lam_full[keep] = snap["lam"]
        return {
            "status": status,
            "primal_value": pv,
            "dual_value": dv,
            "assignments": assignments_from(comp, snap["y"]),
            "iterations": snap["it"],
            "dual_blocks": [hermitize(Zj) for Zj in snap["Z"]],
            "eq_duals": lam_full,
        }

    y = np.zeros(m)
    lam = np.zeros(p)
    S = [max(1.0, blk.dnorm) * np.eye(blk.n, dtype=np.complex128) for blk in blocks]
    zscale = max(1.0, float(np.max(np.abs(comp.c))) if m else 1.0)
    Z = [zscale * np.eye(blk.n, dtype=np.complex128) for blk in blocks]

    snap0 = {"y": y, "lam": lam, "Z": Z, "pobj": float("nan"), "dobj": float("nan"), "it": 0}
    if comp.static_infeasible:
        return result("infeasible", snap0)
    if nb == 0:
        # No cone at all: the problem is a pure linear program over equalities;
        # out of scope for the measures here, treat as numeric failure.
        return result("numeric-failure", snap0)

    znorm0 = sum(float(np.trace(Zj).real) for Zj in Z) + 1.0
    cinf = 1.0 + float(np.max(np.abs(comp.c))) if m else 1.0
    binf = 1.0 + (float(np.max(np.abs(b))) if p else 0.0)
    mu0 = None

    best = None
    best_score = np.inf
    best_it = 0
    status = "numeric-failure"
    it_done = 0
    last_step = {"alpha_p": float("nan"), "alpha_d": float("nan"), "sigma": float("nan")}

    for it in range(1, cfg.max_iterations + 1):
        it_done = it
        Rp = [hermitize(blk.const + apply_block(blk, y)) - S[j] for j, blk in enumerate(blocks)]
        adjZ = np.zeros(m)
        for j, blk in enumerate(blocks):
            adjZ += gather_block(comp, blk, Z[j])
        rd = -comp.c - adjZ + (A.T @ lam if p else 0.0)
        re_ = b - A @ y if p else np.zeros(0)

        mu = sum(float(np.real(np.vdot(Z[j], S[j]))) for j in range(nb)) / Ntot
        if mu0 is None:
            mu0 = mu
        pobj_lin = float(comp.c @ y)
        dobj_lin = sum(float(np.real(np.vdot(Z[j], blocks[j].const))) for j in range(nb))
        if p:
            dobj_lin += float(lam @ b)

        pinf = max(
            float(np.linalg.norm(Rp[j], "fro")) / (1.0 + blocks[j].dnorm) for j in range(nb)
        )
        einf = float(np.max(np.abs(re_))) / binf if p else 0.0
        dinf = float(np.max(np.abs(rd))) / cinf if m else 0.0
        pu, du = user_vals(pobj_lin, dobj_lin)
        relgap = abs(pobj_lin - dobj_lin) / max(1.0, abs(pu), abs(du))

        slack = abs(float(rd @ y)) + abs(float(lam @ re_)) if p else abs(float(rd @ y))
        for j in range(nb):
            slack += abs(float(np.real(np.vdot(Z[j], Rp[j]))))

        if not (np.isfinite(mu) and np.isfinite(pobj_lin) and np.isfinite(dobj_lin)):
            break

        # Residuals at float-noise level carry no signal, but V Rp V amplifies
        # them by ~1/mu in the step equations; treat the iterate as exactly
        # feasible there once the honest residual is below the noise floor.
        for j in range(nb):
            if float(np.linalg.norm(Rp[j], "fro")) <= 1e-13 * (1.0 + blocks[j].dnorm):
                Rp[j] = np.zeros_like(Rp[j])
        if p and float(np.max(np.abs(re_))) <= 1e-13 * binf:
            re_ = np.zeros(p)

        snap = {
            "y": y.copy(),
            "lam": lam.copy(),
            "Z": [Zj.copy() for Zj in Z],
            "pobj": pobj_lin,
            "dobj": dobj_lin,
            "it": it,
        }
        if callback is not None:
            callback(
                {
                    "iteration": it,
                    "mu": mu,
                    "primal_value": pu,
                    "dual_value": du,
                    "pobj_lin": pobj_lin,
                    "dobj_lin": dobj_lin,
                    "relgap": relgap,
                    "pinf": pinf,
                    "dinf": dinf,
                    "einf": einf,
                    "residual_slack": slack,
                    **last_step,
                }
            )

        score = max(relgap, pinf, dinf, einf)
        if score < best_score:
            best_score = score
            best = snap
            best_it = it

        # The primal assignments and the gap carry the reported guarantees, so
        # they are held to feas_tol/gap_tol exactly. The dual residual is an
        # internal optimality diagnostic; on degenerate instances it bottoms
        # out near sqrt(eps) regardless of step count, so it gets a floor of
        # 10x the gap tolerance rather than feas_tol.
        dual_stop = max(cfg.feas_tol, 10.0 * cfg.gap_tol)
        if pinf <= cfg.feas_tol and dinf <= dual_stop and einf <= cfg.feas_tol and relgap <= cfg.gap_tol:
            best = snap
            status = "optimal"
            break
        if it - best_it >= 30:
            # no progress on any residual for a long stretch: the iterates are
            # orbiting a noise floor, burning more steps will not help
            break

        znorm = sum(float(np.trace(Zj).real) for Zj in Z) + (float(np.sum(np.abs(lam))) if p else 0.0)
        if znorm > 1e7 * znorm0:
            ray_res = float(np.max(np.abs(adjZ - (A.T @ lam if p else 0.0)))) / znorm
            if ray_res <= 1e-8 and dobj_lin / znorm < -1e-8:
                status = "infeasible"
                break
        if float(np.max(np.abs(y))) > 1e7 and pinf <= 1e-6 and pobj_lin > 1e7 * max(1.0, abs(comp.constant)):
            status = "unbounded"
            break
        if mu < 1e-14 * max(1.0, mu0):
            break

        try:
            Vs, Sinvs = [], []
            for j in range(nb):
                V, Sinv = _nt_scaling(S[j], Z[j])
                Vs.append(V)
                Sinvs.append(Sinv)
            M = _assemble_M(comp, Vs)
            kkt = _factor_kkt(M, A)
            if kkt is None:
                break

            # predictor: pure Newton step toward feasibility and zero product
            Ga = [hermitize(-Z[j] - Vs[j] @ Rp[j] @ Vs[j]) for j in range(nb)]
            g = -rd.copy()
            for j, blk in enumerate(blocks):
                g += gather_block(comp, blk, Ga[j])
            dy_a, dl_a = kkt(g, re_)
            dS_a = [hermitize(Rp[j] + apply_block(blocks[j], dy_a)) for j in range(nb)]
            # Ga already folds in -V Rp V, so only the linear part of dS may be
            # scaled back out; using dS itself would double-count Rp and leak
            # sum_j F*(V Rp V) into the dual residual every step
            dZ_a = [
                hermitize(Ga[j] - Vs[j] @ (dS_a[j] - Rp[j]) @ Vs[j]) for j in range(nb)
            ]

            ap_a = min(1.0, min((_max_step(S[j], dS_a[j]) for j in range(nb)), default=np.inf))
            ad_a = min(1.0, min((_max_step(Z[j], dZ_a[j]) for j in range(nb)), default=np.inf))
            mu_aff = (
                sum(
                    float(np.real(np.vdot(Z[j] + ad_a * dZ_a[j], S[j] + ap_a * dS_a[j])))
                    for j in range(nb)
                )
                / Ntot
            )
            mu_aff = max(mu_aff, 0.0)
            sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.1
            # keep centrality from outrunning feasibility: residuals shrink by
            # (1 - alpha) per step regardless of sigma, so floor sigma once the
            # remaining infeasibility dominates the (normalized) barrier scale.
            # A dual residual already below its stopping target is done and
            # must not keep forcing sigma up while the gap still has to close.
            maxres = max(pinf, einf, dinf if dinf > dual_stop else 0.0)
            mu_n = mu / max(1.0, mu0)
            sigma = max(sigma, min(0.5, (maxres / (maxres + mu_n)) ** 2))
            # and never aim below the barrier level the gap tolerance needs:
            # overshooting just wrecks the Newton system's conditioning
            mu_needed = 0.3 * cfg.gap_tol * max(1.0, abs(pu), abs(du)) / Ntot
            if mu > 0:
                sigma = min(0.99, max(sigma, mu_needed / mu))

            # corrector: recenter and absorb the second-order product term
            Gc = []
            for j in range(nb):
                Gam = _second_order_term(Vs[j], S[j], dS_a[j], dZ_a[j])
                Gc.append(hermitize(sigma * mu * Sinvs[j] - Z[j] - Vs[j] @ Rp[j] @ Vs[j] - Gam))
            g = -rd.copy()
            for j, blk in enumerate(blocks):
                g += gather_block(comp, blk, Gc[j])
            dy, dl = kkt(g, re_)
            dS = [hermitize(Rp[j] + apply_block(blocks[j], dy)) for j in range(nb)]
            dZ = [
                hermitize(Gc[j] - Vs[j] @ (dS[j] - Rp[j]) @ Vs[j]) for j in range(nb)
            ]

            tau = 0.98 if (relgap < 1e-3 and pinf < 1e-6 and dinf < 1e-6) else 0.95
            ap = min(1.0, tau * min((_max_step(S[j], dS[j]) for j in range(nb)), default=np.inf))
            ad = min(1.0, tau * min((_max_step(Z[j], dZ[j]) for j in range(nb)), default=np.inf))

            # extra centrality correctors: when the step is short, herd the
            # outlier complementarity products back toward sigma*mu and
            # re-solve on the same factorization; degenerate endgames often
            # recover a full step this way when a single corrector stalls.
            # dZ is reconstructed rather than solved for, so each candidate
            # is also vetted on the dual Newton equation: the next dual
            # residual is (1 - ad) rd - ad q, and a direction that wins its
            # longer step by inflating q would poison every later iterate
            def _dir_dual_err(dZ_, dl_):
                acc = -rd.copy()
                for j, blk in enumerate(blocks):
                    acc += gather_block(comp, blk, dZ_[j])
                if p:
                    acc -= A.T @ dl_
                return float(np.max(np.abs(acc))) if m else 0.0

            qbase = None
            for _ in range(3):
                if min(ap, ad) >= 0.85:
                    break
                smu = sigma * mu
                extra = []
                worst = 0.0
                for j in range(nb):
                    Tj, out = _gondzio_target(
                        Vs[j], S[j], Z[j], dS[j], dZ[j],
                        min(1.0, ap + 0.3), min(1.0, ad + 0.3), smu,
                    )
                    extra.append(Tj)
                    worst = max(worst, out)
                if worst <= 1e-16 * max(smu, 1e-300):
                    break
                if qbase is None:
                    qbase = _dir_dual_err(dZ, dl)
                Gg = [hermitize(Gc[j] + extra[j]) for j in range(nb)]
                g2 = -rd.copy()
                for j, blk in enumerate(blocks):
                    g2 += gather_block(comp, blk, Gg[j])
                dy2, dl2 = kkt(g2, re_)
                dS2 = [hermitize(Rp[j] + apply_block(blocks[j], dy2)) for j in range(nb)]
                dZ2 = [
                    hermitize(Gg[j] - Vs[j] @ (dS2[j] - Rp[j]) @ Vs[j]) for j in range(nb)
                ]
                ap2 = min(1.0, tau * min((_max_step(S[j], dS2[j]) for j in range(nb)), default=np.inf))
                ad2 = min(1.0, tau * min((_max_step(Z[j], dZ2[j]) for j in range(nb)), default=np.inf))
                if min(ap2, ad2) < min(ap, ad) + 0.02:
                    break
                if _dir_dual_err(dZ2, dl2) > max(3.0 * qbase, 0.1 * dual_stop * cinf):
                    break
                dy, dl, dS, dZ, ap, ad, Gc = dy2, dl2, dS2, dZ2, ap2, ad2, Gg

            if min(ap, ad) < 1e-2 and sigma < 0.9:
                # stalled: retry the same factorization with a pure centering step
                for j in range(nb):
                    Gc[j] = hermitize(0.9 * mu * Sinvs[j] - Z[j] - Vs[j] @ Rp[j] @ Vs[j])
                g = -rd.copy()
                for j, blk in enumerate(blocks):
                    g += gather_block(comp, blk, Gc[j])
                dy, dl = kkt(g, re_)
                dS = [hermitize(Rp[j] + apply_block(blocks[j], dy)) for j in range(nb)]
                dZ = [
                    hermitize(Gc[j] - Vs[j] @ (dS[j] - Rp[j]) @ Vs[j]) for j in range(nb)
                ]
                ap = min(1.0, 0.95 * min((_max_step(S[j], dS[j]) for j in range(nb)), default=np.inf))
                ad = min(1.0, 0.95 * min((_max_step(Z[j], dZ[j]) for j in range(nb)), default=np.inf))
        except NumericError:
            break

        y = y + ap * dy
        lam = lam + ad * dl if p else lam
        S = [hermitize(S[j] + ap * dS[j]) for j in range(nb)]
        Z = [hermitize(Z[j] + ad * dZ[j]) for j in range(nb)]
        last_step = {"alpha_p": ap, "alpha_d": ad, "sigma": sigma}

    if best is None:
        best = snap0
        best["it"] = it_done
    return result(status, best)
