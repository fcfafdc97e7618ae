"""Dense Hermitian trace-form SDP solver and randomized phase rounding.

Solves small problems of the form

    max/min  Tr(C X) + c.u
    s.t.     Tr(A_i X) + a_i.u  {<=,==,>=}  b_i,   X >= 0 (PSD),  u >= 0,

where X is a Hermitian matrix variable and u an optional vector of
nonnegative scalars (used for epigraph/margin variables). Complex Hermitian
data is realified into a symmetric real program of doubled dimension before
the interior-point core, so a single real PSD cone implementation suffices.
The core is a primal-dual path-following method with the XZ (HKM) scaling
direction, Mehrotra predictor-corrector, and fraction-to-boundary steps.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class SdpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITERATIONS = "MaxIterations"


class SdpSolverError(RuntimeError):
    """Hard solver failure (bad problem data or numerical breakdown)."""


@dataclass
class SolverConfig:
    tolerance: float = 1e-8
    max_iterations: int = 200
    step_fraction: float = 0.99

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if not (0.0 < self.step_fraction < 1.0):
            raise ValueError("step_fraction must lie in (0, 1)")


@dataclass
class SdpProblem:
    """Max-trace program over one Hermitian PSD block.

    constraints: list of (matrix, relation, bound) or
    (matrix, relation, bound, scalar_coeffs) tuples with relation one of
    "<=", "==", ">=". scalar_coeffs (length n_scalars) couples the optional
    nonnegative scalar variables into the row.
    """

    dim: int
    objective: np.ndarray
    constraints: list
    maximize: bool = True
    n_scalars: int = 0
    scalar_objective: np.ndarray | None = None


@dataclass
class SdpSolution:
    matrix: np.ndarray
    objective_value: float
    status: SdpStatus
    duality_gap: float
    residuals: float
    iterations: int
    scalars: np.ndarray = field(default_factory=lambda: np.zeros(0))
    dual: np.ndarray = field(default_factory=lambda: np.zeros(0))


_RELATIONS = ("<=", "==", ">=")


def _check_hermitian(mat: np.ndarray, dim: int, what: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (dim, dim):
        raise ValueError(f"{what} must be {dim}x{dim}, got {mat.shape}")
    scale = max(1.0, float(np.abs(mat).max()))
    if np.abs(mat - mat.conj().T).max() > 1e-12 * scale:
        raise ValueError(f"{what} is not Hermitian")
    return 0.5 * (mat + mat.conj().T)


def _realify(mat: np.ndarray) -> np.ndarray:
    """Map Hermitian M to the symmetric real block form 0.5*[[Re,-Im],[Im,Re]],
    chosen so that <realify(M), realify(X)> = Tr(M X) for Hermitian M, X."""
    re, im = mat.real, mat.imag
    return 0.5 * np.block([[re, -im], [im, re]])


def _derealify(mat_r: np.ndarray, n: int) -> np.ndarray:
    """Average a real symmetric iterate back to a Hermitian matrix."""
    p, q = mat_r[:n, :n], mat_r[:n, n:]
    r, s = mat_r[n:, :n], mat_r[n:, n:]
    out = 0.5 * (p + s) + 0.5j * (r - q)
    return 0.5 * (out + out.conj().T)


def _sym_inv(mat: np.ndarray) -> np.ndarray:
    try:
        low = np.linalg.cholesky(mat)
        eye = np.eye(mat.shape[0])
        return np.linalg.solve(low.T, np.linalg.solve(low, eye))
    except np.linalg.LinAlgError:
        lam, vec = np.linalg.eigh(mat)
        lam = np.clip(lam, 1e-300, None)
        return (vec / lam) @ vec.T


def _chol_solver(mat: np.ndarray):
    scale = max(float(np.abs(mat).max()), 1e-300)
    for jitter in (0.0, 1e-14, 1e-12, 1e-10, 1e-8, 1e-6):
        try:
            low = np.linalg.cholesky(mat + jitter * scale * np.eye(mat.shape[0]))
            return lambda r: np.linalg.solve(low.T, np.linalg.solve(low, r))
        except np.linalg.LinAlgError:
            continue
    return lambda r: np.linalg.lstsq(mat, r, rcond=None)[0]


def _max_step_psd(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest t with x + t*dx PSD (x assumed PD)."""
    try:
        low = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        lam, vec = np.linalg.eigh(x)
        lam = np.clip(lam, 1e-300, None)
        low = vec * np.sqrt(lam)
    w = np.linalg.solve(low, dx)
    w = np.linalg.solve(low, w.T).T
    lam_min = float(np.linalg.eigvalsh(0.5 * (w + w.T)).min())
    if lam_min >= -1e-13:
        return np.inf
    return -1.0 / lam_min


def _max_step(xs, dxs, xd, dxd) -> float:
    t = _max_step_psd(xs, dxs)
    if xd.size:
        neg = dxd < 0
        if neg.any():
            t = min(t, float((-xd[neg] / dxd[neg]).min()))
    return t


def _ipm(mats, vecs, b, c_mat, c_vec, cfg: SolverConfig):
    """Infeasible-start HKM predictor-corrector on real symmetric data.

    Primal: max <C,X> + c.u s.t. <A_i,X> + a_i.u = b_i, X PSD, u >= 0.
    Returns a dict with the final iterate and convergence diagnostics.
    Divergence (possible on problems without a strict interior) ends the loop
    gracefully with MAX_ITERATIONS and non-finite diagnostics.
    """
    m, ns = mats.shape[0], mats.shape[1]
    nd = vecs.shape[1]
    nu = ns + nd
    eye = np.eye(ns)
    tol = cfg.tolerance

    a_norms = np.sqrt((mats ** 2).sum(axis=(1, 2)) + (vecs ** 2).sum(axis=1))
    norm_b = float(np.linalg.norm(b))
    norm_c = math.sqrt(float((c_mat ** 2).sum() + (c_vec ** 2).sum()))

    xi = max(10.0, math.sqrt(ns),
             float((ns * (1.0 + np.abs(b)) / (1.0 + a_norms)).max()))
    eta = max(10.0, math.sqrt(ns), float(a_norms.max()), norm_c)
    xs = xi * eye.copy()
    xd = xi * np.ones(nd)
    ss = eta * eye.copy()
    sd = eta * np.ones(nd)
    y = np.zeros(m)

    status = SdpStatus.MAX_ITERATIONS
    relgap = np.inf
    resid = np.inf
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        if not (np.isfinite(xs).all() and np.isfinite(ss).all()
                and np.isfinite(y).all() and np.isfinite(xd).all()
                and np.isfinite(sd).all()):
            relgap = resid = np.inf
            break
        ax = np.einsum("iab,ab->i", mats, xs) + vecs @ xd
        rp = b - ax
        ys_mat = np.tensordot(y, mats, axes=1)
        ys_vec = vecs.T @ y
        rd_mat = ys_mat - ss - c_mat
        rd_vec = ys_vec - sd - c_vec

        gap = float((xs * ss).sum() + xd @ sd)
        pobj = float((c_mat * xs).sum() + c_vec @ xd)
        dobj = float(b @ y)
        relgap = gap / (1.0 + abs(pobj) + abs(dobj))
        pres = float(np.linalg.norm(rp)) / (1.0 + norm_b)
        dres = math.sqrt(float((rd_mat ** 2).sum() + (rd_vec ** 2).sum())) / (1.0 + norm_c)
        resid = max(pres, dres)
        if resid <= tol and relgap <= tol:
            status = SdpStatus.OPTIMAL
            break
        if gap > 1e100 or abs(pobj) > 1e100:
            break

        ny = float(np.linalg.norm(y))
        if ny > 1e-12 and dobj / ny < -1e-6:
            # Farkas test: A*(y) >= 0 with b.y < 0 certifies primal infeasibility.
            lam = float(np.linalg.eigvalsh(ys_mat).min()) / ny
            if nd:
                lam = min(lam, float(ys_vec.min()) / ny)
            if lam >= -1e-9:
                status = SdpStatus.INFEASIBLE
                break
        if pobj > 1e12 * max(1.0, norm_b, norm_c) and pres <= max(tol, 1e-6):
            status = SdpStatus.UNBOUNDED
            break

        mu = gap / nu
        try:
            ss_inv = _sym_inv(ss)
        except np.linalg.LinAlgError:
            break
        sd_inv = 1.0 / sd
        t1 = np.einsum("jab,bc->jac", mats, ss_inv)
        bmat = np.einsum("ab,jbc->jac", xs, t1)
        big_m = np.einsum("iab,jba->ij", mats, bmat)
        if nd:
            big_m += (vecs * (xd * sd_inv)) @ vecs.T
        big_m = 0.5 * (big_m + big_m.T)
        solve_m = _chol_solver(big_m)
        x_rd = xs @ rd_mat

        def direction(taumu, h_mat, h_vec):
            g_mat = (taumu * eye - h_mat - x_rd) @ ss_inv
            g_vec = (taumu - h_vec - xd * rd_vec) * sd_inv
            rhs = np.einsum("iab,ba->i", mats, g_mat) - b
            if nd:
                rhs = rhs + vecs @ g_vec
            dy = solve_m(rhs)
            ds_mat = np.tensordot(dy, mats, axes=1) + rd_mat
            ds_vec = vecs.T @ dy + rd_vec
            dx_raw = taumu * ss_inv - xs - (h_mat + xs @ ds_mat) @ ss_inv
            dx_mat = 0.5 * (dx_raw + dx_raw.T)
            dx_vec = (taumu - h_vec - xd * ds_vec) * sd_inv - xd
            return dx_mat, dx_vec, dy, ds_mat, ds_vec

        zadj = np.zeros(nd)
        try:
            dxa, dxda, dya, dsa, dsda = direction(0.0, np.zeros((ns, ns)), zadj)
            ap_a = min(1.0, _max_step(xs, dxa, xd, dxda))
            ad_a = min(1.0, _max_step(ss, dsa, sd, dsda))
            mu_aff = (float(((xs + ap_a * dxa) * (ss + ad_a * dsa)).sum())
                      + float((xd + ap_a * dxda) @ (sd + ad_a * dsda))) / nu
            sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))

            dx, dxd_, dy, ds, dsd_ = direction(sigma * mu, dxa @ dsa, dxda * dsda)
            ap = min(1.0, cfg.step_fraction * _max_step(xs, dx, xd, dxd_))
            ad = min(1.0, cfg.step_fraction * _max_step(ss, ds, sd, dsd_))
        except (np.linalg.LinAlgError, FloatingPointError):
            break
        if not (np.isfinite(dx).all() and np.isfinite(ds).all()
                and np.isfinite(dy).all()):
            break
        if ap < 1e-10 and ad < 1e-10:
            break
        xs = 0.5 * ((xs + ap * dx) + (xs + ap * dx).T)
        xd = xd + ap * dxd_
        y = y + ad * dy
        ss = 0.5 * ((ss + ad * ds) + (ss + ad * ds).T)
        sd = sd + ad * dsd_

    pobj = float((c_mat * xs).sum() + c_vec @ xd)
    return {
        "xs": xs, "xd": xd, "y": y, "ss": ss, "sd": sd,
        "status": status, "iterations": it,
        "relgap": relgap, "resid": resid, "pobj": pobj,
    }


def solve(problem: SdpProblem, config: SolverConfig | None = None) -> SdpSolution:
    """Solve a trace-form Hermitian SDP.

    On OPTIMAL the reported duality gap and residuals are below the configured
    tolerance. MAX_ITERATIONS is reported as such, never as OPTIMAL.
    """
    cfg = config or SolverConfig()
    n = problem.dim
    p = problem.n_scalars
    sign = 1.0 if problem.maximize else -1.0

    c_complex = _check_hermitian(problem.objective, n, "objective")
    c_scal = np.zeros(p)
    if problem.scalar_objective is not None:
        c_scal = np.asarray(problem.scalar_objective, dtype=float).reshape(p)

    rows = []
    for idx, con in enumerate(problem.constraints):
        if len(con) == 3:
            mat, rel, bound = con
            coeffs = np.zeros(p)
        else:
            mat, rel, bound, coeffs = con
            coeffs = np.asarray(coeffs, dtype=float).reshape(p)
        if rel not in _RELATIONS:
            raise ValueError(f"constraint {idx}: unknown relation {rel!r}")
        rows.append((_check_hermitian(mat, n, f"constraint {idx}"), rel, float(bound), coeffs))

    n_slack = sum(1 for _, rel, _, _ in rows if rel != "==")
    nd = p + n_slack
    ns = 2 * n
    m = len(rows)

    if m == 0:
        lam_max = float(np.linalg.eigvalsh(c_complex).max()) if n else 0.0
        unbounded = (sign * lam_max > cfg.tolerance) or bool((sign * c_scal > cfg.tolerance).any())
        status = SdpStatus.UNBOUNDED if unbounded else SdpStatus.OPTIMAL
        return SdpSolution(matrix=np.zeros((n, n), dtype=complex), objective_value=0.0,
                           status=status, duality_gap=0.0, residuals=0.0, iterations=0,
                           scalars=np.zeros(p))

    mats = np.empty((m, ns, ns))
    vecs = np.zeros((m, nd))
    b = np.empty(m)
    slack_at = p
    for i, (mat, rel, bound, coeffs) in enumerate(rows):
        mats[i] = _realify(mat)
        vecs[i, :p] = coeffs
        if rel == "<=":
            vecs[i, slack_at] = 1.0
            slack_at += 1
        elif rel == ">=":
            vecs[i, slack_at] = -1.0
            slack_at += 1
        b[i] = bound

    # Row equilibration plus objective normalization for conditioning.
    row_scale = np.maximum(np.sqrt((mats ** 2).sum(axis=(1, 2)) + (vecs ** 2).sum(axis=1)), 1e-300)
    mats /= row_scale[:, None, None]
    vecs /= row_scale[:, None]
    b = b / row_scale

    c_mat = sign * _realify(c_complex)
    c_vec = np.zeros(nd)
    c_vec[:p] = sign * c_scal
    c_scale = max(math.sqrt(float((c_mat ** 2).sum() + (c_vec ** 2).sum())), 1e-30)
    if c_scale < 1e-18:
        c_scale = 1.0
    c_mat = c_mat / c_scale
    c_vec = c_vec / c_scale

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        res = _ipm(mats, vecs, b, c_mat, c_vec, cfg)

    x_complex = _derealify(res["xs"], n)
    value = sign * res["pobj"] * c_scale
    y = res["y"] * c_scale / row_scale
    return SdpSolution(
        matrix=x_complex,
        objective_value=value,
        status=res["status"],
        duality_gap=res["relgap"],
        residuals=res["resid"],
        iterations=res["iterations"],
        scalars=res["xd"][:p].copy(),
        dual=sign * y,
    )


def _unit_phase(z: np.ndarray) -> np.ndarray:
    mag = np.abs(z)
    out = np.where(mag > 0, z / np.where(mag > 0, mag, 1.0), 1.0 + 0.0j)
    return out


def grp_round(z_matrix: np.ndarray, candidates: int, score, rng: np.random.Generator,
              rank_tol: float = 1e-7):
    """Gaussian randomization of a lifted covariance into a phase vector.

    Draws ``candidates`` vectors zt = U sqrt(Sigma) r with r ~ CN(0, I) from
    the eigendecomposition of z_matrix, maps each to a unit-modulus pattern
    via entrywise zt(i)/zt(N+1), and returns the candidate maximizing the
    caller's score. ``score`` receives a (batch, N) complex array and returns
    a (batch,) float array. If the input is rank one (second eigenvalue below
    rank_tol times the trace) the deterministic eigenvector extraction is
    used instead of randomization.
    """
    if candidates < 1:
        raise ValueError("need at least one candidate")
    z = np.asarray(z_matrix, dtype=complex)
    z = 0.5 * (z + z.conj().T)
    size = z.shape[0]
    n_phase = size - 1
    lam, u = np.linalg.eigh(z)
    lam = np.clip(lam, 0.0, None)
    trace = float(lam.sum())
    if trace <= 0:
        raise ValueError("input covariance has nonpositive trace")

    if size > 1 and float(lam[:-1].max()) <= rank_tol * trace:
        vec = u[:, -1] * math.sqrt(lam[-1])
        if abs(vec[-1]) > 1e-9 * math.sqrt(trace):
            v = _unit_phase(vec[:n_phase] / vec[n_phase])
            return v, float(np.asarray(score(v[None, :])).reshape(-1)[0])

    factor = u * np.sqrt(lam)
    best_v = None
    best_score = -np.inf
    remaining = candidates
    while remaining > 0:
        draw = (rng.standard_normal((size, remaining))
                + 1j * rng.standard_normal((size, remaining))) / math.sqrt(2.0)
        zt = factor @ draw
        denom = zt[n_phase, :]
        keep = np.abs(denom) > 1e-300
        if not keep.any():
            continue
        ratios = zt[:n_phase, keep] / denom[keep]
        batch = _unit_phase(ratios.T)
        scores = np.asarray(score(batch), dtype=float).reshape(-1)
        i = int(np.argmax(scores))
        if scores[i] > best_score or best_v is None:
            best_score = float(scores[i])
            best_v = batch[i].copy()
        remaining -= int(keep.sum())
    return best_v, best_score


def substream(seed: int, *key) -> np.random.Generator:
    """Deterministic child generator for (seed, key), independent of ordering."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))
