"""JSON/CSV exchange formats and batch scenarios.

Scenario files are JSON objects::

    {"kind": "chalkboard", "inputs": {...}, "grid": {"T": 1.0, "dt": 0.01},
     "seed": 0, "output": {"path": "traj.csv", "format": "csv"}}

``run_scenario`` validates the object, runs it, writes the output file and
returns a report dict containing results and residuals.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .capacity import (
    Ellipsoid,
    WilliamsonError,
    capacity,
    mvee,
    symplectic_eigenvalues,
    williamson,
)
from .chalkboard import SymplecticBall, chalkboard_motion, shadow_ball, StepUnderflow
from .config import DEFAULTS, TOL
from .factorization import (
    FactorizationError,
    LocalElement,
    NotFree,
    free_factorization,
    pre_iwasawa,
)
from .flows import (
    CayleyError,
    QuadraticHamiltonian,
    SymplecticIsotopy,
    affine_generator,
    flow_from_quadratic,
    iwasawa_sum,
    uniform_grid,
)
from .gaussian import (
    CrossCheckError,
    GaussianState,
    gaussian_transport,
    metaplectic_apply,
    wigner_gaussian,
    wigner_numeric_1d,
)
from .symplectic import (
    NotSymplectic,
    SymplecticMatrix,
    as_matrix,
    random_symplectic,
    symplectic_residual,
)

KINDS = (
    "capacity", "williamson", "factor", "flow", "generator", "iwasawa-sum",
    "chalkboard", "shadow", "gaussian", "mvee",
)


class SchemaError(ValueError):
    """Malformed scenario or input file."""


class NumericalFailure(RuntimeError):
    """A residual exceeded its tolerance."""


# ---------------------------------------------------------------------------
# Formats


def _arr(obj, name, ndim=None):
    try:
        a = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{name}: not numeric") from exc
    if ndim is not None and a.ndim != ndim:
        raise SchemaError(f"{name}: expected {ndim}-d array")
    if not np.all(np.isfinite(a)):
        raise SchemaError(f"{name}: non-finite entries")
    return a


def _need(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}: missing '{key}'")
    return obj[key]


def matrix_to_json(S, kind=None):
    a = as_matrix(S)
    out = {"n": a.shape[0] // 2, "rows": a.tolist()}
    if kind:
        out["kind"] = kind
    return out


def matrix_from_json(obj, seed=0):
    """Read ``{"n", "rows"[, "kind"]}``; ``{"random": {"n", "word_length"}}`` draws a seeded matrix."""
    if isinstance(obj, dict) and "random" in obj:
        rnd = obj["random"]
        return random_symplectic(int(_need(rnd, "n", "random")), seed=seed, word_length=int(rnd.get("word_length", 6)))
    rows = _arr(_need(obj, "rows", "matrix"), "rows", 2)
    n = obj.get("n")
    if n is not None and rows.shape != (2 * n, 2 * n):
        raise SchemaError("matrix: rows do not match n")
    if obj.get("kind") == "symplectic":
        return SymplecticMatrix(rows)
    return rows


def ellipsoid_to_json(E):
    return {"center": E.center.tolist(), "shape": E.shape.tolist(), "level": E.level}


def ellipsoid_from_json(obj):
    try:
        return Ellipsoid(
            _arr(_need(obj, "center", "ellipsoid"), "center", 1),
            _arr(_need(obj, "shape", "ellipsoid"), "shape", 2),
            float(obj.get("level", 1.0)),
        )
    except ValueError as exc:
        raise SchemaError(f"ellipsoid: {exc}") from exc


def state_to_json(s):
    return {
        "n": s.n, "X": s.X.tolist(), "Y": s.Y.tolist(), "center": s.center.tolist(),
        "hbar": s.hbar, "phase": [s.phase.real, s.phase.imag],
    }


def state_from_json(obj):
    X = _arr(_need(obj, "X", "state"), "X", 2)
    n = X.shape[0]
    Y = _arr(obj.get("Y", np.zeros((n, n)).tolist()), "Y", 2)
    center = _arr(obj.get("center", [0.0] * (2 * n)), "center", 1)
    ph = obj.get("phase", [1.0, 0.0])
    try:
        return GaussianState(X, Y, center, complex(ph[0], ph[1]), float(obj.get("hbar", DEFAULTS.hbar)))
    except ValueError as exc:
        raise SchemaError(f"state: {exc}") from exc


def _coef_fun(obj, dim, name, vector):
    if obj is None:
        return None
    kind = _need(obj, "kind", name)
    nd = 1 if vector else 2
    if kind == "constant":
        v = _arr(_need(obj, "value", name), name, nd)
        return ("poly", [v])
    if kind == "poly":
        cs = [_arr(c, name, nd) for c in _need(obj, "coeffs", name)]
        if not cs:
            raise SchemaError(f"{name}: empty coefficient list")
        return ("poly", cs)
    if kind == "samples":
        return ("samples", _arr(_need(obj, "times", name), "times", 1), _arr(_need(obj, "values", name), name, nd + 1))
    raise SchemaError(f"{name}: unknown kind '{kind}'")


def hamiltonian_from_json(obj):
    """``{"n", "M": {"kind": "constant"|"poly"|"samples", ...}, "m": {...}, "T", "dt"}``."""
    n = int(_need(obj, "n", "hamiltonian"))
    dim = 2 * n
    T = float(obj.get("T", DEFAULTS.T))
    M = _coef_fun(_need(obj, "M", "hamiltonian"), dim, "M", False)
    m = _coef_fun(obj.get("m"), dim, "m", True)
    if M[0] == "samples":
        ms = None if m is None else m[2]
        return QuadraticHamiltonian.from_samples(M[1], M[2], ms)
    if m is not None and m[0] == "samples":
        raise SchemaError("m: samples need M samples on the same grid")
    for c in M[1]:
        if c.shape != (dim, dim):
            raise SchemaError("M: wrong dimension")
    return QuadraticHamiltonian.polynomial(M[1], None if m is None else m[1], T)


def isotopy_from_json(obj, grid=None):
    """Sampled (``"samples"``), named (``"free-particle"``, ``"rotation"``) or ``"hamiltonian"`` isotopies."""
    kind = _need(obj, "kind", "isotopy")
    if kind == "samples":
        times = _arr(_need(obj, "times", "isotopy"), "times", 1)
        S = _arr(_need(obj, "S", "isotopy"), "S", 3)
        z = obj.get("z")
        try:
            return SymplecticIsotopy(times, S, None if z is None else _arr(z, "z", 2))
        except ValueError as exc:
            raise SchemaError(f"isotopy: {exc}") from exc
    times = uniform_grid(*grid)
    n = int(obj.get("n", 1))
    eye = np.eye(n)
    zero = np.zeros((n, n))
    if kind == "free-particle":
        return SymplecticIsotopy.from_function(lambda t: np.block([[eye, t * eye], [zero, eye]]), times)
    if kind == "rotation":
        w = float(obj.get("omega", 1.0))
        return SymplecticIsotopy.from_function(
            lambda t: np.block([[np.cos(w * t) * eye, np.sin(w * t) * eye], [-np.sin(w * t) * eye, np.cos(w * t) * eye]]),
            times,
        )
    if kind == "hamiltonian":
        H = hamiltonian_from_json(_need(obj, "hamiltonian", "isotopy"))
        return flow_from_quadratic(H, T=grid[0], dt=grid[1])
    raise SchemaError(f"isotopy: unknown kind '{kind}'")


def center_path_from_json(obj, times, dim):
    if obj is None:
        return None
    kind = _need(obj, "kind", "center_path")
    if kind == "linear":
        v = _arr(_need(obj, "velocity", "center_path"), "velocity", 1)
        start = _arr(obj.get("start", [0.0] * dim), "start", 1)
        if v.size != dim or start.size != dim:
            raise SchemaError("center_path: wrong dimension")
        return start + np.outer(times, v)
    if kind == "polyline":
        pts = _arr(_need(obj, "points", "center_path"), "points", 2)
        if pts.shape[1] != dim + 1:
            raise SchemaError("center_path: rows must be [t, z...]")
        return np.column_stack([np.interp(times, pts[:, 0], pts[:, j + 1]) for j in range(dim)])
    raise SchemaError(f"center_path: unknown kind '{kind}'")


def ball_from_json(obj, n, seed=0):
    eps = float(_need(obj, "eps", "ball"))
    z0 = _arr(obj.get("z0", [0.0] * (2 * n)), "z0", 1)
    if "S" in obj:
        S = matrix_from_json(obj["S"], seed)
    elif "P" in obj:
        S = LocalElement(_arr(obj["P"], "P", 2), _arr(obj["L"], "L", 2)).linear()
    else:
        S = np.eye(2 * n)
    try:
        return SymplecticBall(S, z0, eps)
    except ValueError as exc:
        raise SchemaError(f"ball: {exc}") from exc


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([format(float(v), ".17g") for v in r])


def write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        json.dump(_plain(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def read_points_csv(path):
    with open(path) as fh:
        rows = [r for r in csv.reader(fh) if r]
    try:
        return np.array([[float(v) for v in r] for r in rows])
    except ValueError:
        return np.array([[float(v) for v in r] for r in rows[1:]])


# ---------------------------------------------------------------------------
# Scenarios


@dataclass
class Scenario:
    kind: str
    inputs: dict
    T: float = DEFAULTS.T
    dt: float = DEFAULTS.dt
    seed: int = 0
    out_path: str = None
    out_format: str = "json"
    tol: float = None
    crosscheck: bool = False
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def from_json(cls, obj, base_dir=None):
        if not isinstance(obj, dict):
            raise SchemaError("scenario must be a JSON object")
        kind = _need(obj, "kind", "scenario")
        if kind not in KINDS:
            raise SchemaError(f"unknown scenario kind '{kind}'")
        inputs = obj.get("inputs", {})
        if not isinstance(inputs, dict):
            raise SchemaError("inputs must be an object")
        grid = obj.get("grid", {})
        if not isinstance(grid, dict):
            raise SchemaError("grid must be an object")
        T = float(grid.get("T", DEFAULTS.T))
        dt = float(grid.get("dt", DEFAULTS.dt))
        if not (T > 0 and dt > 0) or dt > T:
            raise SchemaError("grid needs 0 < dt <= T")
        seed = int(obj.get("seed", 0))
        if not 0 <= seed < 2**64:
            raise SchemaError("seed must be a 64-bit unsigned integer")
        out = obj.get("output", {})
        fmt = out.get("format", "json")
        if fmt not in ("csv", "json"):
            raise SchemaError("output format must be csv or json")
        return cls(kind, inputs, T, dt, seed, out.get("path"), fmt,
                   obj.get("tol"), bool(obj.get("debug_crosscheck", False)),
                   Path(base_dir) if base_dir else Path.cwd())

    @property
    def grid(self):
        return (self.T, self.dt)

    def resolve(self, path):
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def _check(residuals, tol):
    bad = {k: v for k, v in residuals.items() if v > tol}
    if bad:
        raise NumericalFailure(f"residuals above {tol:.1e}: {bad}")


def _flat(a):
    return list(np.asarray(a).ravel())


def _names(prefix, rows, cols=None):
    if cols is None:
        return [f"{prefix}{i}" for i in range(rows)]
    return [f"{prefix}{i}{j}" for i in range(rows) for j in range(cols)]


def _run_capacity(sc):
    E = ellipsoid_from_json(_need(sc.inputs, "ellipsoid", "inputs"))
    W = williamson(E.shape)
    S = as_matrix(W.S)
    res = {"williamson": float(np.abs(S.T @ E.shape @ S - W.diagonal()).max() / max(1.0, np.abs(E.shape).max()))}
    return {"capacity": capacity(E), "symplectic_eigenvalues": symplectic_eigenvalues(E.shape)}, res, None


def _run_williamson(sc):
    M = _arr(_need(sc.inputs, "matrix", "inputs")["rows"], "rows", 2)
    W = williamson(M)
    S = as_matrix(W.S)
    res = {
        "williamson": float(np.abs(S.T @ M @ S - W.diagonal()).max() / max(1.0, np.abs(M).max())),
        "symplectic": symplectic_residual(S),
    }
    return {"S": S, "lambdas": W.lambdas}, res, None


def _run_mvee(sc):
    if "points_csv" in sc.inputs:
        pts = read_points_csv(sc.resolve(sc.inputs["points_csv"]))
    else:
        pts = _arr(_need(sc.inputs, "points", "inputs"), "points", 2)
    tol = float(sc.inputs.get("tol", DEFAULTS.mvee_tol))
    E = mvee(pts, tol=tol)
    worst = float(E.quadratic_form(pts).max())
    return {"ellipsoid": ellipsoid_to_json(E)}, {"containment_excess": max(0.0, worst - 1.0)}, None


def _run_factor(sc):
    S = matrix_from_json(_need(sc.inputs, "matrix", "inputs"), sc.seed)
    mode = sc.inputs.get("mode", "pre-iwasawa")
    Sm = as_matrix(S)
    if mode == "pre-iwasawa":
        f = pre_iwasawa(S)
        X, Y = f.X, f.Y
        res = {
            "reconstruction": f.residual,
            "unitary_xx_yy": float(np.abs(X @ X.T + Y @ Y.T - np.eye(X.shape[0])).max()),
            "unitary_xy": float(np.abs(X @ Y.T - Y @ X.T).max()),
        }
        return {"P": f.P, "L": f.L, "X": X, "Y": Y}, res, None
    if mode == "free":
        f = free_factorization(S)
        return {"P1": f.P1, "L": f.L, "P2": f.P2}, {"reconstruction": f.residual}, None
    if mode == "sp0":
        n = Sm.shape[0] // 2
        A, B, C, D = Sm[:n, :n], Sm[:n, n:], Sm[n:, :n], Sm[n:, n:]
        if np.abs(B).max() > TOL.factor * max(1.0, np.abs(Sm).max()):
            raise SchemaError("matrix is not in the local group (B != 0)")
        e = LocalElement(C @ np.linalg.inv(A), D.T)
        res = {"reconstruction": float(np.abs(as_matrix(e.linear()) - Sm).max() / max(1.0, np.abs(Sm).max()))}
        return {"P": e.P, "L": e.L}, res, None
    raise SchemaError(f"unknown factor mode '{mode}'")


def _run_flow(sc):
    H = hamiltonian_from_json(_need(sc.inputs, "hamiltonian", "inputs"))
    iso = flow_from_quadratic(H, T=sc.T, dt=sc.dt, order=int(sc.inputs.get("order", 4)))
    d = 2 * iso.n
    header = ["t"] + _names("S", d, d) + _names("z", d)
    rows = [[t] + _flat(S) + _flat(z) for t, S, z in zip(iso.times, iso.S, iso.z)]
    res = {"symplectic": max(symplectic_residual(S) for S in iso.S)}
    final = {"t": iso.times[-1], "S": iso.S[-1], "z": iso.z[-1]}
    return final, res, (header, rows)


def _run_generator(sc):
    iso = isotopy_from_json(_need(sc.inputs, "isotopy", "inputs"), sc.grid)
    order = sc.inputs.get("order", "S-then-T")
    H = affine_generator(iso, order)
    Ms, ms = H.sample(iso.times)
    # integrate the recovered generator back and compare with the input
    back = flow_from_quadratic(H, T=float(iso.times[-1]), dt=iso.dt)
    res = {"roundtrip_S": float(np.abs(back.S - iso.S).max())}
    if order == "S-then-T":
        res["roundtrip_z"] = float(np.abs(back.shifts() - iso.shifts()).max())
    out = {"n": iso.n, "T": float(iso.times[-1]), "dt": iso.dt,
           "M": {"kind": "samples", "times": iso.times, "values": Ms},
           "m": {"kind": "samples", "times": iso.times, "values": ms}}
    d = 2 * iso.n
    header = ["t"] + _names("M", d, d) + _names("m", d)
    rows = [[t] + _flat(M) + _flat(m) for t, M, m in zip(iso.times, Ms, ms)]
    return {"hamiltonian": out}, res, (header, rows)


def _run_iwasawa(sc):
    iso = isotopy_from_json(_need(sc.inputs, "isotopy", "inputs"), sc.grid)
    ws = iwasawa_sum(iso)
    d = 2 * iso.n
    header = ["t"] + _names("MR", d, d) + _names("MU", d, d)
    rows = [[t] + _flat(a) + _flat(b) for t, a, b in zip(ws.times, ws.M_R, ws.M_U)]
    res = {"iwasawa_sum": ws.sum_residual(), "local_sum": ws.local_residual()}
    final = {"M_R": ws.M_R[-1], "M_U": ws.M_U[-1], "P": ws.P[-1], "L": ws.L[-1]}
    return final, res, (header, rows)


def _shadow_cols(E):
    return list(E.level * np.sqrt(np.diag(np.linalg.inv(E.shape))))


def _chalk_isotopy(sc):
    if "isotopy" in sc.inputs:
        return isotopy_from_json(sc.inputs["isotopy"], sc.grid)
    if "hamiltonian" in sc.inputs:
        return flow_from_quadratic(hamiltonian_from_json(sc.inputs["hamiltonian"]), T=sc.T, dt=sc.dt)
    raise SchemaError("inputs: need 'isotopy' or 'hamiltonian'")


def _run_chalkboard(sc):
    iso = _chalk_isotopy(sc)
    n, d = iso.n, 2 * iso.n
    ball = ball_from_json(_need(sc.inputs, "ball", "inputs"), n, sc.seed)
    if ball.n != n:
        raise SchemaError("ball dimension does not match the isotopy")
    zp = center_path_from_json(sc.inputs.get("center_path"), iso.times, d)
    traj = chalkboard_motion(iso, ball, z_path=zp)
    emit = sc.inputs.get("emit", ["balls", "shadows", "capacity"])
    caps = traj.capacities()
    header, rows = ["t"], [[t] for t in traj.times]
    header += _names("c", d)
    for r, b in zip(rows, traj.balls):
        r.extend(b.center)
    if "balls" in emit:
        header += _names("M", d, d)
        for r, E in zip(rows, traj.ellipsoids()):
            r.extend(_flat(E.shape / E.level**2))
    if "shadows" in emit:
        header += _names("shadow_M", n, n) + _names("shadow_halfwidth", n)
        for r, E in zip(rows, traj.shadows):
            r.extend(_flat(E.shape / E.level**2))
            r.extend(_shadow_cols(E))
    if "capacity" in emit:
        header.append("capacity")
        for r, c in zip(rows, caps):
            r.append(c)
    target = np.pi * ball.radius**2
    res = {"capacity_drift": float(np.abs(caps - target).max() / target)}
    return {"final_center": traj.balls[-1].center, "capacity": caps[-1]}, res, (header, rows)


def _run_shadow(sc):
    iso = _chalk_isotopy(sc)
    n = iso.n
    eps = float(_need(sc.inputs, "eps", "inputs"))
    zp = center_path_from_json(sc.inputs.get("center_path"), iso.times, 2 * n)
    sh = shadow_ball(iso, eps, z_path=zp)
    header = ["t"] + _names("x", n) + _names("shadow_halfwidth", n)
    rows = [[t] + list(E.center) + _shadow_cols(E) for t, E in zip(iso.times, sh)]
    return {"final_halfwidth": _shadow_cols(sh[-1])}, {}, (header, rows)


def _run_gaussian(sc):
    op = sc.inputs.get("op", "apply")
    if op == "apply":
        S = matrix_from_json(_need(sc.inputs, "matrix", "inputs"), sc.seed)
        s = state_from_json(_need(sc.inputs, "state", "inputs"))
        out = metaplectic_apply(S, s, int(sc.inputs.get("maslov", 0)), crosscheck=sc.crosscheck)
        G0, G1 = wigner_gaussian(s).G, wigner_gaussian(out).G
        Si = np.linalg.inv(as_matrix(S))
        res = {"wigner_covariance": float(np.abs(G1 - Si.T @ G0 @ Si).max())}
        return {"state": state_to_json(out)}, res, None
    if op == "wigner":
        s = state_from_json(_need(sc.inputs, "state", "inputs"))
        W = wigner_gaussian(s)
        result = {"G": W.G, "center": W.center, "hbar": W.hbar}
        res = {"symplectic": symplectic_residual(W.G)}
        if sc.inputs.get("numeric"):
            xs = _arr(sc.inputs.get("x_grid", np.linspace(-3, 3, 13).tolist()), "x_grid", 1)
            ps = _arr(sc.inputs.get("p_grid", np.linspace(-3, 3, 13).tolist()), "p_grid", 1)
            num = wigner_numeric_1d(s, xs, ps)
            closed = np.array([[W([x, p])[0] for p in ps] for x in xs])
            result["numeric"] = num
            res["numeric_vs_closed"] = float(np.abs(num - closed).max())
        return result, res, None
    if op == "transport":
        a = state_from_json(_need(sc.inputs, "from", "inputs"))
        b = state_from_json(_need(sc.inputs, "to", "inputs"))
        tr = gaussian_transport(a, b)
        got = tr.apply(a)
        res = {"reconstruction": float(max(np.abs(got.X - b.X).max(), np.abs(got.Y - b.Y).max(),
                                           np.abs(got.center - b.center).max()))}
        return {"chi": tr.chi, "z": tr.z, "P": tr.P, "L": tr.L}, res, None
    raise SchemaError(f"unknown gaussian op '{op}'")


_RUNNERS = {
    "capacity": _run_capacity, "williamson": _run_williamson, "mvee": _run_mvee,
    "factor": _run_factor, "flow": _run_flow, "generator": _run_generator,
    "iwasawa-sum": _run_iwasawa, "chalkboard": _run_chalkboard, "shadow": _run_shadow,
    "gaussian": _run_gaussian,
}

#: default residual thresholds per scenario kind
_DEFAULT_TOL = {"generator": 1e-6, "chalkboard": 1e-6, "iwasawa-sum": 1e-6, "gaussian": 1e-6, "mvee": 1e-6}


def run_scenario(sc):
    """Run a validated :class:`Scenario` and write its output file.

    Returns ``{"kind", "status", "results", "residuals", "tolerance", "output"}``.
    Raises :class:`SchemaError` for malformed inputs and
    :class:`NumericalFailure` (or the module's own error) for numerical ones.
    """
    try:
        results, residuals, table = _RUNNERS[sc.kind](sc)
    except (NotSymplectic, NotFree) as exc:
        raise SchemaError(str(exc)) from exc
    tol = sc.tol if sc.tol is not None else _DEFAULT_TOL.get(sc.kind, 1e-8)
    report = {
        "kind": sc.kind,
        "status": "ok",
        "results": results,
        "residuals": residuals,
        "tolerance": tol,
        "seed": sc.seed,
        "output": sc.out_path,
    }
    _check(residuals, tol)
    if sc.out_path:
        path = sc.resolve(sc.out_path)
        if sc.out_format == "csv":
            if table is None:
                raise SchemaError(f"kind '{sc.kind}' has no tabular output; use json")
            write_csv(path, *table)
        else:
            write_json(path, {k: v for k, v in report.items() if k != "output"})
    return _plain(report)


NUMERICAL_ERRORS = (
    NumericalFailure, FactorizationError, WilliamsonError, CayleyError,
    CrossCheckError, StepUnderflow, np.linalg.LinAlgError,
)
