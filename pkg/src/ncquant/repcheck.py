"""Numeric checks of solved relations in explicit matrix representations.

This is the only place where floating point appears.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import sqrt
from pathlib import Path
from typing import Mapping

import numpy as np

from . import coeffs as _c
from .coeffs import ParamPoly, ParamRatio
from .ncalg import NCElement

__all__ = [
    "MatrixRep",
    "RepReport",
    "RepError",
    "check_representation",
    "builtin_rep",
    "load_rep",
    "evaluate_coefficient",
    "evaluate_element",
]


class RepError(ValueError):
    pass


@dataclass
class MatrixRep:
    generators: dict[str, np.ndarray]
    values: dict[str, float]
    edge_margin: int = 0

    def __post_init__(self):
        dims = set()
        for name, m in self.generators.items():
            m = np.asarray(m, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise RepError(f"matrix for {name} is not square")
            dims.add(m.shape[0])
            self.generators[name] = m
        if len(dims) > 1:
            raise RepError(f"matrices have different dimensions {sorted(dims)}")
        if self.edge_margin < 0:
            raise RepError("edge_margin must be nonnegative")

    @property
    def dimension(self) -> int:
        return next(iter(self.generators.values())).shape[0] if self.generators else 0


@dataclass
class RepReport:
    residuals: dict[str, float]
    tol: float
    interior: int
    failures: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.failures = [k for k, v in self.residuals.items() if not v < self.tol]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def lines(self) -> list[str]:
        out = []
        for k, v in self.residuals.items():
            out.append(f"{'ok  ' if v < self.tol else 'FAIL'} {k}: {v:.3e}")
        return out

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "interior_dimension": self.interior,
            "residuals": self.residuals,
            "failures": self.failures,
        }


# ---------------------------------------------------------------------------
# numeric evaluation


def _eval_poly(p: ParamPoly, values: Mapping[str, complex]) -> complex:
    total = 0j
    for m, c in p.terms.items():
        t = complex(c)
        for i, e in m:
            name = _c._names[i]
            if name not in values:
                raise RepError(f"no numeric value for {name!r}")
            t *= complex(values[name]) ** e
        total += t
    return total


def evaluate_coefficient(c: ParamRatio, values: Mapping[str, complex]) -> complex:
    return _eval_poly(c.num, values) / _eval_poly(c.den, values)


def evaluate_element(el: NCElement, rep: MatrixRep) -> np.ndarray:
    gt = el.gt
    N = rep.dimension
    eye = np.eye(N, dtype=complex)
    missing = [n for n in gt.names if n not in rep.generators]
    if missing:
        raise RepError(f"no matrix for generator(s) {', '.join(missing)}")
    hbar = complex(rep.values.get("hbar", 1.0))
    dens = []
    for name, q, _ in gt.denominators:
        qm = np.zeros((N, N), dtype=complex)
        for e, c in q.items():
            qm += evaluate_coefficient(c, rep.values) * _mono_matrix((), e, gt, rep, [], eye)
        dens.append(np.linalg.inv(qm))
    out = np.zeros((N, N), dtype=complex)
    for (h, d, g), c in el.terms.items():
        out += evaluate_coefficient(c, rep.values) * hbar ** h * _mono_matrix(d, g, gt, rep, dens, eye)
    return out


def _mono_matrix(d, g, gt, rep, dens, eye):
    m = eye
    for t, e in enumerate(d):
        for _ in range(e):
            m = m @ dens[t]
    for j, e in enumerate(g):
        if e:
            m = m @ np.linalg.matrix_power(rep.generators[gt.names[j]], e)
    return m


# ---------------------------------------------------------------------------
# checks


def check_representation(result, rep: MatrixRep, tol: float = 1e-10,
                         hamiltonian: NCElement | None = None) -> RepReport:
    """Residuals (max entry on the interior block) of every solved identity."""
    gt = result.gt
    needed = set(result.table.symbols()) | result.derivation.symbols()
    for e in result.integrals.values():
        needed |= e.symbols()
    H = hamiltonian if hamiltonian is not None else result.hamiltonian
    if H is not None:
        needed |= H.symbols()
    missing = sorted(n for n in needed if n not in rep.values)
    if missing:
        raise RepError(f"unassigned parameter(s): {', '.join(missing)}")
    absent = [n for n in gt.names if n not in rep.generators]
    if absent:
        raise RepError(f"no matrix for generator(s) {', '.join(absent)}")
    N = rep.dimension
    keep = N - rep.edge_margin
    if keep <= 0:
        raise RepError("edge_margin leaves no interior block")

    def norm(m: np.ndarray) -> float:
        block = m[:keep, :keep]
        return float(np.max(np.abs(block))) if block.size else 0.0

    res: dict[str, float] = {}
    for r in list(result.relations) + list(result.constraints):
        res[f"constraint {_c_str(r)}"] = abs(evaluate_coefficient(r, rep.values))
    mats = {n: rep.generators[n] for n in gt.names}
    for n, m in mats.items():
        res[f"hermiticity of {n}"] = norm(m - m.conj().T)
    for i in range(gt.n):
        for j in range(i + 1, gt.n):
            a, b = gt.names[i], gt.names[j]
            f = evaluate_element(result.table.entry(i, j), rep)
            res[f"relation {b} {a}"] = norm(mats[b] @ mats[a] - mats[a] @ mats[b] - f)
    if H is not None:
        Hm = evaluate_element(H, rep)
        hbar = complex(rep.values.get("hbar", 1.0))
        for n in gt.names:
            x = evaluate_element(result.derivation.image(n), rep)
            inner = (mats[n] @ Hm - Hm @ mats[n]) / (1j * hbar)
            res[f"heisenberg form of {n}'"] = norm(x - inner)
        for name, I in result.integrals.items():
            Im = evaluate_element(I, rep)
            res[f"[{name}, H]"] = norm(Im @ Hm - Hm @ Im)
    return RepReport(res, tol, keep)


def _c_str(r: ParamRatio) -> str:
    from .solver import relation_string

    return relation_string(r)


# ---------------------------------------------------------------------------
# built-in representations


def _spin(dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if dim < 1:
        raise RepError("spin dimension must be positive")
    j = (dim - 1) / 2
    ms = [j - k for k in range(dim)]
    jz = np.diag(ms).astype(complex)
    jp = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        m = ms[k]
        jp[k - 1, k] = sqrt(j * (j + 1) - m * (m + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return jx, jy, jz


def _ladder_pair(dim: int) -> tuple[np.ndarray, np.ndarray]:
    if dim < 2:
        raise RepError("ladder dimension must be at least 2")
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    ad = a.conj().T
    return (a + ad) / sqrt(2), (a - ad) / (1j * sqrt(2))


def builtin_rep(
    name: str,
    dimension: int,
    values: Mapping[str, float] | None = None,
    *,
    generators: tuple[str, ...] | None = None,
    scale: float = 1.0,
    edge_margin: int = 0,
) -> MatrixRep:
    """``spin``: ``hbar`` times angular momentum matrices, so that ``[J1, J2] = i hbar J3``.

    ``truncated_ladder_pair``: a position/momentum pair from truncated ladders
    with interior commutator ``[A, B] = i hbar scale``.
    """
    vals = dict(values or {})
    hbar = float(vals.setdefault("hbar", 1.0))
    if name == "spin":
        names = generators or ("J1", "J2", "J3")
        if len(names) != 3:
            raise RepError("spin representation needs three generator names")
        mats = [hbar * m for m in _spin(dimension)]
    elif name == "truncated_ladder_pair":
        names = generators or ("A", "B")
        if len(names) != 2:
            raise RepError("ladder representation needs two generator names")
        x, p = _ladder_pair(dimension)
        s = sqrt(hbar * abs(scale))
        mats = [s * x, (s if scale >= 0 else -s) * p]
    else:
        raise RepError(f"unknown representation {name!r}; available: spin, truncated_ladder_pair")
    return MatrixRep(dict(zip(names, mats)), vals, edge_margin)


def load_rep(source: str | Path | Mapping) -> MatrixRep:
    """Read ``{"dimension", "generators": {name: rows of [re, im]}, "values", "edge_margin"?}``."""
    if isinstance(source, Mapping):
        data = source
    else:
        try:
            data = json.loads(Path(source).read_text())
        except OSError as exc:
            raise RepError(f"cannot read {source}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise RepError(f"{source}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    try:
        N = int(data["dimension"])
        gens = {}
        for name, rows in data["generators"].items():
            m = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
            if m.shape != (N, N):
                raise RepError(f"matrix for {name} has shape {m.shape}, expected ({N}, {N})")
            gens[name] = m
        values = {k: float(v) for k, v in data.get("values", {}).items()}
        margin = int(data.get("edge_margin", 0))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, RepError):
            raise
        raise RepError(f"malformed representation file: {exc}") from exc
    return MatrixRep(gens, values, margin)
