"""Takagi-Sugeno polytopic models whose matrices are affine in unknown parameters.

A model is a convex blend of ``r = 2**n_p`` linear vertex submodels selected by
weighting functions of measured premise variables.  Each vertex carries, per
unknown parameter, a set of transmission matrices through which that parameter
enters the state equation.  Vertex models are built from a parameter-affine
nonlinear description by evaluating its affine matrix families at the corners
of the premise box (sector-nonlinearity construction), which reproduces the
original right-hand side exactly for premise values inside the box.

Premise variables are required to be linear in the stacked measurement/input
vector ``(y, u)``; values leaving the box are clamped and flagged.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Dimensions",
    "PremiseSpec",
    "MatrixFamily",
    "TransmissionFamily",
    "ParamAffineModel",
    "TSModel",
    "ModelFormatError",
    "corner_bits",
    "eval_weights",
    "premise_from_io",
    "snl_decompose",
    "assemble_matrices",
    "model_from_dict",
    "model_to_dict",
    "load_model",
    "save_model",
]

CONVEXITY_TOL = 1e-9
RANK_RTOL = 1e-10


class ModelFormatError(ValueError):
    """Raised when a model document violates the schema or an invariant.

    ``path`` points at the first offending element, e.g. ``premises[0].min``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


def _as_matrix(a, rows, cols, path):
    m = np.asarray(a, dtype=float)
    if m.shape != (rows, cols):
        raise ModelFormatError(path, f"expected a {rows}x{cols} matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ModelFormatError(path, "matrix contains non-finite entries")
    m.flags.writeable = False
    return m


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dimensions:
    """Signal and submodel counts of a polytopic model."""

    n: int         # states
    n_u: int       # inputs
    n_y: int       # outputs
    n_p: int       # premise variables
    n_theta: int   # unknown parameters

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.n_y < 1 or self.n_y > self.n:
            raise ValueError("n_y must satisfy 1 <= n_y <= n")
        if self.n_u < 0 or self.n_p < 0 or self.n_theta < 0:
            raise ValueError("n_u, n_p and n_theta must be nonnegative")

    @property
    def r(self):
        """Number of vertex submodels (one per premise-box corner)."""
        return 2 ** self.n_p


@dataclass(frozen=True, eq=False)
class PremiseSpec:
    """Bounds and measurement selectors of the premise variables.

    ``selectors[j]`` is a row over the stacked vector ``(y, u)`` such that
    ``z_j = selectors[j] @ (y, u)``.
    """

    z_min: np.ndarray     # (n_p,)
    z_max: np.ndarray     # (n_p,)
    selectors: np.ndarray  # (n_p, n_y + n_u)

    def __post_init__(self):
        object.__setattr__(self, "z_min", _freeze(np.atleast_1d(self.z_min)))
        object.__setattr__(self, "z_max", _freeze(np.atleast_1d(self.z_max)))
        sel = np.atleast_2d(np.asarray(self.selectors, dtype=float))
        if len(self.z_min) == 0:
            sel = sel.reshape(0, sel.shape[1] if sel.size else 0)
        object.__setattr__(self, "selectors", _freeze(sel))
        if self.z_min.shape != self.z_max.shape or len(self.z_min) != self.selectors.shape[0]:
            raise ValueError("premise bounds and selectors disagree in length")
        if np.any(self.z_min >= self.z_max):
            j = int(np.argmax(self.z_min >= self.z_max))
            raise ValueError(f"premise {j}: lower bound must be < upper bound")

    @property
    def n_p(self):
        return len(self.z_min)


@dataclass(frozen=True, eq=False)
class MatrixFamily:
    """Matrix-valued affine function of the premise vector: base + sum_j z_j * slopes[j]."""

    base: np.ndarray    # (rows, cols)
    slopes: np.ndarray  # (n_p, rows, cols)

    def __post_init__(self):
        object.__setattr__(self, "base", _freeze(self.base))
        object.__setattr__(self, "slopes", _freeze(self.slopes))

    def at(self, z):
        """Evaluate the family at premise vector ``z``."""
        if self.slopes.shape[0] == 0:
            return self.base.copy()
        return self.base + np.tensordot(np.asarray(z, dtype=float), self.slopes, axes=1)


@dataclass(frozen=True, eq=False)
class TransmissionFamily:
    """Per-parameter transmission matrices, each affine in the premises."""

    A: MatrixFamily  # (n, n)
    B: MatrixFamily  # (n, n_u)
    F: MatrixFamily  # (n, 1), stored as column


@dataclass(frozen=True, eq=False)
class ParamAffineModel:
    """Nonlinear system with a right-hand side affine in premises and parameters.

    State equation (theta the unknown-parameter vector)::

        dx/dt = A(z) x + B(z) u + F(z)
                + sum_k theta_k * (Abar_k(z) x + Bbar_k(z) u + Fbar_k(z))
        y     = C x

    where every matrix family is affine in the premise vector z.
    """

    dims: Dimensions
    A: MatrixFamily
    B: MatrixFamily
    F: MatrixFamily
    transmissions: tuple  # tuple[TransmissionFamily], length n_theta
    C: np.ndarray
    premises: PremiseSpec

    def __post_init__(self):
        object.__setattr__(self, "C", _freeze(self.C))
        object.__setattr__(self, "transmissions", tuple(self.transmissions))
        d = self.dims
        _check_family(self.A, d.n, d.n, d.n_p, "A")
        _check_family(self.B, d.n, d.n_u, d.n_p, "B")
        _check_family(self.F, d.n, 1, d.n_p, "F")
        if len(self.transmissions) != d.n_theta:
            raise ValueError("transmission family count must equal n_theta")
        for k, tr in enumerate(self.transmissions):
            _check_family(tr.A, d.n, d.n, d.n_p, f"transmission[{k}].A")
            _check_family(tr.B, d.n, d.n_u, d.n_p, f"transmission[{k}].B")
            _check_family(tr.F, d.n, 1, d.n_p, f"transmission[{k}].F")
        if self.C.shape != (d.n_y, d.n):
            raise ValueError(f"C must be {d.n_y}x{d.n}, got {self.C.shape}")
        if np.linalg.matrix_rank(self.C) != d.n_y:
            raise ValueError("C must have full row rank")
        if self.premises.n_p != d.n_p:
            raise ValueError("premise spec length must equal n_p")
        if d.n_p and self.premises.selectors.shape[1] != d.n_y + d.n_u:
            raise ValueError("selector rows must have length n_y + n_u")
        if not np.all(np.isfinite(self.premises.z_min)) or not np.all(np.isfinite(self.premises.z_max)):
            raise ValueError("premise bounds must be finite")


def _check_family(fam, rows, cols, n_p, name):
    if fam.base.shape != (rows, cols):
        raise ValueError(f"{name}.base must be {rows}x{cols}, got {fam.base.shape}")
    if fam.slopes.shape != (n_p, rows, cols):
        raise ValueError(f"{name}.slopes must be {n_p}x{rows}x{cols}, got {fam.slopes.shape}")


@dataclass(frozen=True, eq=False)
class TSModel:
    """Polytopic model: vertex matrices, per-parameter transmissions, output map.

    ``bits[i]`` gives the premise-box corner of submodel i (1 = upper bound).
    Vertex 0 is the all-upper corner.
    """

    dims: Dimensions
    A: np.ndarray      # (r, n, n)
    B: np.ndarray      # (r, n, n_u)
    F: np.ndarray      # (r, n)
    Abar: np.ndarray   # (r, n_theta, n, n)
    Bbar: np.ndarray   # (r, n_theta, n, n_u)
    Fbar: np.ndarray   # (r, n_theta, n)
    C: np.ndarray      # (n_y, n)
    premises: PremiseSpec
    bits: np.ndarray = field(default=None)  # (r, n_p) in {0, 1}

    def __post_init__(self):
        d = self.dims
        if self.bits is None:
            object.__setattr__(self, "bits", corner_bits(d.n_p))
        for name in ("A", "B", "F", "Abar", "Bbar", "Fbar", "C"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))
        object.__setattr__(self, "bits", _freeze(np.asarray(self.bits, dtype=float)).astype(np.int8))
        shapes = {
            "A": (d.r, d.n, d.n),
            "B": (d.r, d.n, d.n_u),
            "F": (d.r, d.n),
            "Abar": (d.r, d.n_theta, d.n, d.n),
            "Bbar": (d.r, d.n_theta, d.n, d.n_u),
            "Fbar": (d.r, d.n_theta, d.n),
            "C": (d.n_y, d.n),
        }
        for name, shape in shapes.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ValueError(f"{name} must have shape {shape}, got {got}")
        if np.linalg.matrix_rank(self.C) != d.n_y:
            raise ValueError("C must have full row rank")
        if self.premises.n_p != d.n_p:
            raise ValueError("premise spec length must equal n_p")
        if self.bits.shape != (d.r, d.n_p):
            raise ValueError(f"bits must have shape ({d.r}, {d.n_p})")
        patterns = {tuple(row) for row in self.bits}
        if len(patterns) != d.r:
            raise ValueError("vertex bit patterns must be distinct")

    def corner(self, i):
        """Premise-box corner of submodel ``i``."""
        p = self.premises
        return np.where(self.bits[i] == 1, p.z_max, p.z_min)


def corner_bits(n_p):
    """Canonical corner enumeration: vertex 0 = all bits 1 (upper corners)."""
    rows = list(itertools.product((1, 0), repeat=n_p))
    return np.array(rows, dtype=np.int8).reshape(2 ** n_p, n_p)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def eval_weights(model: TSModel, z) -> np.ndarray:
    """Convex weights of the vertex submodels at premise vector ``z``.

    Weights are tensor products of the normalized sector coordinates
    ``eta_j = (z_j - z_min_j)/(z_max_j - z_min_j)``; values outside the box
    are clamped.  The result sums to one and each entry is in [0, 1].
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    p = model.premises
    if z.shape != p.z_min.shape:
        raise ValueError(f"premise vector must have length {p.n_p}, got {z.shape}")
    if p.n_p == 0:
        return np.ones(1)
    eta = np.clip((z - p.z_min) / (p.z_max - p.z_min), 0.0, 1.0)
    return np.prod(np.where(model.bits == 1, eta, 1.0 - eta), axis=1)


def premise_from_io(model: TSModel, y, u):
    """Premise vector from measured output and input, clamped to the box.

    Returns ``(z, saturated)`` where ``saturated`` reports whether any raw
    premise value fell outside the box before clamping.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    d = model.dims
    if y.shape != (d.n_y,) or u.shape != (d.n_u,):
        raise ValueError(f"expected y of length {d.n_y} and u of length {d.n_u}")
    p = model.premises
    if p.n_p == 0:
        return np.zeros(0), False
    raw = p.selectors @ np.concatenate([y, u])
    z = np.clip(raw, p.z_min, p.z_max)
    return z, bool(np.any(raw != z))


def snl_decompose(pam: ParamAffineModel) -> TSModel:
    """Build the vertex polytopic model from a parameter-affine description.

    Each of the ``2**n_p`` submodels is the affine family evaluated at one
    corner of the premise box, so the convex blend with the tensor-product
    weights reproduces the affine families exactly inside the box.
    """
    d = pam.dims
    if d.n_p < 1:
        raise ValueError("sector decomposition needs at least one premise variable")
    bits = corner_bits(d.n_p)
    p = pam.premises
    A = np.empty((d.r, d.n, d.n))
    B = np.empty((d.r, d.n, d.n_u))
    F = np.empty((d.r, d.n))
    Abar = np.empty((d.r, d.n_theta, d.n, d.n))
    Bbar = np.empty((d.r, d.n_theta, d.n, d.n_u))
    Fbar = np.empty((d.r, d.n_theta, d.n))
    for i in range(d.r):
        corner = np.where(bits[i] == 1, p.z_max, p.z_min)
        A[i] = pam.A.at(corner)
        B[i] = pam.B.at(corner)
        F[i] = pam.F.at(corner)[:, 0]
        for k, tr in enumerate(pam.transmissions):
            Abar[i, k] = tr.A.at(corner)
            Bbar[i, k] = tr.B.at(corner)
            Fbar[i, k] = tr.F.at(corner)[:, 0]
    return TSModel(dims=d, A=A, B=B, F=F, Abar=Abar, Bbar=Bbar, Fbar=Fbar,
                   C=pam.C, premises=p, bits=bits)


def assemble_matrices(model: TSModel, mu, theta):
    """Blend vertex and transmission matrices: ``sum_i mu_i (X_i + sum_j theta_j Xbar_ij)``.

    Returns the effective ``(A, B, F)`` for convex weights ``mu`` and parameter
    vector ``theta``.  ``mu`` must be convex within ``1e-9``.
    """
    mu = np.asarray(mu, dtype=float)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    d = model.dims
    if mu.shape != (d.r,):
        raise ValueError(f"mu must have length {d.r}")
    if theta.shape != (d.n_theta,):
        raise ValueError(f"theta must have length {d.n_theta}")
    if abs(mu.sum() - 1.0) > CONVEXITY_TOL or np.any(mu < -CONVEXITY_TOL) or np.any(mu > 1 + CONVEXITY_TOL):
        raise ValueError("mu is not convex within tolerance")
    if d.n_theta:
        A_eff = model.A + np.tensordot(theta, model.Abar.swapaxes(0, 1), axes=1)
        B_eff = model.B + np.tensordot(theta, model.Bbar.swapaxes(0, 1), axes=1)
        F_eff = model.F + np.tensordot(theta, model.Fbar.swapaxes(0, 1), axes=1)
    else:
        A_eff, B_eff, F_eff = model.A, model.B, model.F
    return (
        np.tensordot(mu, A_eff, axes=1),
        np.tensordot(mu, B_eff, axes=1),
        np.tensordot(mu, F_eff, axes=1),
    )


# ---------------------------------------------------------------------------
# JSON document format
# ---------------------------------------------------------------------------
#
# Parameter-affine form:
#   {"dimensions": {"n":..,"n_u":..,"n_y":..,"n_p":..,"n_theta":..},
#    "premises": [{"min":..,"max":..,"selector":[..]} ...],
#    "A": {"base": [[..]], "slopes": [[[..]] ...]},    # same for "B", "F"
#    "transmission": [{"A": {...}, "B": {...}, "F": {...}} ...],   # per parameter
#    "C": [[..]]}
#
# Vertex (T-S) form replaces the families with
#   "vertices": [{"bits":[..], "A":[[..]], "B":[[..]], "F":[[..]],
#                 "transmission": [{"A":..,"B":..,"F":..} ...]} ...]
#
# All matrices are row-major arrays of arrays of finite doubles; F blocks are
# n x 1 columns.

def _dims_from_doc(doc):
    if "dimensions" not in doc:
        raise ModelFormatError("dimensions", "missing")
    dd = doc["dimensions"]
    try:
        dims = Dimensions(n=int(dd["n"]), n_u=int(dd["n_u"]), n_y=int(dd["n_y"]),
                          n_p=int(dd["n_p"]), n_theta=int(dd["n_theta"]))
    except KeyError as exc:
        raise ModelFormatError(f"dimensions.{exc.args[0]}", "missing") from None
    except ValueError as exc:
        raise ModelFormatError("dimensions", str(exc)) from None
    return dims


def _premises_from_doc(doc, dims):
    if "premises" not in doc:
        raise ModelFormatError("premises", "missing")
    entries = doc["premises"]
    if len(entries) != dims.n_p:
        raise ModelFormatError("premises", f"expected {dims.n_p} entries, got {len(entries)}")
    z_min = np.zeros(dims.n_p)
    z_max = np.zeros(dims.n_p)
    sel = np.zeros((dims.n_p, dims.n_y + dims.n_u))
    for j, e in enumerate(entries):
        for key in ("min", "max", "selector"):
            if key not in e:
                raise ModelFormatError(f"premises[{j}].{key}", "missing")
        z_min[j], z_max[j] = float(e["min"]), float(e["max"])
        if not np.isfinite(z_min[j]) or not np.isfinite(z_max[j]):
            raise ModelFormatError(f"premises[{j}]", "bounds must be finite")
        if z_min[j] >= z_max[j]:
            raise ModelFormatError(f"premises[{j}].min", "lower bound must be < upper bound")
        row = np.asarray(e["selector"], dtype=float)
        if row.shape != (dims.n_y + dims.n_u,):
            raise ModelFormatError(f"premises[{j}].selector",
                                   f"expected length {dims.n_y + dims.n_u}, got {row.shape}")
        sel[j] = row
    try:
        return PremiseSpec(z_min=z_min, z_max=z_max, selectors=sel)
    except ValueError as exc:
        raise ModelFormatError("premises", str(exc)) from None


def _family_from_doc(node, rows, cols, n_p, path):
    if "base" not in node:
        raise ModelFormatError(f"{path}.base", "missing")
    base = _as_matrix(node["base"], rows, cols, f"{path}.base")
    slopes_doc = node.get("slopes", [])
    if len(slopes_doc) != n_p:
        raise ModelFormatError(f"{path}.slopes", f"expected {n_p} slope matrices, got {len(slopes_doc)}")
    slopes = np.zeros((n_p, rows, cols))
    for j, s in enumerate(slopes_doc):
        slopes[j] = _as_matrix(s, rows, cols, f"{path}.slopes[{j}]")
    return MatrixFamily(base=base, slopes=slopes)


def model_from_dict(doc):
    """Parse a model document, validating every invariant.

    Returns a :class:`ParamAffineModel` or a :class:`TSModel` depending on the
    document form.  The first violation raises :class:`ModelFormatError` with a
    path into the document.
    """
    dims = _dims_from_doc(doc)
    premises = _premises_from_doc(doc, dims)
    if "C" not in doc:
        raise ModelFormatError("C", "missing")
    C = _as_matrix(doc["C"], dims.n_y, dims.n, "C")
    if np.linalg.matrix_rank(C) != dims.n_y:
        raise ModelFormatError("C", "must have full row rank")

    has_affine = "A" in doc
    has_vertices = "vertices" in doc
    if has_affine == has_vertices:
        raise ModelFormatError("", "document must contain exactly one of 'A' (parameter-affine form) "
                                   "or 'vertices' (vertex form)")

    if has_affine:
        fams = {}
        for name, cols in (("A", dims.n), ("B", dims.n_u), ("F", 1)):
            if name not in doc:
                raise ModelFormatError(name, "missing")
            fams[name] = _family_from_doc(doc[name], dims.n, cols, dims.n_p, name)
        trans_doc = doc.get("transmission", [])
        if len(trans_doc) != dims.n_theta:
            raise ModelFormatError("transmission",
                                   f"expected {dims.n_theta} entries, got {len(trans_doc)}")
        transmissions = []
        for k, tnode in enumerate(trans_doc):
            parts = {}
            for name, cols in (("A", dims.n), ("B", dims.n_u), ("F", 1)):
                if name not in tnode:
                    raise ModelFormatError(f"transmission[{k}].{name}", "missing")
                parts[name] = _family_from_doc(tnode[name], dims.n, cols, dims.n_p,
                                               f"transmission[{k}].{name}")
            transmissions.append(TransmissionFamily(A=parts["A"], B=parts["B"], F=parts["F"]))
        try:
            return ParamAffineModel(dims=dims, A=fams["A"], B=fams["B"], F=fams["F"],
                                    transmissions=tuple(transmissions), C=C, premises=premises)
        except ValueError as exc:
            raise ModelFormatError("", str(exc)) from None

    vertices = doc["vertices"]
    if len(vertices) != dims.r:
        raise ModelFormatError("vertices", f"expected {dims.r} submodels, got {len(vertices)}")
    A = np.zeros((dims.r, dims.n, dims.n))
    B = np.zeros((dims.r, dims.n, dims.n_u))
    F = np.zeros((dims.r, dims.n))
    Abar = np.zeros((dims.r, dims.n_theta, dims.n, dims.n))
    Bbar = np.zeros((dims.r, dims.n_theta, dims.n, dims.n_u))
    Fbar = np.zeros((dims.r, dims.n_theta, dims.n))
    bits = np.zeros((dims.r, dims.n_p), dtype=np.int8)
    for i, v in enumerate(vertices):
        path = f"vertices[{i}]"
        if "bits" not in v:
            raise ModelFormatError(f"{path}.bits", "missing")
        brow = np.asarray(v["bits"], dtype=int)
        if brow.shape != (dims.n_p,) or not np.all((brow == 0) | (brow == 1)):
            raise ModelFormatError(f"{path}.bits", f"expected {dims.n_p} entries in {{0,1}}")
        bits[i] = brow
        A[i] = _as_matrix(v.get("A"), dims.n, dims.n, f"{path}.A")
        B[i] = _as_matrix(v.get("B"), dims.n, dims.n_u, f"{path}.B")
        F[i] = _as_matrix(v.get("F"), dims.n, 1, f"{path}.F")[:, 0]
        trans = v.get("transmission", [])
        if len(trans) != dims.n_theta:
            raise ModelFormatError(f"{path}.transmission",
                                   f"expected {dims.n_theta} entries, got {len(trans)}")
        for k, tnode in enumerate(trans):
            Abar[i, k] = _as_matrix(tnode.get("A"), dims.n, dims.n, f"{path}.transmission[{k}].A")
            Bbar[i, k] = _as_matrix(tnode.get("B"), dims.n, dims.n_u, f"{path}.transmission[{k}].B")
            Fbar[i, k] = _as_matrix(tnode.get("F"), dims.n, 1, f"{path}.transmission[{k}].F")[:, 0]
    if len({tuple(row) for row in bits}) != dims.r:
        raise ModelFormatError("vertices", "bit patterns must be distinct")
    try:
        return TSModel(dims=dims, A=A, B=B, F=F, Abar=Abar, Bbar=Bbar, Fbar=Fbar,
                       C=C, premises=premises, bits=bits)
    except ValueError as exc:
        raise ModelFormatError("", str(exc)) from None


def _mat(a):
    return [[float(v) for v in row] for row in np.atleast_2d(a)]


def _col(a):
    return [[float(v)] for v in np.asarray(a).ravel()]


def _family_to_doc(fam, column=False):
    conv = _col if column else _mat
    return {"base": conv(fam.base), "slopes": [conv(s) for s in fam.slopes]}


def _dims_to_doc(d):
    return {"n": d.n, "n_u": d.n_u, "n_y": d.n_y, "n_p": d.n_p, "n_theta": d.n_theta}


def _premises_to_doc(p):
    return [{"min": float(p.z_min[j]), "max": float(p.z_max[j]),
             "selector": [float(v) for v in p.selectors[j]]} for j in range(p.n_p)]


def model_to_dict(model):
    """Serialize a model (either form) to its JSON document."""
    if isinstance(model, ParamAffineModel):
        return {
            "dimensions": _dims_to_doc(model.dims),
            "premises": _premises_to_doc(model.premises),
            "A": _family_to_doc(model.A),
            "B": _family_to_doc(model.B),
            "F": _family_to_doc(model.F, column=True),
            "transmission": [
                {"A": _family_to_doc(t.A), "B": _family_to_doc(t.B),
                 "F": _family_to_doc(t.F, column=True)}
                for t in model.transmissions
            ],
            "C": _mat(model.C),
        }
    if isinstance(model, TSModel):
        vertices = []
        for i in range(model.dims.r):
            vertices.append({
                "bits": [int(b) for b in model.bits[i]],
                "A": _mat(model.A[i]),
                "B": _mat(model.B[i]),
                "F": _col(model.F[i]),
                "transmission": [
                    {"A": _mat(model.Abar[i, k]), "B": _mat(model.Bbar[i, k]),
                     "F": _col(model.Fbar[i, k])}
                    for k in range(model.dims.n_theta)
                ],
            })
        return {
            "dimensions": _dims_to_doc(model.dims),
            "premises": _premises_to_doc(model.premises),
            "vertices": vertices,
            "C": _mat(model.C),
        }
    raise TypeError(f"not a model: {type(model)!r}")


def load_model(path):
    """Load and validate a model document from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return model_from_dict(doc)


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")
