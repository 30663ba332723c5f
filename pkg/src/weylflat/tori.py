"""Compact periodic A-orbits attached to loxodromic elements of SL(d, Z).

A loxodromic gamma with irreducible characteristic polynomial centralizes a
compact torus.  Its period lattice is the image, under the coherent
log-eigenvalue map, of the determinant-one units in the commutant of gamma.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import boundary, forms, intlinalg, lie


class PartialLatticeWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# characteristic polynomials and the compactness criterion


def char_poly(gamma) -> list[int]:
    """Coefficients of det(x I - gamma), leading first (Faddeev-LeVerrier, exact)."""
    a = [[int(x) for x in row] for row in np.asarray(gamma)]
    n = len(a)

    def mul(x, y):
        return [[sum(x[i][k] * y[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    coeffs = [1]
    m = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        for i in range(n):
            m[i][i] += coeffs[-1]
        am = mul(a, m)
        tr = sum(am[i][i] for i in range(n))
        if tr % k:
            raise ArithmeticError("non-integral Faddeev-LeVerrier step")
        coeffs.append(-tr // k)
        m = am
    return coeffs


def _divisors(n: int) -> list[int]:
    n = abs(n)
    return [d for d in range(1, n + 1) if n % d == 0]


def _poly_eval(p: list[int], x) -> int:
    v = 0
    for c in p:
        v = v * x + c
    return v


def _cauchy_bound(p: list[int]) -> int:
    return 1 + max(abs(c) for c in p[1:])


def is_irreducible_Q(p: list[int]) -> bool:
    """Exact irreducibility over Q of a monic integer polynomial of degree <= 4."""
    deg = len(p) - 1
    if p[0] != 1:
        raise ValueError("expected a monic polynomial")
    if deg > 4:
        raise ValueError("degree above 4 is not supported")
    if deg <= 1:
        return True
    for r in _divisors(p[-1]) if p[-1] else [0]:
        for s in (r, -r):
            if _poly_eval(p, s) == 0:
                return False
    if deg <= 3:
        return True
    # monic quadratic factors x^2 + b x + c with c | p[-1] and |b| <= 2 * root bound
    bound = 2 * _cauchy_bound(p)
    for c in _divisors(p[-1]):
        for cc in (c, -c):
            for b in range(-bound, bound + 1):
                q, r = _poly_divmod(p, [1, b, cc])
                if all(x == 0 for x in r):
                    return False
    return True


def _poly_divmod(p: list[int], q: list[int]) -> tuple[list[int], list[int]]:
    p = list(p)
    out = []
    while len(p) >= len(q):
        c = p[0]
        out.append(c)
        for i in range(len(q)):
            p[i] -= c * q[i]
        p.pop(0)
    return out, p


def subset_sum_zero(lam, tol: float = 1e-9) -> tuple[int, ...] | None:
    """A proper nonempty index subset (1-based) whose coordinates sum to ~0, if any."""
    lam = np.asarray(lam, dtype=float)
    d = lam.size
    for size in range(1, d):
        for sub in itertools.combinations(range(d), size):
            if abs(lam[list(sub)].sum()) <= tol:
                return tuple(i + 1 for i in sub)
    return None


def is_compact_torus(gamma) -> str:
    g = np.asarray(gamma)
    if not lie.is_loxodromic(g.astype(float)):
        return "not-loxodromic"
    return "compact" if is_irreducible_Q(char_poly(g)) else "non-compact"


def poly_discriminant(p: list[int]) -> int:
    if len(p) == 3:
        _, b, c = p
        return b * b - 4 * c
    if len(p) == 4:
        _, b, c, d = p
        return 18 * b * c * d - 4 * b**3 * d + b * b * c * c - 4 * c**3 - 27 * d * d
    raise ValueError("discriminant implemented for degree 2 and 3")


# ---------------------------------------------------------------------------
# commutant, units and period lattices


def commutant_basis(gamma) -> np.ndarray:
    """LLL-reduced Z-basis (d matrices) of {X in M_d(Z) : X gamma = gamma X}."""
    g = np.asarray(gamma, dtype=np.int64)
    d = g.shape[0]
    eye = np.eye(d, dtype=np.int64)
    # vec(X g - g X) = (g^T kron I - I kron g) vec(X), row-major vec
    lin = np.kron(eye, g.T) - np.kron(g, eye)
    red = intlinalg.lll_reduce_int(intlinalg.integer_kernel(lin))
    return np.array(red, dtype=np.int64).reshape(-1, d, d)


def power_basis(gamma) -> np.ndarray:
    g = np.asarray(gamma, dtype=np.int64)
    d = g.shape[0]
    out = [np.eye(d, dtype=np.int64)]
    for _ in range(d - 1):
        out.append(out[-1] @ g)
    return np.array(out)


def _coefficient_box(k: int, bound: int) -> np.ndarray:
    rng = np.arange(-bound, bound + 1, dtype=np.int64)
    return np.array(np.meshgrid(*([rng] * k), indexing="ij")).reshape(k, -1).T


def _basis_matrices(gamma, basis: str | np.ndarray) -> np.ndarray:
    if isinstance(basis, np.ndarray):
        return basis
    if basis == "power":
        return power_basis(gamma)
    if basis == "commutant":
        return commutant_basis(gamma)
    raise ValueError(f"unknown unit basis {basis!r}")


def _commutant_box(gamma, coeff_bound: int, basis) -> tuple[np.ndarray, np.ndarray]:
    g = np.asarray(gamma, dtype=np.int64)
    d = g.shape[0]
    mats = _basis_matrices(g, basis)
    coeffs = _coefficient_box(mats.shape[0], coeff_bound)
    peak = int(np.abs(mats).max()) * mats.shape[0] * coeff_bound
    if float(peak) ** d * math.factorial(d) > 2.0**62:
        raise OverflowError(f"coefficient bound {coeff_bound} overflows exact int64 determinants")
    us = np.einsum("nk,kij->nij", coeffs, mats)
    return us, intlinalg.batch_det(us)


def unit_search(gamma, coeff_bound: int, basis: str = "power") -> list[np.ndarray]:
    """Determinant-one u = sum c_i B_i with |c_i| <= coeff_bound.

    basis="power" uses B_i = gamma^i (units of Z[gamma]); basis="commutant"
    uses a reduced Z-basis of the full integral commutant of gamma.
    For odd d a determinant -1 combination is returned as -u.
    """
    d = np.asarray(gamma).shape[0]
    us, det = _commutant_box(gamma, coeff_bound, basis)
    units = [u for u in us[det == 1]]
    if d % 2 == 1:
        units += [-u for u in us[det == -1]]
    return units


def collision_units(gamma, coeff_bound: int, basis: str = "commutant", max_norm: int = 16) -> list[np.ndarray]:
    """Units X2^-1 X1 from commuting X1, X2 with equal image lattices X1 Z^d = X2 Z^d.

    Reaches units far outside the coefficient box when several box elements
    share a small determinant.
    """
    d = np.asarray(gamma).shape[0]
    us, det = _commutant_box(gamma, coeff_bound, basis)
    keep = (np.abs(det) >= 2) & (np.abs(det) <= max_norm)
    us, det = us[keep], det[keep]
    first: dict[tuple, int] = {}
    pairs = []
    for i, (x, n) in enumerate(zip(us, det)):
        key = (abs(int(n)), tuple(map(tuple, intlinalg.hnf_rows(x.T))))
        j = first.setdefault(key, i)
        if j != i:
            pairs.append((j, i))
    if not pairs:
        return []
    idx = np.array(pairs)
    ys, xs, dy = us[idx[:, 0]], us[idx[:, 1]], det[idx[:, 0]]
    num = intlinalg.batch_adjugate(ys) @ xs
    exact = np.all((num % dy[:, None, None]) == 0, axis=(1, 2))
    u = num[exact] // dy[exact][:, None, None]
    du = intlinalg.batch_det(u)
    out = [x for x in u[du == 1]]
    if d % 2 == 1:
        out += [-x for x in u[du == -1]]
    return out


@dataclass
class PeriodLattice:
    basis: np.ndarray
    bound: int
    stabilized: bool
    rank: int

    @property
    def full_rank(self) -> bool:
        return self.rank == self.basis.shape[1] - 1 if self.basis.size else False


def _eigen_frame(gamma) -> tuple[np.ndarray, np.ndarray]:
    jd = lie.jordan_projection(np.asarray(gamma, dtype=float))
    if not jd.loxodromic:
        raise ValueError("element is not loxodromic")
    v = jd.eigenbasis
    return v, np.linalg.inv(v)


def unit_logs(gamma, units: Iterable[np.ndarray]) -> np.ndarray:
    """Log-moduli of unit eigenvalues read in the fixed eigenbasis of gamma."""
    v, w = _eigen_frame(gamma)
    us = np.asarray(list(units), dtype=float)
    if us.size == 0:
        return np.empty((0, v.shape[0]))
    ev = np.einsum("ij,njk,ki->ni", w, us, v)
    logs = np.log(np.abs(ev))
    return logs - logs.mean(axis=1, keepdims=True)


def _sum_zero_coords(d: int) -> np.ndarray:
    return np.linalg.svd(np.eye(d) - 1.0 / d)[0][:, : d - 1]


def lattice_from_vectors(vectors: np.ndarray, max_den: int = 10_000, tol: float = 1e-7) -> np.ndarray:
    """Reduced basis of the Z-span of real vectors lying in a lattice of the sum-zero space."""
    vectors = np.asarray(vectors, dtype=float)
    d = vectors.shape[1]
    if vectors.shape[0]:
        _, first = np.unique(np.round(vectors, 7), axis=0, return_index=True)
        vectors = vectors[np.sort(first)]
    e = _sum_zero_coords(d)
    pts = vectors @ e
    scale = max(1.0, float(np.abs(pts).max())) if pts.size else 1.0
    pts = pts[np.linalg.norm(pts, axis=1) > 1e-9 * scale]
    if pts.shape[0] == 0:
        return np.empty((0, d))
    # greedy independent short vectors as a rational frame
    order = np.argsort(np.linalg.norm(pts, axis=1), kind="stable")
    frame = []
    for i in order:
        cand = frame + [pts[i]]
        if np.linalg.matrix_rank(np.array(cand), tol=1e-8 * scale) == len(cand):
            frame.append(pts[i])
        if len(frame) == d - 1:
            break
    f = np.array(frame)
    coords, *_ = np.linalg.lstsq(f.T, pts.T, rcond=None)
    coords = coords.T
    fr = [[Fraction(float(x)).limit_denominator(max_den) for x in row] for row in coords]
    for row, exact in zip(fr, coords):
        if max(abs(float(x) - y) for x, y in zip(row, exact)) > tol:
            raise ValueError("unit logs are not commensurable with the chosen frame")
    den = 1
    for row in fr:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [[int(x * den) for x in row] for row in fr]
    h = intlinalg.hnf_rows(ints)
    basis = (np.array(h, dtype=float) / den) @ f
    basis = _reduce_real_basis(basis)
    return basis @ e.T


def _reduce_real_basis(b: np.ndarray) -> np.ndarray:
    if b.shape[0] <= 1:
        return b
    red, _ = intlinalg.lll_float(b)
    return red


def _canonical_sign(basis: np.ndarray) -> np.ndarray:
    out = basis.copy()
    for i, v in enumerate(out):
        j = int(np.argmax(np.abs(v) > 1e-12))
        if v[j] < 0:
            out[i] = -v
    return out


def period_lattice(gamma, coeff_bound: int = 6, basis: str = "commutant") -> PeriodLattice:
    """Unit-log lattice of gamma; stabilized when doubling the bound changes nothing."""
    g = np.asarray(gamma, dtype=np.int64)
    d = g.shape[0]
    mats = _basis_matrices(g, basis)

    def at(bound):
        units = [g] + unit_search(g, bound, mats) + collision_units(g, bound, mats)
        logs = unit_logs(g, units)
        return lattice_from_vectors(logs)

    b1 = at(coeff_bound)
    b2 = at(2 * coeff_bound)
    rank = b2.shape[0]
    same = b1.shape == b2.shape and abs(covolume(b1) - covolume(b2)) <= 1e-8 * max(1.0, covolume(b2))
    return PeriodLattice(_canonical_sign(b2), 2 * coeff_bound, bool(same and rank == d - 1), rank)


def covolume(basis: np.ndarray) -> float:
    if basis.size == 0:
        return 0.0
    gram = basis @ basis.T
    return float(math.sqrt(max(np.linalg.det(gram), 0.0)))


def vol_a_torus(lattice: PeriodLattice) -> float:
    if not lattice.full_rank:
        raise ValueError("period lattice is not of full rank")
    return covolume(lattice.basis)


def count_regular_periods(lattice: PeriodLattice | np.ndarray, T: float, margin: float = 1e-9) -> int:
    """Number of lattice vectors in the open positive chamber with norm <= T."""
    basis = lattice.basis if isinstance(lattice, PeriodLattice) else np.asarray(lattice, dtype=float)
    if basis.shape[0] == 1:
        v = basis[0]
        if not lie.in_open_chamber(v, margin) and not lie.in_open_chamber(-v, margin):
            return 0
        return int(math.floor(T / np.linalg.norm(v) * (1 + 1e-12)))
    ginv = np.linalg.inv(basis @ basis.T)
    bounds = [int(math.floor(T * math.sqrt(ginv[i, i]))) + 1 for i in range(basis.shape[0])]
    grids = np.meshgrid(*[np.arange(-b, b + 1) for b in bounds], indexing="ij")
    coeffs = np.array(grids).reshape(basis.shape[0], -1).T
    vecs = coeffs @ basis
    norm_ok = np.linalg.norm(vecs, axis=1) <= T * (1 + 1e-12)
    chamber = np.all(-np.diff(vecs, axis=1) > margin, axis=1)
    return int(np.count_nonzero(norm_ok & chamber))


# ---------------------------------------------------------------------------
# census records


@dataclass
class TorusRecord:
    d: int
    repr: list[int]
    charpoly: list[int]
    disc: int
    lam: list[float]
    periods: list[list[float]]
    vol_a: float
    stabilized: bool
    class_key: str

    def matrix(self) -> np.ndarray:
        return np.array(self.repr, dtype=np.int64).reshape(self.d, self.d)

    def period_basis(self) -> np.ndarray:
        return np.array(self.periods, dtype=float)

    @property
    def primitive(self) -> bool:
        """Whether lambda generates the period lattice (d = 2 only)."""
        if self.d != 2:
            raise ValueError("primitivity is read off the rank-1 lattice only for d = 2")
        return abs(np.linalg.norm(self.lam) - self.vol_a) <= 1e-9 * self.vol_a

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "repr": self.repr,
                "charpoly": self.charpoly,
                "disc": self.disc,
                "lambda": self.lam,
                "periods": self.periods,
                "vol_a": None if math.isnan(self.vol_a) else self.vol_a,
                "stabilized": self.stabilized,
                "class_key": self.class_key,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "TorusRecord":
        o = json.loads(line)
        vol = float("nan") if o["vol_a"] is None else o["vol_a"]
        return cls(o["d"], o["repr"], o["charpoly"], o["disc"], o["lambda"], o["periods"],
                   vol, o["stabilized"], o["class_key"])


def write_jsonl(records: Iterable[TorusRecord], path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(r.to_json())
            fh.write("\n")


def read_jsonl(path) -> list[TorusRecord]:
    with open(path) as fh:
        return [TorusRecord.from_json(line) for line in fh if line.strip()]


def max_trace_d2(T: float) -> int:
    return int(math.floor(2.0 * math.cosh(T / math.sqrt(2.0)) + 1e-9))


def _census_d2(T: float) -> list[TorusRecord]:
    rows = forms.census_rows(max_trace_d2(T))
    out = []
    r2 = math.sqrt(2.0)
    for tr, u, D, a, b, c, t0, _u0 in rows.tolist():
        g = forms.automorph_matrix(tr, u, (a, b, c))
        ell = math.acosh(tr / 2.0)
        ell0 = math.acosh(t0 / 2.0)
        out.append(
            TorusRecord(
                d=2,
                repr=g.ravel().tolist(),
                charpoly=[1, -tr, 1],
                disc=tr * tr - 4,
                lam=[ell, -ell],
                periods=[[ell0, -ell0]],
                vol_a=r2 * ell0,
                stabilized=True,
                class_key=f"D={D};u={u};form=({a},{b},{c})",
            )
        )
    return out


# ----- d = 3: characteristic polynomials, module classes, conjugacy dedup


@dataclass
class CensusOptions:
    index_bound: int = 4
    conjugator_bound: int = 50
    conjugator_coeff: int = 3
    unit_bound: int = 6


def _cubic_candidates(T: float) -> list[tuple[int, int, np.ndarray]]:
    """(p, q, lambda) for irreducible x^3 - p x^2 + q x - 1, loxodromic, ||lambda|| <= T."""
    cap = math.exp(T * math.sqrt(2.0 / 3.0))
    bp = int(math.floor(3 * cap)) + 1
    ps, qs = np.meshgrid(np.arange(-bp, bp + 1), np.arange(-bp, bp + 1), indexing="ij")
    ps, qs = ps.ravel(), qs.ravel()
    disc = 18 * ps * qs - 4 * ps**3 + ps**2 * qs**2 - 4 * qs**3 - 27
    keep = (disc > 0) & (qs - ps != 0) & (ps + qs + 2 != 0)
    ps, qs = ps[keep], qs[keep]
    comp = np.zeros((ps.size, 3, 3))
    comp[:, 0, 1] = 1
    comp[:, 1, 2] = 1
    comp[:, 2, 0] = 1
    comp[:, 2, 1] = -qs
    comp[:, 2, 2] = ps
    ev = np.linalg.eigvals(comp).real
    lam = np.sort(np.log(np.abs(ev)), axis=1)[:, ::-1]
    lam -= lam.mean(axis=1, keepdims=True)
    ok = (np.linalg.norm(lam, axis=1) <= T) & np.all(-np.diff(lam, axis=1) > 1e-8, axis=1)
    return [(int(p), int(q), l) for p, q, l in zip(ps[ok], qs[ok], lam[ok])]


def _hnf_sublattices(n: int) -> Iterable[np.ndarray]:
    """Column-HNF matrices (upper triangular) of all index-n sublattices of Z^3."""
    for h11 in _divisors(n):
        for h22 in _divisors(n // h11):
            h33 = n // (h11 * h22)
            for h12 in range(h11):
                for h13 in range(h11):
                    for h23 in range(h22):
                        yield np.array([[h11, h12, h13], [0, h22, h23], [0, 0, h33]], dtype=np.int64)


def _stable_module_matrices(comp: np.ndarray, index_bound: int) -> list[np.ndarray]:
    out = [comp.copy()]
    for n in range(2, index_bound + 1):
        for h in _hnf_sublattices(n):
            if math.gcd(*[int(x) for x in h.ravel()]) != 1:
                continue
            m = np.linalg.solve(h.astype(float), comp @ h)
            mi = np.rint(m)
            if np.abs(m - mi).max() < 1e-9:
                out.append(mi.astype(np.int64))
    return out


def conjugator(g1: np.ndarray, g2: np.ndarray, coeff: int, entry_bound: int) -> np.ndarray | None:
    """X in SL(d, Z) with X g1 X^-1 = g2, searched in a coefficient box of the intertwiner lattice."""
    d = g1.shape[0]
    eye = np.eye(d, dtype=np.int64)
    lin = np.kron(eye, g1.T) - np.kron(g2, eye)
    ker = intlinalg.lll_reduce_int(intlinalg.integer_kernel(lin))
    mats = np.array(ker, dtype=np.int64).reshape(-1, d, d)
    if mats.shape[0] == 0:
        return None
    coeffs = _coefficient_box(mats.shape[0], coeff)
    xs = np.einsum("nk,kij->nij", coeffs, mats)
    small = np.abs(xs).reshape(xs.shape[0], -1).max(axis=1) <= entry_bound
    xs = xs[small]
    det = intlinalg.batch_det(xs)
    hit = np.nonzero(np.abs(det) == 1)[0]
    if hit.size == 0:
        return None
    x = xs[hit[0]]
    if det[hit[0]] == -1:
        if d % 2 == 0:
            pos = np.nonzero(det == 1)[0]
            if pos.size == 0:
                return None
            x = xs[pos[0]]
        else:
            x = -x
    return x


def _census_d3(T: float, opts: CensusOptions) -> list[TorusRecord]:
    out = []
    for p, q, lam in _cubic_candidates(T):
        comp = np.array([[0, 1, 0], [0, 0, 1], [1, -q, p]], dtype=np.int64)
        classes: list[tuple[np.ndarray, str]] = []
        for m in _stable_module_matrices(comp, opts.index_bound):
            found = False
            for rep, _ in classes:
                # the box search is not symmetric: X may lie in the box while X^-1 does not
                if (conjugator(m, rep, opts.conjugator_coeff, opts.conjugator_bound) is not None
                        or conjugator(rep, m, opts.conjugator_coeff, opts.conjugator_bound) is not None):
                    found = True
                    break
            if not found:
                classes.append((m, f"cp=({p},{q});module#{len(classes)};B={opts.conjugator_bound}"))
        for rep, key in classes:
            lat = period_lattice(rep, opts.unit_bound)
            cp = char_poly(rep)
            out.append(
                TorusRecord(
                    d=3,
                    repr=rep.ravel().tolist(),
                    charpoly=cp,
                    disc=poly_discriminant(cp),
                    lam=[float(x) for x in lam],
                    periods=lat.basis.tolist(),
                    vol_a=covolume(lat.basis) if lat.full_rank else float("nan"),
                    stabilized=lat.stabilized,
                    class_key=key + f";N={opts.index_bound};units<={lat.bound}",
                )
            )
    return out


def class_census(d: int, T: float, options: CensusOptions | None = None) -> list[TorusRecord]:
    """One record per conjugacy class of compact-type loxodromics with ||lambda|| <= T.

    d = 2 is exact.  d = 3 is bound-qualified: module classes up to the index
    bound, conjugacy up to the conjugator bound, units up to the unit bound.
    """
    if d == 2:
        return _census_d2(T)
    if d == 3:
        return _census_d3(T, options or CensusOptions())
    raise ValueError("census supports d = 2 and d = 3")


# ---------------------------------------------------------------------------
# sampling


def torus_sample(record: TorusRecord, n: int, rng: np.random.Generator) -> list[boundary.HopfPoint]:
    """Points (gamma+, gamma-, Y) with Y uniform in a fundamental parallelepiped of the periods."""
    if n == 0:
        return []
    plus, minus = boundary.eigenflags(record.matrix().astype(float))
    basis = record.period_basis()
    u = rng.uniform(size=(n, basis.shape[0]))
    ys = u @ basis
    return [boundary.HopfPoint(plus, minus, y) for y in ys]


def torus_frame(record: TorusRecord) -> np.ndarray:
    """g0 in SL(d, R) whose columns are eigenvectors of gamma, by decreasing modulus.

    The torus is the orbit of g0 exp(Y), Y in the period lattice quotient, and
    gamma g0 = g0 exp(lambda) m with m a sign matrix.
    """
    jd = lie.jordan_projection(record.matrix().astype(float))
    v = np.real(jd.eigenbasis).astype(float)
    det = np.linalg.det(v)
    v = v / abs(det) ** (1.0 / v.shape[0])
    if det < 0:
        v[:, -1] = -v[:, -1]
    return v


def torus_points(record: TorusRecord, ys: np.ndarray) -> np.ndarray:
    """Stack of group elements g0 exp(Y) for rows Y."""
    g0 = torus_frame(record)
    return g0[None, :, :] * np.exp(np.asarray(ys, dtype=float))[:, None, :]
