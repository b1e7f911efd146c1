"""Planar projections, Gauss diagrams, and combinatorial knot invariants.

The second-coefficient invariant is computed two independent ways: a
signed count of interlaced crossing pairs on the Gauss diagram, and the
z^2 coefficient of the Conway polynomial obtained by skein recursion on
the same diagram.  Both are used to cross-check the configuration-space
integrals elsewhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import KnotCurve
from .errors import DegenerateProjection, InconsistentDiagram

_PAR_TOL = 1e-9


@dataclass(frozen=True)
class Crossing:
    over: float
    under: float
    sign: int


@dataclass(frozen=True)
class GaussDiagram:
    """Chord diagram of a knot projection, with crossing signs.

    Parameters are curve parameters in [0,1); the base point sits at 0.
    """

    crossings: tuple[Crossing, ...]

    def __post_init__(self):
        seen = set()
        for c in self.crossings:
            if c.sign not in (-1, 1):
                raise InconsistentDiagram(f"bad sign {c.sign}")
            for t in (c.over, c.under):
                if not (0.0 <= t < 1.0):
                    raise InconsistentDiagram(f"parameter {t} outside [0,1)")
                if t in seen:
                    raise InconsistentDiagram(f"duplicate parameter {t}")
                seen.add(t)
            if c.over == c.under:
                raise InconsistentDiagram("crossing with equal parameters")

    @property
    def writhe(self) -> int:
        return sum(c.sign for c in self.crossings)

    def to_json_obj(self) -> dict:
        return {
            "crossings": [
                {"over": c.over, "under": c.under, "sign": c.sign} for c in self.crossings
            ]
        }

    @classmethod
    def from_json_obj(cls, obj) -> "GaussDiagram":
        return cls(
            tuple(
                Crossing(float(c["over"]), float(c["under"]), int(c["sign"]))
                for c in obj["crossings"]
            )
        )

    def mirror(self) -> "GaussDiagram":
        """Swap all over/under roles and flip signs."""
        return GaussDiagram(
            tuple(Crossing(c.under, c.over, -c.sign) for c in self.crossings)
        )


# --- projection ---


def _plane_basis(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(d)
    if norm == 0:
        raise DegenerateProjection("zero direction")
    d = d / norm
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return e1, e2, d


def _candidate_pairs(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """Non-adjacent segment pairs whose projections can intersect,
    found by hashing segment midpoints into a uniform grid."""
    nxt = np.concatenate([np.arange(1, n), [0]])
    mu, mv = (u + u[nxt]) / 2, (v + v[nxt]) / 2
    seg_len = np.hypot(u[nxt] - u, v[nxt] - v)
    cell = max(float(seg_len.max()), 1e-12)
    cu = np.floor(mu / cell).astype(np.int64)
    cv = np.floor(mv / cell).astype(np.int64)
    buckets: dict[tuple[int, int], list[int]] = {}
    for i in range(n):
        buckets.setdefault((cu[i], cv[i]), []).append(i)
    pairs = []
    for i in range(n):
        ci, cj = cu[i], cv[i]
        for da in (-1, 0, 1):
            for db in (-1, 0, 1):
                for j in buckets.get((ci + da, cj + db), ()):
                    if j <= i + 1 or (i == 0 and j == n - 1):
                        continue
                    pairs.append((i, j))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def _segment_crossings(curve: KnotCurve, direction, n: int) -> list[Crossing]:
    """Self-intersections of the projected closed polyline with n segments."""
    e1, e2, d = _plane_basis(direction)
    t = np.arange(n) / n
    pts = curve.eval(t)
    u = pts @ e1
    v = pts @ e2
    depth = pts @ d
    scale = max(np.ptp(u), np.ptp(v))
    nxt = np.concatenate([np.arange(1, n), [0]])
    du, dv = u[nxt] - u, v[nxt] - v

    # tangency with the viewing direction collapses the projected speed
    tan3 = np.linalg.norm(curve.deriv(t), axis=1)
    if (np.hypot(du, dv) * n / tan3).min() < 1e-2:
        raise DegenerateProjection("curve tangent nearly parallel to direction")

    pairs = _candidate_pairs(u, v, n)
    if pairs.size == 0:
        return []
    i, j = pairs[:, 0], pairs[:, 1]
    denom = du[i] * dv[j] - dv[i] * du[j]
    wu, wv = u[j] - u[i], v[j] - v[i]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (wu * dv[j] - wv * du[j]) / denom
        r = (wu * dv[i] - wv * du[i]) / denom
    hit = (s > 0) & (s < 1) & (r > 0) & (r < 1) & np.isfinite(s) & np.isfinite(r)

    found = []
    for a in np.nonzero(hit)[0]:
        ii, jj = int(i[a]), int(j[a])
        si, rj = float(s[a]), float(r[a])
        if min(si, 1 - si, rj, 1 - rj) * np.hypot(du[ii], dv[ii]) < 1e-9 * scale:
            raise DegenerateProjection("crossing too close to a segment endpoint")
        ti = (ii + si) / n
        tj = (jj + rj) / n
        zi = depth[ii] + si * (depth[nxt[ii]] - depth[ii])
        zj = depth[jj] + rj * (depth[nxt[jj]] - depth[jj])
        if abs(zi - zj) < 1e-7 * scale:
            raise DegenerateProjection("over/under depths nearly equal")
        cross2 = du[ii] * dv[jj] - dv[ii] * du[jj]
        if abs(cross2) < 1e-9 * np.hypot(du[ii], dv[ii]) * np.hypot(du[jj], dv[jj]):
            raise DegenerateProjection("near-tangential crossing")
        if zi > zj:
            over_t, under_t, sign = ti, tj, (1 if cross2 > 0 else -1)
        else:
            over_t, under_t, sign = tj, ti, (1 if cross2 < 0 else -1)
        found.append(Crossing(over_t, under_t, sign))
    found.sort(key=lambda c: (min(c.over, c.under), max(c.over, c.under)))
    return found


def _crossings_match(a: list[Crossing], b: list[Crossing], tol: float) -> bool:
    if len(a) != len(b):
        return False
    for ca, cb in zip(a, b):
        if ca.sign != cb.sign:
            return False
        if abs(ca.over - cb.over) > tol or abs(ca.under - cb.under) > tol:
            return False
    return True


_PROJECTION_MEMO: dict[tuple, GaussDiagram] = {}


def project_to_diagram(
    curve: KnotCurve, direction, min_segments: int = 2048, max_segments: int = 32768
) -> GaussDiagram:
    """Gauss diagram of the projection along ``direction``.

    The projected polyline is refined by doubling until the crossing set
    stabilizes twice in a row; unstable or tangential projections raise
    DegenerateProjection (callers retry with a perturbed direction).
    """
    memo_key = (
        curve.content_hash(),
        tuple(float(x) for x in np.asarray(direction).ravel()),
        min_segments,
        max_segments,
    )
    cached = _PROJECTION_MEMO.get(memo_key)
    if cached is not None:
        return cached
    history = []
    levels = []
    n = min_segments
    while n <= max_segments:
        history.append(_segment_crossings(curve, direction, n))
        levels.append(n)
        if len(history) >= 3:
            a, b, c = history[-3:]
            tol = 16.0 / levels[-3]
            if _crossings_match(a, b, tol) and _crossings_match(b, c, tol):
                params = sorted(t for cr in c for t in (cr.over, cr.under))
                if params:
                    gaps = np.diff(np.array(params + [params[0] + 1.0]))
                    if gaps.min() < 4.0 / n:
                        raise DegenerateProjection("two crossings nearly coincide")
                result = GaussDiagram(tuple(c))
                if len(_PROJECTION_MEMO) > 128:
                    _PROJECTION_MEMO.clear()
                _PROJECTION_MEMO[memo_key] = result
                return result
        n *= 2
    raise DegenerateProjection("crossing set did not stabilize")


def generic_directions(seed: int = 7, count: int = 16) -> list[np.ndarray]:
    """Deterministic sequence of unit vectors for projection retries."""
    rng = np.random.default_rng(seed)
    dirs = []
    while len(dirs) < count:
        v = rng.normal(size=3)
        norm = np.linalg.norm(v)
        if norm > 1e-3:
            dirs.append(v / norm)
    return dirs


# --- invariants ---


def _pv_count(arrows: list[tuple[float, float, int]], base: float) -> int:
    """Signed count of interlaced pairs in the fixed based pattern.

    Positions are taken cyclically starting at ``base``; the matched
    pattern is under(2) < over(1) < over(2) < under(1).
    """

    def pos(t: float) -> float:
        return (t - base) % 1.0

    total = 0
    for i, (o1, u1, s1) in enumerate(arrows):
        for o2, u2, s2 in arrows[i + 1 :]:
            for (a_o, a_u, a_s), (b_o, b_u, b_s) in (
                ((o1, u1, s1), (o2, u2, s2)),
                ((o2, u2, s2), (o1, u1, s1)),
            ):
                if pos(b_u) < pos(a_o) < pos(b_o) < pos(a_u):
                    total += a_s * b_s
    return total


def a2_oracle(d: GaussDiagram) -> int:
    """Casson knot invariant (z^2 Conway coefficient) by interlacement count.

    Recomputed with the base point moved to every arc; disagreement
    between base points means the diagram is not a knot diagram.
    """
    if not d.crossings:
        return 0
    arrows = [(c.over, c.under, c.sign) for c in d.crossings]
    params = sorted(t for c in d.crossings for t in (c.over, c.under))
    bases = [0.0] + [(a + b) / 2 for a, b in zip(params, params[1:])] + [(params[-1] + 1) / 2]
    counts = [_pv_count(arrows, b) for b in bases]
    values = set(counts)
    if len(values) != 1:
        raise InconsistentDiagram(f"base-point dependent count: {sorted(values)}")
    return counts[0]


# --- Conway polynomial by skein recursion ---


def _diagram_components(d: GaussDiagram) -> list[list[tuple[int, bool]]]:
    """Single cyclic visit sequence: (crossing index, is_over) by parameter."""
    events = []
    for k, c in enumerate(d.crossings):
        events.append((c.over, k, True))
        events.append((c.under, k, False))
    events.sort()
    return [[(k, over) for _, k, over in events]]


def _first_bad(components, signs, over_state):
    """First crossing whose first visit is an under-visit, in traversal order."""
    visited = set()
    for ci, comp in enumerate(components):
        for pi, (k, is_over) in enumerate(comp):
            if k in visited:
                continue
            visited.add(k)
            effective_over = is_over if over_state[k] else not is_over
            if not effective_over:
                return ci, pi, k
    return None


def _smooth(components, k):
    """Oriented smoothing at crossing k: drop both visits and reconnect."""
    locs = []
    for ci, comp in enumerate(components):
        for pi, (kk, _) in enumerate(comp):
            if kk == k:
                locs.append((ci, pi))
    (c1, p1), (c2, p2) = locs
    out = [comp for ci, comp in enumerate(components) if ci not in (c1, c2)]
    if c1 == c2:
        comp = components[c1]
        lo, hi = sorted((p1, p2))
        out.append(comp[lo + 1 : hi])
        out.append(comp[hi + 1 :] + comp[:lo])
    else:
        a, b = components[c1], components[c2]
        out.append(a[p1 + 1 :] + a[:p1] + b[p2 + 1 :] + b[:p2])
    return [c for c in out if c is not None]


def _drop_kinks(components):
    """Remove crossings whose two visits are cyclically adjacent (R1)."""
    changed = True
    while changed:
        changed = False
        for ci, comp in enumerate(components):
            m = len(comp)
            for p in range(m):
                k1, _ = comp[p]
                k2, _ = comp[(p + 1) % m]
                if k1 == k2 and m >= 2:
                    lo, hi = sorted((p, (p + 1) % m))
                    if hi == lo + 1:
                        comp = comp[:lo] + comp[hi + 1 :]
                    else:  # positions m-1 and 0
                        comp = comp[1:-1]
                    components = components[:ci] + [comp] + components[ci + 1 :]
                    changed = True
                    break
            if changed:
                break
    return components


def _state_key(components, signs, over_state):
    """Canonical key of the effective diagram state: crossings renamed
    by first-visit order, over/under and signs folded through flips."""
    rank: dict[int, int] = {}
    for comp in components:
        for k, _ in comp:
            if k not in rank:
                rank[k] = len(rank)
    parts = []
    for comp in components:
        visits = []
        for k, is_over in comp:
            eff_over = is_over if over_state[k] else not is_over
            eff_sign = signs[k] if over_state[k] else -signs[k]
            visits.append((rank[k], eff_over, eff_sign))
        parts.append(tuple(visits))
    return tuple(parts)


def _conway(components, signs, over_state, memo) -> dict[int, int]:
    """Conway polynomial (z-degree -> coeff) of the diagram state."""
    components = _drop_kinks(components)
    key = _state_key(components, signs, over_state)
    hit = memo.get(key)
    if hit is not None:
        return hit
    bad = _first_bad(components, signs, over_state)
    if bad is None:
        # descending diagram: unknot if one component, split unlink else
        out = {0: 1} if len(components) == 1 else {}
        memo[key] = out
        return out
    _, _, k = bad
    flipped = dict(over_state)
    flipped[k] = not over_state[k]
    switched = _conway(components, signs, flipped, memo)
    smoothed = _conway(_smooth(components, k), signs, over_state, memo)
    sign = signs[k] * (1 if over_state[k] else -1)
    # positive crossing: P(+) = P(-) + z P(0); negative: P(-) = P(+) - z P(0)
    out = dict(switched)
    for deg, coeff in smoothed.items():
        out[deg + 1] = out.get(deg + 1, 0) + sign * coeff
    out = {deg: c for deg, c in out.items() if c}
    memo[key] = out
    return out


def conway_polynomial(d: GaussDiagram) -> list[int]:
    """Coefficients of the Conway polynomial in z, ascending degree."""
    if not d.crossings:
        return [1]
    components = _diagram_components(d)
    signs = {k: c.sign for k, c in enumerate(d.crossings)}
    over_state = {k: True for k in range(len(d.crossings))}
    poly = _conway(components, signs, over_state, {})
    if not poly:
        return [0]
    top = max(poly)
    return [poly.get(i, 0) for i in range(top + 1)]


def a2_from_conway(d: GaussDiagram) -> int:
    poly = conway_polynomial(d)
    return poly[2] if len(poly) > 2 else 0


def a2_of_curve(curve: KnotCurve, directions: int = 3, seed: int = 7) -> int:
    """a2 from several generic projections; the values must agree."""
    values = []
    for direction in generic_directions(seed=seed, count=directions + 13):
        try:
            diagram = project_to_diagram(curve, direction)
        except DegenerateProjection:
            continue
        values.append(a2_oracle(diagram))
        if len(values) == directions:
            break
    if len(values) < directions:
        raise DegenerateProjection("could not find enough generic directions")
    if len(set(values)) != 1:
        raise InconsistentDiagram(f"projections disagree: {values}")
    return values[0]
