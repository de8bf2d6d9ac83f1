"""Randomized verification suites for the typicality inequalities.

Instances are batches of Haar-random states with random diagonal
projectors and per-tag unitaries; one tag is an independent draw and two
are small perturbations of the base tag so that near-typical s-set pairs
occur with usable frequency. A further sub-batch carries mirror-symmetric
weights and two designed low-weight cells, which makes the premise side of
the closure implications reachable at every sweep level.

Violations are measured as ``(lhs - rhs) / max(1, |rhs|)`` so that huge
but mathematically consistent bound values cannot manufacture rounding
failures. Every violation is reported as a replayable certificate
``(dim, seed, chunk, index)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import Grid, Hamiltonian, Region, make_gaussian_packet
from .csets import CSet
from .overlap import packet_overlap_profile
from .quantum import quantum_chain_bound

CHUNK = 2048
MAX_CERTIFICATES = 20
DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class SuiteConfig:
    dims: tuple = (2, 4, 8, 16)
    count: int = 10_000
    seed: int = 7
    eps_levels: tuple = (1e-2, 1e-3, 1e-4)
    tolerance: float = 1e-9
    threads: int = 1

    def __post_init__(self) -> None:
        if len(self.dims) == 0 or any(d < 2 for d in self.dims):
            raise ConfigError("dims must be >= 2")
        if self.count < 1:
            raise ConfigError("instance count must be >= 1")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")


@dataclass
class CheckStats:
    evaluated: int = 0
    vacuous: int = 0
    skipped: int = 0
    violations: int = 0
    max_violation: float = 0.0
    certificates: list = field(default_factory=list)

    def absorb(self, other: "CheckStats") -> None:
        self.evaluated += other.evaluated
        self.vacuous += other.vacuous
        self.skipped += other.skipped
        self.violations += other.violations
        self.max_violation = max(self.max_violation, other.max_violation)
        room = MAX_CERTIFICATES - len(self.certificates)
        if room > 0:
            self.certificates.extend(other.certificates[:room])

    def to_dict(self) -> dict:
        return {
            "evaluated": self.evaluated,
            "vacuous": self.vacuous,
            "skipped": self.skipped,
            "violations": self.violations,
            "max_violation": self.max_violation,
            "certificates": self.certificates,
        }


@dataclass
class SuiteReport:
    suite: str
    config: dict
    checks: dict
    passed: bool

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "config": self.config,
            "checks": {k: v.to_dict() for k, v in self.checks.items()},
            "passed": self.passed,
        }


# --------------------------------------------------------------------------
# batched random instances

def _chunk_rng(seed: int, dim: int, chunk: int, salt: int = 0) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(dim, chunk, salt)))


def _haar_states(rng, n, d):
    z = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _haar_unitaries(rng, n, d):
    z = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    q, r = np.linalg.qr(z)
    diag = np.einsum("nii->ni", r)
    return q * (diag / np.abs(diag))[:, None, :]


def _perturbations(rng, n, d, delta):
    """Batched ``exp(-i delta G)`` for random Hermitian ``G``."""
    g = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    g = 0.5 * (g + g.conj().swapaxes(-1, -2))
    w, v = np.linalg.eigh(g)
    scale = np.sqrt(np.mean(w ** 2, axis=1, keepdims=True))
    phases = np.exp(-1j * delta * w / np.maximum(scale, 1e-30))
    return np.einsum("nij,nj,nkj->nik", v, phases, v.conj())


def _random_masks(rng, n, d):
    """Nonempty, non-full boolean masks, vectorized with a retry loop."""
    masks = rng.random((n, d)) < 0.5
    for _ in range(64):
        ones = masks.sum(axis=1)
        bad = (ones == 0) | (ones == d)
        if not bad.any():
            break
        masks[bad] = rng.random((int(bad.sum()), d)) < 0.5
    else:
        masks[bad, 0] = True
        masks[bad, 1:] = False
    return masks


@dataclass
class Batch:
    """One chunk of instances with all derived arrays."""

    dim: int
    seed: int
    chunk: int
    size: int
    psi: np.ndarray           # (N, d)
    unitaries: dict           # tag -> (N, d, d); tags 0..3
    masks: dict               # name -> (N, d) boolean
    symmetric: np.ndarray     # (N,) flag: mirror-weight instances
    tiny: float               # designed low-cell amplitude for symmetric part

    def sset(self, tag: int, mask_name: str) -> np.ndarray:
        u = self.unitaries[tag]
        mask = self.masks[mask_name]
        moved = np.einsum("nij,nj->ni", u, self.psi)
        return np.einsum("nji,nj->ni", u.conj(), np.where(mask, moved, 0.0))

    def born(self, tag: int) -> np.ndarray:
        return np.abs(np.einsum("nij,nj->ni", self.unitaries[tag], self.psi)) ** 2


def _norm2(v: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(v) ** 2, axis=-1)


def make_batch(dim: int, size: int, seed: int, chunk: int,
               delta: float = 0.05, tiny: float = 0.05) -> Batch:
    """Build one deterministic chunk of random instances."""
    rng = _chunk_rng(seed, dim, chunk)
    u0 = _haar_unitaries(rng, size, dim)
    unitaries = {
        0: u0,
        1: np.einsum("nij,njk->nik", u0, _perturbations(rng, size, dim, delta)),
        2: _haar_unitaries(rng, size, dim),
        3: np.einsum("nij,njk->nik", u0, _perturbations(rng, size, dim, delta)),
    }

    # target Born-frame vectors at tag 0; alternate instances are
    # mirror-symmetric with two designed low-weight cells (one per half)
    # when the dimension allows it
    phi = _haar_states(rng, size, dim)
    symmetric = np.zeros(size, dtype=bool)
    if dim >= 4:
        symmetric[1::2] = True
        half = dim // 2
        mags = np.abs(phi[symmetric, :half])
        mags[:, half - 1] = tiny
        phases = np.exp(2j * np.pi * rng.random((int(symmetric.sum()), dim)))
        sym = np.concatenate([mags, mags], axis=1) * phases
        phi[symmetric] = sym / np.linalg.norm(sym, axis=1, keepdims=True)
    psi = np.einsum("nji,nj->ni", u0.conj(), phi)

    masks = {
        "A": _random_masks(rng, size, dim),
        "B": _random_masks(rng, size, dim),
        "C": _random_masks(rng, size, dim),
        "D": _random_masks(rng, size, dim),
    }
    half = dim // 2
    left = np.zeros((size, dim), dtype=bool)
    left[:, :half] = True
    masks["L"] = left
    masks["R"] = ~left
    # L plus the designed low cell of the right half, and the mirror
    lp = left.copy()
    lp[:, dim - 1] = True
    masks["L+"] = lp
    rp = ~left
    rp = rp.copy()
    rp[:, half - 1] = True
    masks["R+"] = rp
    # A with the lowest Born-weight cell (at tag 0) toggled
    born0 = np.abs(phi) ** 2
    flip = np.argmin(born0, axis=1)
    a_flip = masks["A"].copy()
    a_flip[np.arange(size), flip] ^= True
    ones = a_flip.sum(axis=1)
    bad = (ones == 0) | (ones == dim)
    a_flip[bad] = masks["A"][bad]
    masks["A_f"] = a_flip

    return Batch(dim, seed, chunk, size, psi, unitaries, masks, symmetric, tiny)


# --------------------------------------------------------------------------
# check evaluation; each evaluator returns per-instance lhs/rhs arrays

def _rel_violation(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        return (lhs - rhs) / np.maximum(1.0, np.abs(rhs))


def _mutual_arrays(v1, v2):
    d = _norm2(v1 - v2)
    n1, n2 = _norm2(v1), _norm2(v2)
    return d, n1, n2


def _chain_rows(d, n1, n2):
    """m1, m2, m3 and branch-bound rows (quantum norm arithmetic)."""
    nmax = np.maximum(n1, n2)
    nmin = np.minimum(n1, n2)
    nmean = 0.5 * (n1 + n2)
    ok = nmin > DENOM_FLOOR
    m1 = np.where(ok, d / np.maximum(nmax, DENOM_FLOOR), np.nan)
    m2 = np.where(ok, d / np.maximum(nmean, DENOM_FLOOR), np.nan)
    m3 = np.where(ok, d / np.maximum(nmin, DENOM_FLOOR), np.nan)
    return m1, m2, m3, ok


def eval_inequalities(batch: Batch, rng_salt_extra=None) -> dict:
    """All inequality rows for one batch: name -> (lhs, rhs, valid)."""
    out = {}
    size = batch.size

    # probabilistic chain and sandwich on synthetic finite measure spaces
    rng = _chunk_rng(batch.seed, batch.dim, batch.chunk, salt=1)
    m_elems = 8
    weights = rng.random((size, m_elems)) + 1e-3
    pa = _random_masks(rng, size, m_elems)
    pb = _random_masks(rng, size, m_elems)
    mu = weights / weights.sum(axis=1, keepdims=True)
    mu_a = np.sum(np.where(pa, mu, 0.0), axis=1)
    mu_b = np.sum(np.where(pb, mu, 0.0), axis=1)
    mu_sym = np.sum(np.where(pa ^ pb, mu, 0.0), axis=1)
    mu_bna = np.sum(np.where(pb & ~pa, mu, 0.0), axis=1)
    mu_anb = np.sum(np.where(pa & ~pb, mu, 0.0), axis=1)
    p1 = mu_sym / np.maximum(mu_a, mu_b)
    p2 = mu_sym / (0.5 * (mu_a + mu_b))
    p3 = mu_sym / np.minimum(mu_a, mu_b)
    order = np.maximum(p1 - p2, p2 - p3)
    out["prob_chain_order"] = (order, np.zeros(size), np.ones(size, bool))
    branch = p1 <= 0.5
    pbound = np.where(branch, p1 / np.maximum(1.0 - p1, 1e-30), np.inf)
    out["prob_chain_upper"] = (np.where(branch, p3, 0.0), pbound, branch)
    out["prob_chain_two_m1"] = (pbound, np.where(branch, 2.0 * p1, np.inf), branch)
    rsum = mu_bna / mu_b + mu_anb / mu_a
    out["prob_sandwich_lower"] = (p1, rsum, np.ones(size, bool))
    sand_ok = p1 < 1.0
    out["prob_sandwich_upper"] = (
        np.where(sand_ok, rsum, 0.0),
        np.where(sand_ok, p1 / np.maximum(1.0 - p1, 1e-30), np.inf), sand_ok)

    # quantum chain on a near pair (perturbed tag) and a generic pair
    for label, (sa, sb) in (("near", ((0, "A"), (1, "A"))),
                            ("generic", ((0, "A"), (2, "B")))):
        v1 = batch.sset(*sa)
        v2 = batch.sset(*sb)
        d, n1, n2 = _mutual_arrays(v1, v2)
        m1, m2, m3, ok = _chain_rows(d, n1, n2)
        out[f"quantum_chain_order_{label}"] = (
            np.where(ok, np.maximum(m1 - m2, m2 - m3), 0.0),
            np.zeros(size), ok)
        branch = ok & (m1 <= 0.08)
        qb = np.where(branch, m1 / np.maximum((1.0 - np.sqrt(m1)) ** 2, 1e-30),
                      np.inf)
        out[f"quantum_chain_upper_{label}"] = (
            np.where(branch, m3, 0.0), qb, branch)
        out[f"quantum_chain_two_m1_{label}"] = (
            qb, np.where(branch, 2.0 * m1, np.inf), branch)

    # triangle-style bound: S1=(0,A), S2=(2,B), S3=(1,C)
    v1 = batch.sset(0, "A")
    v2 = batch.sset(2, "B")
    v3 = batch.sset(1, "C")
    d12, n1, n2 = _mutual_arrays(v1, v2)
    d23, _, n3 = _mutual_arrays(v2, v3)
    d13 = _norm2(v1 - v3)
    ok = (np.minimum(n1, n2) > DENOM_FLOOR) & (np.minimum(n2, n3) > DENOM_FLOOR) \
        & (np.maximum(n1, n3) > DENOM_FLOOR)
    m13 = d13 / np.maximum(np.maximum(n1, n3), DENOM_FLOOR)
    m3_12 = d12 / np.maximum(np.minimum(n1, n2), DENOM_FLOOR)
    m3_23 = d23 / np.maximum(np.minimum(n2, n3), DENOM_FLOOR)
    rhs = (np.sqrt(m3_12) + np.sqrt(m3_23)) ** 2
    out["ine1"] = (np.where(ok, m13, 0.0), np.where(ok, rhs, np.inf), ok)

    # intersection/union bounds and the underlying identity:
    # S1=(0,A), S1'=(0,B), S2=(2,C)
    va = batch.sset(0, "A")
    vb = batch.sset(0, "B")
    batch.masks["_and"] = batch.masks["A"] & batch.masks["B"]
    batch.masks["_or"] = batch.masks["A"] | batch.masks["B"]
    v_and = batch.sset(0, "_and")
    v_or = batch.sset(0, "_or")
    vc = batch.sset(2, "C")
    na, nb, nc = _norm2(va), _norm2(vb), _norm2(vc)
    d_ac, d_bc = _norm2(va - vc), _norm2(vb - vc)
    ok = (np.minimum(na, nc) > DENOM_FLOOR) & (np.minimum(nb, nc) > DENOM_FLOOR)
    rhs2 = (d_ac / np.maximum(np.minimum(na, nc), DENOM_FLOOR)
            + d_bc / np.maximum(np.minimum(nb, nc), DENOM_FLOOR))
    for tag, vv in (("cap", v_and), ("cup", v_or)):
        nn = _norm2(vv)
        okk = ok & (np.maximum(nn, nc) > DENOM_FLOOR)
        lhs = _norm2(vv - vc) / np.maximum(np.maximum(nn, nc), DENOM_FLOOR)
        out[f"ine2_{tag}"] = (np.where(okk, lhs, 0.0),
                              np.where(okk, rhs2, np.inf), okk)
    ident = np.abs(_norm2(v_or - vc) + _norm2(v_and - vc) - d_ac - d_bc)
    out["ine2_identity"] = (ident, np.zeros(size), np.ones(size, bool))

    # equal-time overlap bound: S=(2,A), S'=(2,B)
    born2 = batch.born(2)
    mu_a2 = np.sum(np.where(batch.masks["A"], born2, 0.0), axis=1)
    mu_b2 = np.sum(np.where(batch.masks["B"], born2, 0.0), axis=1)
    mu_cap2 = np.sum(np.where(batch.masks["A"] & batch.masks["B"], born2, 0.0),
                     axis=1)
    mu_sym2 = np.sum(np.where(batch.masks["A"] ^ batch.masks["B"], born2, 0.0),
                     axis=1)
    nmin2 = np.minimum(mu_a2, mu_b2)
    ok = nmin2 > DENOM_FLOOR
    w = mu_cap2 / np.maximum(nmin2, DENOM_FLOOR)
    m3 = mu_sym2 / np.maximum(nmin2, DENOM_FLOOR)
    out["ine3"] = (np.where(ok, 1.0 - w, 0.0),
                   np.where(ok, 0.5 * m3, np.inf), ok)

    # Schwarz-based overlap propagation: pairs (0,A)/(0,B), (2,C)/(2,D)
    out.update(_ine4_rows(batch, ("A", "B"), ("C", "D"), 0, 2, "ine4"))
    # and the coefficient sanity rows on the symmetric half
    out.update(_ine4_coeff_rows(batch))
    return out


def _ine4_rows(batch: Batch, pair1, pair2, tag1, tag2, name) -> dict:
    a1, b1 = pair1
    a2, b2 = pair2
    v_s1 = batch.sset(tag1, a1)
    v_s1p = batch.sset(tag1, b1)
    v_s2 = batch.sset(tag2, a2)
    v_s2p = batch.sset(tag2, b2)
    n_s1, n_s1p = _norm2(v_s1), _norm2(v_s1p)
    n_s2, n_s2p = _norm2(v_s2), _norm2(v_s2p)

    born1 = batch.born(tag1)
    born2 = batch.born(tag2)
    cap1 = np.sum(np.where(batch.masks[a1] & batch.masks[b1], born1, 0.0), axis=1)
    cap2 = np.sum(np.where(batch.masks[a2] & batch.masks[b2], born2, 0.0), axis=1)
    min1 = np.minimum(n_s1, n_s1p)
    min2 = np.minimum(n_s2, n_s2p)
    ok = (min1 > DENOM_FLOOR) & (min2 > DENOM_FLOOR) \
        & (np.maximum(n_s1, n_s2) > DENOM_FLOOR) \
        & (np.maximum(n_s1p, n_s2p) > DENOM_FLOOR)
    w11 = cap1 / np.maximum(min1, DENOM_FLOOR)
    w22 = cap2 / np.maximum(min2, DENOM_FLOOR)
    m_12 = _norm2(v_s1 - v_s2) / np.maximum(np.maximum(n_s1, n_s2), DENOM_FLOOR)
    m_1p2p = _norm2(v_s1p - v_s2p) / np.maximum(np.maximum(n_s1p, n_s2p),
                                                DENOM_FLOOR)
    r_s1, r_s2 = np.sqrt(n_s1), np.sqrt(n_s2)
    r_s1p, r_s2p = np.sqrt(n_s1p), np.sqrt(n_s2p)
    a_coef = np.maximum(r_s1, r_s2) * r_s2p / np.maximum(min2, DENOM_FLOOR)
    b_coef = np.maximum(r_s1p, r_s2p) * r_s1 / np.maximum(min2, DENOM_FLOOR)
    c_coef = min1 / np.maximum(min2, DENOM_FLOOR)
    rhs = (a_coef * np.sqrt(m_12) + b_coef * np.sqrt(m_1p2p) + c_coef * w11)
    aux = "_" + name.lstrip("_")
    rows = {name: (np.where(ok, w22, 0.0), np.where(ok, rhs, np.inf), ok)}
    rows[aux + "_aux"] = (m_12, m_1p2p, ok)  # reused by implication rows
    rows[aux + "_coefs"] = (np.stack([a_coef, b_coef, c_coef]), w11, ok)
    rows[aux + "_w22"] = (w22, np.sqrt(n_s1 / np.maximum(n_s1p, DENOM_FLOOR)), ok)
    return rows


def _ine4_coeff_rows(batch: Batch) -> dict:
    """Coefficient sanity on symmetric instances: with equal first-pair
    norms and premise level e = max of the root typicalities, each of
    a, b, c must lie in [(1-e)^4, (1-e)^-4]."""
    rows = _ine4_rows(batch, ("L", "R"), ("L", "R"), 0, 1, "_sanity")
    m_12, m_1p2p, ok = rows["_sanity_aux"]
    coeffs, _w11, _ = rows["_sanity_coefs"]
    e = np.sqrt(np.maximum(m_12, m_1p2p))
    valid = ok & batch.symmetric & (e < 0.9)
    lo = (1.0 - e) ** 4
    hi = (1.0 - e) ** -4
    dev = np.maximum(np.maximum(lo[None, :] - coeffs, coeffs - hi[None, :]),
                     0.0).max(axis=0)
    return {"ine4_coefficients": (np.where(valid, dev, 0.0),
                                  np.zeros(batch.size), valid)}


def eval_implications(batch: Batch, eps: float) -> dict:
    """Implication rows at premise level ``eps``: name -> (premise_mask,
    conclusion, bound, valid)."""
    out = {}
    qc = quantum_chain_bound

    # transitivity through a shared middle s-set
    v1 = batch.sset(0, "A")
    v2 = batch.sset(1, "A")
    v3 = batch.sset(3, "A")
    d12, n1, n2 = _mutual_arrays(v1, v2)
    d23, _, n3 = _mutual_arrays(v2, v3)
    ok = (np.maximum(n1, n2) > DENOM_FLOOR) & (np.maximum(n2, n3) > DENOM_FLOOR) \
        & (np.maximum(n1, n3) > DENOM_FLOOR)
    m12 = d12 / np.maximum(np.maximum(n1, n2), DENOM_FLOOR)
    m23 = d23 / np.maximum(np.maximum(n2, n3), DENOM_FLOOR)
    m13 = _norm2(v1 - v3) / np.maximum(np.maximum(n1, n3), DENOM_FLOOR)
    premise = ok & (m12 <= eps) & (m23 <= eps)
    out["impli1"] = (premise, m13, np.full(batch.size, 4.0 * qc(eps)), ok)

    # intersection/union closure; generic family and designed-tiny family
    for label, (ra, rb, tag_mid) in (("generic", ("A", "A_f", 1)),
                                     ("tiny", ("L", "L+", 1))):
        va = batch.sset(0, ra)
        vb = batch.sset(0, rb)
        vm = batch.sset(tag_mid, ra)
        na, nb, nm = _norm2(va), _norm2(vb), _norm2(vm)
        ok = (np.maximum(na, nm) > DENOM_FLOOR) & (np.maximum(nb, nm) > DENOM_FLOOR)
        m_am = _norm2(va - vm) / np.maximum(np.maximum(na, nm), DENOM_FLOOR)
        m_bm = _norm2(vb - vm) / np.maximum(np.maximum(nb, nm), DENOM_FLOOR)
        premise = ok & (m_am <= eps) & (m_bm <= eps)
        if label == "tiny":
            premise &= batch.symmetric
        batch.masks["_i2and"] = batch.masks[ra] & batch.masks[rb]
        batch.masks["_i2or"] = batch.masks[ra] | batch.masks[rb]
        concl = np.zeros(batch.size)
        okc = ok.copy()
        for nm2 in ("_i2and", "_i2or"):
            vv = batch.sset(0, nm2)
            nn = _norm2(vv)
            okc &= np.maximum(nn, nm) > DENOM_FLOOR
            concl = np.maximum(
                concl, _norm2(vv - vm) / np.maximum(np.maximum(nn, nm),
                                                    DENOM_FLOOR))
        out[f"impli2_{label}"] = (premise & okc, concl,
                                  np.full(batch.size, 2.0 * qc(eps)), okc)

        # near-complete overlap of the two premise regions
        born0 = batch.born(0)
        mu_a = np.sum(np.where(batch.masks[ra], born0, 0.0), axis=1)
        mu_b = np.sum(np.where(batch.masks[rb], born0, 0.0), axis=1)
        mu_cap = np.sum(np.where(batch.masks[ra] & batch.masks[rb], born0, 0.0),
                        axis=1)
        nmin = np.minimum(mu_a, mu_b)
        ok_w = okc & (nmin > DENOM_FLOOR)
        w_ab = mu_cap / np.maximum(nmin, DENOM_FLOOR)
        m13_bound = 4.0 * qc(eps)
        bound3 = (0.5 * qc(m13_bound) if math.sqrt(m13_bound) < 1.0
                  else math.inf)
        out[f"impli3_{label}"] = (premise & ok_w, 1.0 - w_ab,
                                  np.full(batch.size, bound3), ok_w)

    # support propagation with root-scale premises (symmetric instances)
    rows = _ine4_rows(batch, ("L", "R"), ("L+", "R+"), 0, 1, "_impli4")
    m_12, m_1p2p, ok4 = rows["_impli4_aux"]
    w22, ratio, _ = rows["_impli4_w22"]
    _coeffs, w11, _ = rows["_impli4_coefs"]
    premise = (ok4 & batch.symmetric
               & (np.sqrt(m_12) <= eps) & (np.sqrt(m_1p2p) <= eps)
               & (w11 <= eps)
               & (ratio >= 1.0 - eps) & (ratio <= 1.0 / (1.0 - eps)))
    bound = 2.0 * eps / (1.0 - eps) ** 4 + w11 / (1.0 - eps) ** 2
    out["impli4"] = (premise, w22, bound, ok4)
    return out


# --------------------------------------------------------------------------
# suite drivers

def _iter_chunks(count: int):
    start = 0
    idx = 0
    while start < count:
        yield idx, min(CHUNK, count - start)
        start += CHUNK
        idx += 1


def _delta_for_eps(eps: float) -> float:
    # premise hits need m ~ eps (impli1..3) and m ~ eps^2 (impli4)
    return 0.25 * eps


def run_inequality_suite(cfg: SuiteConfig) -> SuiteReport:
    """Verify the published inequalities plus both normalization chains on
    random dense instances; violations become certificates."""
    checks: dict[str, CheckStats] = {}

    def one_chunk(dim: int, chunk: int, size: int) -> dict:
        batch = make_batch(dim, CHUNK, cfg.seed, chunk)
        rows = eval_inequalities(batch)
        local: dict[str, CheckStats] = {}
        for name, payload in rows.items():
            if name.startswith("_"):
                continue
            lhs, rhs, valid = (arr[:size] for arr in payload)
            stats = CheckStats()
            stats.evaluated = int(valid.sum())
            stats.skipped = int(size - stats.evaluated)
            viol = np.where(valid, _rel_violation(lhs, rhs), -np.inf)
            viol = np.where(np.isfinite(viol), viol, -np.inf)
            bad = viol > cfg.tolerance
            stats.violations = int(bad.sum())
            stats.max_violation = float(np.maximum(viol.max(initial=-np.inf),
                                                   0.0))
            for i in np.nonzero(bad)[0][:MAX_CERTIFICATES]:
                stats.certificates.append(_certificate(
                    "inequalities", name, dim, cfg.seed, chunk, int(i),
                    float(lhs[i]), float(rhs[i])))
            local[name] = stats
        return local

    _run_over_chunks(cfg, one_chunk, checks)
    passed = all(s.violations == 0 for s in checks.values())
    return SuiteReport("inequalities", _config_dict(cfg), checks, passed)


def run_implication_suite(cfg: SuiteConfig) -> SuiteReport:
    """Check that premise-satisfying instances meet the derived conclusion
    bounds, at every configured premise level."""
    checks: dict[str, CheckStats] = {}

    def one_chunk(dim: int, chunk: int, size: int) -> dict:
        local: dict[str, CheckStats] = {}
        for k, eps in enumerate(cfg.eps_levels):
            batch = make_batch(dim, CHUNK, cfg.seed, chunk + 1000 * (k + 1),
                               delta=_delta_for_eps(eps),
                               tiny=0.25 * eps)
            rows = eval_implications(batch, eps)
            for name, payload in rows.items():
                premise, concl, bound, valid = (
                    np.broadcast_to(arr, (CHUNK,))[:size] for arr in payload)
                stats = CheckStats()
                stats.evaluated = int(premise.sum())
                stats.vacuous = int((valid & ~premise).sum())
                stats.skipped = int((~valid).sum())
                viol = np.where(premise, _rel_violation(concl, bound), -np.inf)
                viol = np.where(np.isfinite(viol), viol, -np.inf)
                bad = viol > cfg.tolerance
                stats.violations = int(bad.sum())
                stats.max_violation = float(np.maximum(viol.max(initial=-np.inf),
                                                       0.0))
                for i in np.nonzero(bad)[0][:MAX_CERTIFICATES]:
                    stats.certificates.append(_certificate(
                        "implications", name, dim, cfg.seed,
                        chunk + 1000 * (k + 1), int(i),
                        float(concl[i]), float(bound[i]), eps=eps))
                local.setdefault(f"{name}@{eps:g}", CheckStats()).absorb(stats)
        return local

    _run_over_chunks(cfg, one_chunk, checks)
    checks["grid_ii1_ii2"] = _grid_packet_implications(cfg)
    passed = all(s.violations == 0 for s in checks.values())
    return SuiteReport("implications", _config_dict(cfg), checks, passed)


def _grid_packet_implications(cfg: SuiteConfig) -> CheckStats:
    """Packet-level overlap implications on a small separating-packet grid."""
    eps = 0.01
    grid = Grid.centered(256, 64.0)
    h = Hamiltonian("free")
    left = make_gaussian_packet(grid, -4.0, -2.0, 1.0)
    right = make_gaussian_packet(grid, 4.0, 2.0, 1.0)
    psi0 = (left + right).normalized()
    s1 = CSet(0.0, Region.left_of(grid, 0.0))
    profile = packet_overlap_profile(s1, np.linspace(0.0, 4.0, 16), psi0, h, eps)
    stats = CheckStats()
    for i in range(profile.times.size):
        stats.evaluated += 1
        w, m1 = float(profile.w[i]), float(profile.m_lower[i])
        checks = []
        if w <= eps:                       # forward: small overlap => small inf m
            checks.append(m1 - eps)
        if m1 <= eps:                      # backward: small inf m => bounded overlap
            checks.append(w - quantum_chain_bound(m1))
        for value in checks:
            if value > cfg.tolerance:
                stats.violations += 1
                stats.certificates.append(_certificate(
                    "implications", "grid_ii1_ii2", grid.n, cfg.seed, 0, i,
                    value, cfg.tolerance))
            stats.max_violation = max(stats.max_violation, max(value, 0.0))
    for witness in profile.support_witnesses:
        stats.evaluated += 1
        if not witness["ok"]:
            stats.violations += 1
            stats.certificates.append(_certificate(
                "implications", "grid_ii1_ii2", grid.n, cfg.seed, 0, -1,
                witness["leak"], witness["bound"]))
    return stats


def run_equal_time_reduction_suite(cfg: SuiteConfig) -> SuiteReport:
    """Quantum typicality of equal-time s-sets must match the probabilistic
    functions applied to the Born weights, for all four kinds."""
    checks: dict[str, CheckStats] = {}

    def one_chunk(dim: int, chunk: int, size: int) -> dict:
        batch = make_batch(dim, CHUNK, cfg.seed, chunk)
        born = batch.born(2)
        mask_a, mask_b = batch.masks["A"], batch.masks["B"]
        mu_a = np.sum(np.where(mask_a, born, 0.0), axis=1)
        mu_b = np.sum(np.where(mask_b, born, 0.0), axis=1)
        va = batch.sset(2, "A")
        vb = batch.sset(2, "B")
        na, nb = _norm2(va), _norm2(vb)
        rows = {}
        ok = (np.maximum(mu_a, mu_b) > DENOM_FLOOR)
        mu_sym = np.sum(np.where(mask_a ^ mask_b, born, 0.0), axis=1)
        rows["mutual"] = (
            _norm2(va - vb) / np.maximum(np.maximum(na, nb), DENOM_FLOOR),
            mu_sym / np.maximum(np.maximum(mu_a, mu_b), DENOM_FLOOR), ok)
        rows["absolute"] = (
            _norm2(va - batch.psi),
            1.0 - mu_a, np.ones(CHUNK, bool))
        ok_r = mu_b > DENOM_FLOOR
        mu_bna = np.sum(np.where(mask_b & ~mask_a, born, 0.0), axis=1)
        batch.masks["_red_cap"] = mask_a & mask_b
        v_cap = batch.sset(2, "_red_cap")
        rows["relative"] = (
            _norm2(v_cap - vb) / np.maximum(nb, DENOM_FLOOR),
            mu_bna / np.maximum(mu_b, DENOM_FLOOR), ok_r)
        ok_t = (mu_a + mu_b) > DENOM_FLOOR
        mu_cap = np.sum(np.where(mask_a & mask_b, born, 0.0), axis=1)
        tau_q = 2.0 * np.abs(np.real(np.sum(va.conj() * vb, axis=1))) \
            / np.maximum(na + nb, DENOM_FLOOR)
        rows["measure"] = (tau_q, 2.0 * mu_cap / np.maximum(mu_a + mu_b,
                                                            DENOM_FLOOR), ok_t)
        local: dict[str, CheckStats] = {}
        for name, payload in rows.items():
            q, p, valid = (arr[:size] for arr in payload)
            stats = CheckStats()
            stats.evaluated = int(valid.sum())
            stats.skipped = int(size - stats.evaluated)
            diff = np.where(valid, np.abs(q - p), 0.0)
            bad = diff > cfg.tolerance
            stats.violations = int(bad.sum())
            stats.max_violation = float(diff.max(initial=0.0))
            for i in np.nonzero(bad)[0][:MAX_CERTIFICATES]:
                stats.certificates.append(_certificate(
                    "equal-time-reduction", name, dim, cfg.seed, chunk,
                    int(i), float(q[i]), float(p[i])))
            local[name] = stats
        return local

    _run_over_chunks(cfg, one_chunk, checks)
    passed = all(s.violations == 0 for s in checks.values())
    return SuiteReport("equal-time-reduction", _config_dict(cfg), checks, passed)


def run_pathspace_diagnostics_suite(cfg: SuiteConfig) -> SuiteReport:
    """Classical-flow, equivariance and weighted-ensemble diagnostics.

    Monte Carlo checks run at three binomial standard deviations plus a
    1e-2 integrator tolerance; the occupation and memory bounds on random
    weighted ensembles are exact and use the configured tolerance.
    """
    from . import pathspace as ps

    checks: dict[str, CheckStats] = {}

    def record(name: str, excess: float, detail_ok: bool = True) -> None:
        stats = checks.setdefault(name, CheckStats())
        stats.evaluated += 1
        if excess > 0 or not detail_ok:
            stats.violations += 1
            stats.certificates.append(_certificate(
                "pathspace-diagnostics", name, 0, cfg.seed, 0,
                stats.evaluated - 1, excess, 0.0))
        stats.max_violation = max(stats.max_violation, max(excess, 0.0))

    rng = np.random.default_rng(cfg.seed)
    n_paths = max(cfg.count, 64)

    # harmonic flow: periodicity, Liouville transport, determinism probe
    system = ps.ClassicalSystem("harmonic", mass=1.0, omega=1.0)
    box = ps.PhaseSpaceBox(-1.0, 1.0, -0.5, 1.5)
    period = system.period
    times = np.array([1e-9, 0.25 * period, 0.5 * period, period])
    ens = ps.classical_ensemble(system, box, n_paths, times, cfg.seed)
    returned = np.abs(ens.positions[:, -1, :] - ens.positions[:, 0, :]).max()
    record("classical_period_return", returned - 1e-9 * period)

    cell = ps.PhaseSpaceBox(-0.5, 0.2, 0.1, 0.8)
    frac0 = ens.mask_weight(ens.member_mask(0, cell))
    sigma3 = 3.0 * math.sqrt(max(frac0 * (1 - frac0), 1e-12) / n_paths)
    for idx, t in enumerate(times):
        moved = _transported_box_mask(ens, system, cell, idx)
        record("classical_liouville", abs(ens.mask_weight(moved) - frac0) - sigma3)

    probe = ps.determinism_probe(ens, (0, cell), int(times.size - 1))
    record("classical_determinism", probe)

    # exact occupation bound on random weighted ensembles
    for k in range(8):
        size, steps = 32, 6
        w = rng.random(size) + 1e-3
        w /= w.sum()
        inside = rng.random((size, steps)) < 0.9
        pos = np.where(inside, 0.5, 2.5)
        e2 = ps.PathEnsemble(np.arange(steps, dtype=float), pos, w)
        region = ps.Interval(0.0, 1.0)
        miss = max(1.0 - float(w @ inside[:, j]) for j in range(steps))
        rep = ps.occupation_report(e2, region)
        record("occupation_mean", (1.0 - miss) - rep.pooled_mean - cfg.tolerance)
        record("occupation_variance", rep.pooled_variance - miss - cfg.tolerance)

    # hand-weighted memory condition example: the later knowledge set holds
    # weight 0.9 of which 0.4 did not come from the earlier set
    w3 = np.array([0.5, 0.4, 0.1])
    pos3 = np.array([[0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])
    e3 = ps.PathEnsemble(np.array([0.0, 1.0]), pos3, w3)
    r = ps.memory_report(e3, (0, ps.Interval(-0.5, 0.5)),
                         (1, ps.Interval(0.5, 1.5)))
    record("memory_example", abs(r - 0.4 / 0.9) - cfg.tolerance)

    passed = all(s.violations == 0 for s in checks.values())
    return SuiteReport("pathspace-diagnostics", _config_dict(cfg), checks, passed)


def _transported_box_mask(ens, system, box, time_index):
    """Membership in the flow-transported box, via the inverse flow."""
    pts = ens.positions[:, time_index, :]
    t = float(ens.times[time_index])
    back = system.flow(pts, -t)
    return box.contains(back)


def _run_over_chunks(cfg: SuiteConfig, one_chunk, checks: dict) -> None:
    jobs = [(dim, chunk, size)
            for dim in cfg.dims
            for chunk, size in _iter_chunks(cfg.count)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(lambda j: one_chunk(*j), jobs))
    else:
        results = [one_chunk(*j) for j in jobs]
    for local in results:
        for name, stats in local.items():
            checks.setdefault(name, CheckStats()).absorb(stats)


def _config_dict(cfg: SuiteConfig) -> dict:
    return {
        "dims": list(cfg.dims),
        "count": cfg.count,
        "seed": cfg.seed,
        "eps_levels": list(cfg.eps_levels),
        "tolerance": cfg.tolerance,
    }


def _certificate(suite, check, dim, seed, chunk, index, observed, bound,
                 eps=None) -> dict:
    cert = {
        "suite": suite,
        "check": check,
        "dim": dim,
        "seed": seed,
        "chunk": chunk,
        "index": index,
        "observed": observed,
        "bound": bound,
    }
    if eps is not None:
        cert["eps"] = eps
    return cert


def replay_certificate(cert: dict) -> dict:
    """Recompute the cited instance and report whether the observed value
    reproduces bit-exactly."""
    suite = cert["suite"]
    dim, seed = int(cert["dim"]), int(cert["seed"])
    chunk, index = int(cert["chunk"]), int(cert["index"])
    name = cert["check"]
    if suite == "inequalities":
        batch = make_batch(dim, CHUNK, seed, chunk)
        rows = eval_inequalities(batch)
        lhs, rhs, valid = rows[name]
        observed, bound = float(lhs[index]), float(rhs[index])
    elif suite == "implications":
        eps = float(cert["eps"])
        batch = make_batch(dim, CHUNK, seed, chunk,
                           delta=_delta_for_eps(eps), tiny=0.25 * eps)
        base = name.split("@")[0]
        rows = eval_implications(batch, eps)
        premise, concl, bound_arr, valid = rows[base]
        observed = float(concl[index])
        bound = float(np.broadcast_to(bound_arr, premise.shape)[index])
    elif suite == "equal-time-reduction":
        raise ConfigError("replay for the reduction suite cites raw values; "
                          "rerun the suite to reproduce them")
    else:
        raise ConfigError(f"unknown suite {suite!r} in certificate")
    return {
        "check": name,
        "observed": observed,
        "bound": bound,
        "matches": repr(observed) == repr(cert["observed"]),
    }
