"""Scenario ingestion, runners and report emission.

Scenarios are JSON configs validated up front; every run emits the fully
defaulted effective config, a CSV of metric series and a JSON report whose
verdicts each carry their epsilon and sampling schedule. Identical config
and seed produce byte-identical outputs except for the ``generated_at``
stamp, which is excluded from hashing and comparisons.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from . import pathspace as ps
from .asymptotics import (
    asymptotic_overlap_limit,
    convergence_profile,
    f_projector,
    optimal_velocity_region,
)
from .branching import (
    asymptotic_support_check,
    branch_verify,
    build_subtree,
    default_shrinkage_candidates,
    irreducible_check,
    subtree_support_scan,
)
from .csets import CSet, cset_vector
from .errors import ConfigError
from .grid import (
    Grid,
    GridState,
    Hamiltonian,
    Region,
    VelocityRegion,
    make_gaussian_packet,
    project,
    propagate,
)
from .overlap import overlapping_measure, packet_overlap_profile, splitting_region
from .quantum import quantum_mutual

SCENARIO_KINDS = ("packet_pair", "two_slit", "free_gaussian")


# --------------------------------------------------------------------------
# config validation

def _need(cfg: dict, key: str, typ, path: str):
    if key not in cfg:
        raise ConfigError(f"{path}.{key}: missing required field")
    val = cfg[key]
    if typ is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, typ):
        raise ConfigError(
            f"{path}.{key}: expected {getattr(typ, '__name__', typ)}, "
            f"got {type(val).__name__}")
    return val


def _default(cfg: dict, key: str, value):
    cfg.setdefault(key, value)
    return cfg[key]


def validate_scenario_config(cfg: dict) -> dict:
    """Validate and fill defaults; returns the effective config."""
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be a JSON object")
    cfg = json.loads(json.dumps(cfg))      # deep copy, JSON-clean
    name = _need(cfg, "name", str, "config")
    kind = _need(cfg, "kind", str, "config")
    if kind not in SCENARIO_KINDS:
        raise ConfigError(
            f"config.kind: unknown scenario kind {kind!r}; "
            f"expected one of {SCENARIO_KINDS}")
    grid = _need(cfg, "grid", dict, "config")
    n = _need(grid, "n", int, "config.grid")
    length = _need(grid, "length", (int, float), "config.grid")
    if n < 2 or (n & (n - 1)) != 0:
        raise ConfigError(f"config.grid.n: must be a power of two >= 2, got {n}")
    if length <= 0:
        raise ConfigError("config.grid.length: must be positive")
    _default(cfg, "mass", 1.0)
    _default(cfg, "seed", 7)
    _default(cfg, "description", "")
    eps = _default(cfg, "eps", {})
    _default(eps, "scan", 0.01)
    _default(eps, "subtree", 0.02)
    _default(eps, "branch", 0.05)
    _default(eps, "asymptotic", 0.02)
    _default(eps, "lebesgue", 0.15)

    if kind == "packet_pair":
        packets = _need(cfg, "packets", list, "config")
        if len(packets) != 2:
            raise ConfigError("config.packets: need exactly two packets")
        for i, packet in enumerate(packets):
            for key in ("center", "momentum", "sigma"):
                _need(packet, key, (int, float), f"config.packets[{i}]")
        _need(cfg, "horizon", (int, float), "config")
        _default(cfg, "n_samples", 64)
        _default(cfg, "cut", 0.0)
        mode = _need(cfg, "mode", str, "config")
        if mode not in ("crossing", "separating"):
            raise ConfigError("config.mode: expected 'crossing' or 'separating'")
        if mode == "crossing":
            window = _need(cfg, "crossing_window", list, "config")
            if len(window) != 2 or not window[0] < window[1]:
                raise ConfigError(
                    "config.crossing_window: expected [t_lo, t_hi] with t_lo < t_hi")
            _need(cfg, "post_time", (int, float), "config")
        bohm = _default(cfg, "bohmian", {})
        _default(bohm, "n_paths", 512)
        _default(bohm, "dt", 0.004)
        _default(bohm, "n_record", 33)
    elif kind == "two_slit":
        slits = _need(cfg, "slits", dict, "config")
        _need(slits, "separation", (int, float), "config.slits")
        _need(slits, "sigma", (int, float), "config.slits")
        env = _need(cfg, "environment_packet", dict, "config")
        for key in ("center", "momentum", "sigma"):
            _need(env, key, (int, float), "config.environment_packet")
        _need(cfg, "region_halfwidth", (int, float), "config")
        _default(cfg, "shrink_fractions", [0.02, 0.05, 0.25, 0.5])
    else:  # free_gaussian
        packet = _need(cfg, "packet", dict, "config")
        for key in ("center", "momentum", "sigma"):
            _need(packet, key, (int, float), "config.packet")
        _need(cfg, "horizon", (int, float), "config")
        _default(cfg, "n_samples", 40)
        _default(cfg, "threshold", 0.05)
    return cfg


def config_hash(effective: dict) -> str:
    canon = json.dumps(effective, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# --------------------------------------------------------------------------
# bundled scenario library

def builtin_scenario_names() -> list[str]:
    root = resources.files(__package__) / "scenario_configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_builtin_scenario(name: str) -> dict:
    root = resources.files(__package__) / "scenario_configs"
    path = root / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"unknown bundled scenario {name!r}; "
                          f"available: {builtin_scenario_names()}")
    return json.loads(path.read_text())


def load_scenario_file(path: str) -> dict:
    """Load a scenario config from a file path or a bundled name."""
    p = Path(path)
    if p.is_file():
        try:
            return json.loads(p.read_text())
        except json.JSONDecodeError as err:
            raise ConfigError(
                f"{path}:{err.lineno}:{err.colno}: malformed JSON ({err.msg})")
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    return load_builtin_scenario(stem)


# --------------------------------------------------------------------------
# emission helpers

def format_float(x: float) -> str:
    return repr(float(x))


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = zip(*columns)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_float(v) for v in row) + "\n")


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _verdict(name: str, passed: bool, value, eps, detail: str = "") -> dict:
    return {
        "name": name,
        "passed": bool(passed),
        "value": value,
        "eps": eps,
        "detail": detail,
    }


# --------------------------------------------------------------------------
# runners

def _sorted_throughout(xs: np.ndarray, tol: float = 1e-6) -> bool:
    """Initial ordering preserved at every output time, up to integrator
    tolerance (nearly coincident seeds may interleave at tiny scales)."""
    order = np.argsort(xs[:, 0], kind="stable")
    ranked = xs[order]
    return bool((np.diff(ranked, axis=0) >= -tol).all())


def _run_packet_pair(cfg: dict) -> tuple[dict, dict]:
    grid = Grid.centered(cfg["grid"]["n"], float(cfg["grid"]["length"]))
    h = Hamiltonian("free", mass=float(cfg["mass"]))
    packs = [make_gaussian_packet(grid, float(p["center"]), float(p["momentum"]),
                                  float(p["sigma"]))
             for p in cfg["packets"]]
    psi0 = (packs[0] + packs[1]).normalized()
    cut = float(cfg["cut"])
    horizon = float(cfg["horizon"])
    times = np.linspace(0.0, horizon, int(cfg["n_samples"]))
    eps = cfg["eps"]
    s1 = CSet(0.0, Region.left_of(grid, cut))
    verdicts = []

    profile = packet_overlap_profile(s1, times, psi0, h, eps=eps["scan"])
    scan = subtree_support_scan(s1, times, psi0, h, eps=eps["scan"])
    series = {
        "t": times,
        "w": profile.w,
        "m_lower": profile.m_lower,
        "m3_upper": profile.m3_upper,
        "born_left": np.array([project(propagate(psi0, h, float(t)),
                                       s1.region).norm_sq for t in times]),
    }

    sandwich_ok = bool(np.all(profile.m_lower <= profile.w + 1e-9)
                       and np.all(profile.w <= profile.m3_upper + 1e-9))
    verdicts.append(_verdict("overlap_sandwich", sandwich_ok,
                             float(np.max(profile.w - profile.m3_upper)), 1e-9,
                             "inf m <= w <= inf m3 at every sample"))
    witnesses_ok = all(w["ok"] for w in profile.support_witnesses)
    verdicts.append(_verdict(
        "support_witnesses", witnesses_ok, len(profile.support_witnesses),
        eps["scan"], "regime samples: best region is a support at the chain bound"))

    limit = asymptotic_overlap_limit(s1, psi0, h)
    verdicts.append(_verdict(
        "asymptotic_limit_match", abs(float(profile.w[-1]) - limit) <= 0.02,
        abs(float(profile.w[-1]) - limit), 0.02,
        "horizon overlap approaches the closed-form limit"))
    verdicts.append(_verdict(
        "asymptotic_support", asymptotic_support_check(s1, psi0, h,
                                                       eps["asymptotic"]),
        limit, eps["asymptotic"], "limit overlap within the regime"))

    mode = cfg["mode"]
    if mode == "crossing":
        lo, hi = (float(v) for v in cfg["crossing_window"])
        post = float(cfg["post_time"])
        inside = (times >= lo) & (times <= hi)
        after = times >= post
        verdicts.append(_verdict(
            "window_overlap_high", bool(np.all(profile.w[inside] > 0.5)),
            float(profile.w[inside].min()) if inside.any() else math.nan,
            0.5, f"w > 0.5 on [{lo}, {hi}]"))
        verdicts.append(_verdict(
            "post_overlap_low", bool(np.all(profile.w[after] < 0.01)),
            float(profile.w[after].max()) if after.any() else math.nan,
            0.01, f"w < 0.01 for t >= {post}"))
        s2 = CSet(horizon, Region.right_of(grid, cut))
        m_h = quantum_mutual(s1, s2, psi0, h).value
        verdicts.append(_verdict("mutual_horizon", m_h <= 0.02, m_h, 0.02,
                                 "m((0, left), (T, right))"))
        witness_times = [t for t, _ in scan.witnesses]
        mid = any(lo <= t <= hi for t in witness_times)
        verdicts.append(_verdict(
            "scan_fails_mid_crossing", (not scan.passed) and mid,
            scan.max_value, eps["scan"],
            "subtree-support scan must fail with witnesses inside the window"))
    else:
        verdicts.append(_verdict("scan_pass", scan.passed, scan.max_value,
                                 eps["scan"], "64-sample subtree-support scan"))
        tmap, subtree_rep = build_subtree(s1, times, psi0, h, eps=eps["subtree"])
        verdicts.append(_verdict("subtree_pass", subtree_rep.passed,
                                 subtree_rep.max_value, eps["subtree"],
                                 "all-pairs mutual typicality of tracked regions"))
        series["k_lebesgue"] = np.array([r.lebesgue for r in tmap.regions])
        series["k_center"] = np.array(
            [grid.x[r.mask].mean() if r.mask.any() else math.nan
             for r in tmap.regions])
        branch_rep = branch_verify(tmap, psi0, h, eps=eps["branch"])
        verdicts.append(_verdict("branch_pass", branch_rep.passed,
                                 branch_rep.max_value, eps["branch"],
                                 f"{len(branch_rep.warnings)} denominator warnings"))
        member_ok, member_worst = _members_are_supports(tmap, times, psi0, h,
                                                        eps["subtree"])
        verdicts.append(_verdict(
            "members_are_supports", member_ok, member_worst, eps["subtree"],
            "every tracked region passes its own suffix scan"))
        verdicts.append(_verdict(
            "member_asymptotic", asymptotic_support_check(
                tmap.cset(0), psi0, h, eps["asymptotic"]),
            None, eps["asymptotic"], "subtree-support is asymptotic too"))
        dis_ok, dis_worst = _disjoint_subtrees_stay_disjoint(
            s1, tmap, psi0, h)
        verdicts.append(_verdict(
            "disjoint_subtrees", dis_ok, dis_worst, None,
            "overlap of mirrored tracked regions under the root-scale bound"))
        cand = Region.from_interval(grid, -grid.length / 4.0, cut)
        irr = irreducible_check(s1, [s1.region, cand], psi0, h,
                                eps=eps["asymptotic"],
                                lebesgue_eps=eps["lebesgue"])
        verdicts.append(_verdict(
            "irreducible_counterexample", not irr.irreducible,
            irr.candidates[-1].get("lebesgue_ratio"), eps["lebesgue"],
            "half-width candidate refutes irreducibility"))

    bohm = cfg["bohmian"]
    rec = np.linspace(0.0, horizon, int(bohm["n_record"]))
    init = Region.left_of(grid, cut) if mode == "crossing" else None
    ens = ps.bohmian_ensemble(psi0, h, int(bohm["n_paths"]), rec,
                              int(cfg["seed"]), init_region=init,
                              dt=float(bohm["dt"]))
    xs = ens.positions[:, :, 0]
    if mode == "crossing":
        verdicts.append(_verdict(
            "bohmian_bounce", bool((xs < cut).all()), float(xs.max()), 0.0,
            "every left-seeded trajectory keeps x(t) < cut, pathwise"))
    verdicts.append(_verdict("bohmian_noncrossing", _sorted_throughout(xs),
                             None, None, "initial ordering preserved"))
    equi_ok, equi_worst = _ensemble_equivariance(ens, psi0, h, grid, cut, mode)
    verdicts.append(_verdict("equivariance", equi_ok, equi_worst, None,
                             "3 sigma binomial + 1e-2 integrator tolerance"))
    return series, {"verdicts": verdicts}


def _members_are_supports(tmap, times, psi0, h, eps) -> tuple[bool, float]:
    """Each tracked region must pass the scan over the remaining schedule."""
    worst = 0.0
    stride = max(1, times.size // 16)
    for i in range(0, times.size, stride):
        rep = subtree_support_scan(tmap.cset(i), times[i:], psi0, h, eps)
        worst = max(worst, rep.max_value)
        if not rep.passed:
            return False, worst
    return True, worst


def _disjoint_subtrees_stay_disjoint(s1, tmap, psi0, h) -> tuple[bool, float]:
    """Mirrored tracked regions stay non-overlapping at the derived bound.

    Premises are measured (root-scale, so the epsilon enters as sqrt of the
    mutual typicality); the conclusion bound is the coefficient-bound form.
    """
    s1c = CSet(s1.time, s1.region.complement())
    v1 = cset_vector(s1, psi0, h)
    v1c = cset_vector(s1c, psi0, h)
    w11 = overlapping_measure(v1, v1c)
    worst = 0.0
    ok = True
    stride = max(1, tmap.times.size // 16)
    for i in range(0, tmap.times.size, stride):
        t = float(tmap.times[i])
        k = tmap.regions[i]
        kc = Region(k.grid, ~k.mask)
        vk = cset_vector(CSet(t, k), psi0, h)
        vkc = cset_vector(CSet(t, kc), psi0, h)
        root_m = math.sqrt((v1 - vk).norm_sq / max(v1.norm_sq, vk.norm_sq))
        root_mc = math.sqrt((v1c - vkc).norm_sq / max(v1c.norm_sq, vkc.norm_sq))
        level = max(root_m, root_mc, w11, 1e-6)
        if level >= 0.5:
            ok = False
            continue
        bound = 2.0 * level / (1.0 - level) ** 4 + w11 / (1.0 - level) ** 2
        w_now = overlapping_measure(vk, vkc)
        worst = max(worst, w_now - bound)
        if w_now > bound + 1e-9:
            ok = False
    return ok, worst


def _ensemble_equivariance(ens, psi0, h, grid, cut, mode) -> tuple[bool, float]:
    """Equivariance of the ensemble against Born weights.

    Crossing mode seeds only the left half, so fractions compare against
    the Born weight conditioned on the left half (symmetric initial state).
    """
    worst = -math.inf
    ok = True
    probes = [Region.left_of(grid, cut - 4.0), Region.left_of(grid, cut - 1.0),
              Region.left_of(grid, cut + 3.0)]
    indices = [0, ens.times.size // 2, ens.times.size - 1]
    for idx in indices:
        evolved = propagate(psi0, h, float(ens.times[idx]))
        for region in probes:
            frac = ens.mask_weight(ens.member_mask(idx, region))
            if mode == "crossing":
                left = Region.left_of(grid, cut)
                born = 2.0 * project(evolved, region & left).norm_sq
            else:
                born = project(evolved, region).norm_sq
            sigma = math.sqrt(max(born * (1 - born), 0.0) / ens.n_paths)
            excess = abs(frac - born) - (3.0 * sigma + 1e-2)
            worst = max(worst, excess)
            if excess > 0:
                ok = False
    return ok, worst


def _run_two_slit(cfg: dict) -> tuple[dict, dict]:
    grid = Grid.centered(cfg["grid"]["n"], float(cfg["grid"]["length"]))
    h = Hamiltonian("free", mass=float(cfg["mass"]))
    sep = float(cfg["slits"]["separation"])
    sig = float(cfg["slits"]["sigma"])
    env = cfg["environment_packet"]
    slit_l = make_gaussian_packet(grid, -sep / 2.0, 0.0, sig)
    slit_r = make_gaussian_packet(grid, +sep / 2.0, 0.0, sig)
    far = make_gaussian_packet(grid, float(env["center"]),
                               float(env["momentum"]), float(env["sigma"]))
    psi0 = (0.5 * slit_l + 0.5 * slit_r + (1.0 / math.sqrt(2.0)) * far)
    psi0 = psi0.normalized()
    half = float(cfg["region_halfwidth"])
    region = Region.from_interval(grid, -half, half)
    s = CSet(0.0, region)
    eps = cfg["eps"]
    verdicts = []

    weight = cset_vector(s, psi0, h).norm_sq
    verdicts.append(_verdict("minority_weight", weight <= 0.5 + 1e-6, weight,
                             0.5, "both-slit region carries half the mass"))
    limit = asymptotic_overlap_limit(s, psi0, h)
    verdicts.append(_verdict(
        "asymptotic_support", asymptotic_support_check(s, psi0, h,
                                                       eps["asymptotic"]),
        limit, eps["asymptotic"], "both-slit region is recoverable at infinity"))
    cands = default_shrinkage_candidates(
        region, fractions=tuple(float(f) for f in cfg["shrink_fractions"]))
    irr = irreducible_check(s, cands, psi0, h, eps=eps["asymptotic"],
                            lebesgue_eps=eps["lebesgue"])
    verdicts.append(_verdict(
        "irreducible", irr.irreducible, len(irr.candidates),
        eps["asymptotic"], "no contained asymptotic support is properly smaller"))
    left_slit = Region.from_interval(grid, -half, 0.0)
    sub_limit = asymptotic_overlap_limit(CSet(0.0, left_slit), psi0, h)
    verdicts.append(_verdict(
        "which_slit_lost", sub_limit > 0.5, sub_limit, 0.5,
        "a single slit is not recoverable at infinity"))

    times = np.linspace(0.0, 2.0, 21)
    w_pair = []
    for t in times:
        a = propagate(slit_l, h, float(t))
        b = propagate(slit_r, h, float(t))
        w_pair.append(overlapping_measure(a, b))
    prof = packet_overlap_profile(s, times, psi0, h, eps=eps["asymptotic"])
    series = {"t": times, "w_slits_vs_environment": prof.w,
              "w_left_vs_right_slit": np.array(w_pair)}
    report = {"verdicts": verdicts,
              "candidates": [_jsonable(row) for row in irr.candidates]}
    return series, report


def _run_free_gaussian(cfg: dict) -> tuple[dict, dict]:
    grid = Grid.centered(cfg["grid"]["n"], float(cfg["grid"]["length"]))
    h = Hamiltonian("free", mass=float(cfg["mass"]))
    packet = cfg["packet"]
    psi = make_gaussian_packet(grid, float(packet["center"]),
                               float(packet["momentum"]), float(packet["sigma"]))
    horizon = float(cfg["horizon"])
    threshold = float(cfg["threshold"])
    times = np.linspace(horizon / cfg["n_samples"], horizon,
                        int(cfg["n_samples"]))
    dv = VelocityRegion.positive(grid, mass=float(cfg["mass"]))
    prof = convergence_profile(dv, psi, h, times, threshold)
    peak_v = float(packet["momentum"]) / float(cfg["mass"])
    dv_boundary = VelocityRegion.from_interval(grid, peak_v, math.inf,
                                               mass=float(cfg["mass"]))
    prof_boundary = convergence_profile(dv_boundary, psi, h, times, threshold)
    verdicts = [
        _verdict("converged", prof.converged and prof.final_distance <= threshold,
                 prof.t_converged, threshold,
                 "finite-time projector reaches the asymptotic one"),
        _verdict("boundary_case_flagged",
                 (not prof_boundary.converged)
                 or prof_boundary.final_distance > 2 * threshold,
                 prof_boundary.final_distance, threshold,
                 "velocity boundary on the momentum peak converges slowly"),
    ]
    f1 = f_projector(dv, math.inf, psi, h)
    f2 = f_projector(dv, math.inf, f1, h)
    verdicts.append(_verdict("idempotent", (f2 - f1).norm_sq <= 1e-12,
                             (f2 - f1).norm_sq, 1e-12, ""))
    other = make_gaussian_packet(grid, 2.0, -1.0, 2.0)
    herm = abs(other.inner(f1) - f_projector(dv, math.inf, other, h).inner(psi))
    verdicts.append(_verdict("hermitian", herm <= 1e-12, herm, 1e-12, ""))
    t_mid = horizon / 2.0
    comp = abs(f_projector(dv, t_mid, psi, h).norm_sq
               + f_projector(dv.complement(), t_mid, psi, h).norm_sq
               - psi.norm_sq)
    verdicts.append(_verdict("complement_decomposition", comp <= 1e-12, comp,
                             1e-12, "finite-time masks partition exactly"))
    commute = (propagate(f_projector(dv, math.inf, psi, h), h, 1.0)
               - f_projector(dv, math.inf, propagate(psi, h, 1.0), h)).norm_sq
    verdicts.append(_verdict("commutes_with_evolution", commute <= 1e-10,
                             commute, 1e-10, ""))
    best = optimal_velocity_region(CSet(0.0, Region.full(grid)), psi, h)
    recovered = f_projector(best, math.inf, psi, h).norm_sq
    verdicts.append(_verdict("full_region_velocity_support",
                             abs(recovered - 1.0) <= 1e-9, recovered, 1e-9,
                             "best velocity region recovers the whole state"))
    series = {"t": times, "distance": prof.distances,
              "distance_boundary": prof_boundary.distances}
    return series, {"verdicts": verdicts}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


_RUNNERS = {
    "packet_pair": _run_packet_pair,
    "two_slit": _run_two_slit,
    "free_gaussian": _run_free_gaussian,
}


def run_scenario(cfg: dict, out_dir: str | Path,
                 seed: int | None = None,
                 eps: float | None = None) -> dict:
    """Validate, run and emit one scenario; returns the report dict."""
    effective = validate_scenario_config(cfg)
    if seed is not None:
        effective["seed"] = int(seed)
    if eps is not None:
        effective["eps"]["scan"] = float(eps)
    digest = config_hash(effective)

    out = Path(out_dir) / effective["name"]
    out.mkdir(parents=True, exist_ok=True)
    series, payload = _RUNNERS[effective["kind"]](effective)

    header = list(series.keys())
    write_csv(out / "series.csv", header, [np.asarray(series[k]) for k in header])
    write_json(out / "effective_config.json", effective)

    verdicts = payload["verdicts"]
    report = {
        "run_id": f"{effective['name']}-{digest[:12]}-s{effective['seed']}",
        "config_hash": digest,
        "seed": effective["seed"],
        "schedule": {
            "n_samples": effective.get("n_samples"),
            "horizon": effective.get("horizon"),
        },
        "verdicts": [_jsonable(v) for v in verdicts],
        "passed": all(v["passed"] for v in verdicts),
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    for key, value in payload.items():
        if key != "verdicts":
            report[key] = _jsonable(value)
    write_json(out / "report.json", report)
    return report
