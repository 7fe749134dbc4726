"""File-based experiment pipeline: sample -> scan -> towers -> criterion -> report.

Every stage reads the artifacts of the previous one from the output
directory and writes its own.  Numerical outputs are pure functions of the
configuration: JSON is written with sorted keys and shortest round-trip
floats, sample randomness comes from ``SeedSequence(seed).spawn``, and
per-sample work is merged in sample order whatever the worker count.  The
only non-deterministic data (timestamps, worker count) goes to
``manifest.json``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import __version__
from .cocycle import (
    LogCocycle,
    cancellation_profile,
    is_odd,
    make_asymmetric_cocycle,
    make_log_cocycle,
    make_odd_cocycle,
    quasi_random,
)
from .errors import (
    BudgetExceeded,
    ConfigError,
    InvalidSuspension,
    StageDependencyError,
    StructuralError,
)
from .ergodicity import (
    case_letter,
    centers_in_tower,
    choose_eta,
    midpoint_identities,
    run_criterion,
    select_case,
    symmetry_profile,
    tightness_integral,
)
from .iet import Iet, golden_rotation, make_symmetric_permutation, random_lengths
from .involution import locate_center_shifts
from .numeric import decimal_string, parse_decimal, to_fraction, working_precision
from .quadrature import linear_phase_selftest
from .rauzy import first_return_bruteforce, height_ratio, in_theta, induce, scan_good_times
from .towers import audit_tower, build_Xi, check_partial_rigidity, measure_lower_bound

STAGES = ("sample", "scan", "towers", "criterion", "report")
UPSTREAM = {"scan": "sample", "towers": "scan", "criterion": "towers", "report": "criterion"}
FORMAT = "ietlab/1"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def load_schema() -> dict:
    text = resources.files("ietlab").joinpath("schemas/config.schema.json").read_text()
    return json.loads(text)


def _fill_defaults(config: dict, schema: dict) -> dict:
    out = dict(config)
    for key, sub in schema.get("properties", {}).items():
        if key not in out and "default" in sub:
            out[key] = sub["default"]
        if sub.get("type") == "object" and "properties" in sub:
            out[key] = _fill_defaults(out.get(key, {}), sub)
    return out


def validate_config(config: dict) -> dict:
    """Schema validation plus cross-field checks; returns the config with defaults."""
    schema = load_schema()
    try:
        jsonschema.validate(config, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    cfg = _fill_defaults(config, schema)
    d = cfg["d"]
    if cfg["lengths"] == "golden" and d != 2:
        raise ConfigError("golden lengths need d = 2")
    for key in ("lengths", "tau"):
        if isinstance(cfg[key], list) and len(cfg[key]) != d:
            raise ConfigError(f"'{key}' needs {d} entries")
    for key in ("cocycle", "contrast"):
        desc = cfg.get(key)
        if desc:
            for field in ("c", "C_plus", "C_minus", "g_poly"):
                if field in desc and len(desc[field]) != d:
                    raise ConfigError(f"'{key}.{field}' needs {d} entries")
    if cfg["delta"] == "auto":
        cfg["delta"] = 0.5 / (10 * d)
    elif not cfg["delta"] < 1 / (10 * d):
        raise ConfigError(f"delta must be below 1/(10d) = {1 / (10 * d)}")
    cfg.setdefault("cocycle", {"kind": "odd"})
    cfg.setdefault("contrast", {"kind": "asymmetric", "center": False})
    return cfg


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return validate_config(raw)


def config_digest(cfg: dict) -> str:
    """Hash of the validated config, ignoring where outputs go."""
    body = {k: v for k, v in cfg.items() if k != "output"}
    return hashlib.sha256(_dumps(body).encode()).hexdigest()


def build_cocycle(T: Iet, desc: dict) -> LogCocycle:
    kind = desc["kind"]
    ones = (1.0,) * T.d
    if kind == "odd":
        return make_odd_cocycle(T, desc.get("c", ones))
    if kind == "asymmetric":
        return make_asymmetric_cocycle(T, desc.get("c", ones), desc.get("center", False))
    return make_log_cocycle(T, desc["C_plus"], desc["C_minus"], desc.get("g_poly"),
                            desc.get("form", "global"))


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------

def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _clean(x):
    """JSON-safe copy: tuples to lists, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(_dumps(_clean(obj)))
    os.replace(tmp, path)


def _stage_file(out: Path, stage: str) -> Path:
    return out / stage / "index.json"


def read_stage(out: Path, stage: str, cfg: dict, needed_by: str) -> dict:
    path = _stage_file(out, stage)
    if not path.exists():
        raise StageDependencyError(f"stage '{needed_by}' needs '{stage}' output ({path}); "
                                   f"run `ietlab {stage}` first")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise StageDependencyError(f"{path} is corrupt: {exc}") from None
    if data.get("format") != FORMAT or data.get("stage") != stage:
        raise StageDependencyError(f"{path} has an unexpected format")
    if data.get("config") != config_digest(cfg):
        raise StageDependencyError(f"{path} was produced with a different config; "
                                   f"rerun `ietlab {stage}`")
    return data


def _read_part(out: Path, stage: str, name: str) -> dict:
    path = out / stage / name
    if not path.exists():
        raise StageDependencyError(f"missing {path}; rerun `ietlab {stage}`")
    return json.loads(path.read_text())


def update_manifest(out: Path, stage: str, cfg: dict, workers: int, precision: str) -> None:
    path = out / "manifest.json"
    data = json.loads(path.read_text()) if path.exists() else {}
    data[stage] = {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "config": config_digest(cfg),
        "workers": workers,
        "precision": precision,
    }
    write_json(path, data)


def _map(fn, args, workers: int):
    if workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*args)))


def _sample_name(i: int) -> str:
    return f"sample_{i:03d}.json"


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------

def sample_tau(perm, rng: np.random.Generator, budget: int):
    """Rejection sampling of an admissible ``tau`` with heights within ratio 3."""
    for tries in range(1, budget + 1):
        tau = tuple(float(v) for v in rng.normal(size=perm.d))
        if in_theta(perm, tau) and height_ratio(perm, tau) < 3:
            return tau, tries
    raise BudgetExceeded(f"no admissible tau in {budget} draws (d={perm.d})")


def make_sample(cfg: dict, index: int) -> dict:
    d = cfg["d"]
    child = np.random.SeedSequence(cfg["seed"]).spawn(cfg["samples"])[index]
    rng = np.random.default_rng(child)
    perm = make_symmetric_permutation(d)
    if cfg["lengths"] == "golden":
        T = golden_rotation()
    elif cfg["lengths"] == "random-simplex":
        T = Iet(perm, random_lengths(rng, d))
    else:
        T = Iet(perm, tuple(parse_decimal(str(v)) for v in cfg["lengths"]))
    if cfg["tau"] == "auto":
        tau, tries = sample_tau(perm, rng, cfg["rejection_budget"])
    else:
        tau, tries = tuple(float(parse_decimal(str(v))) for v in cfg["tau"]), 0
        if not in_theta(perm, tau):
            raise InvalidSuspension("configured tau is not admissible")
    return {
        "index": index,
        "iet": T.to_descriptor(),
        "tau": [decimal_string(v) for v in tau],
        "tau_draws": tries,
        "height_ratio": height_ratio(perm, tau),
        "cocycle": build_cocycle(T, cfg["cocycle"]).to_descriptor(),
        "contrast": build_cocycle(T, cfg["contrast"]).to_descriptor(),
    }


def cmd_sample(cfg: dict, out, workers: int = 1, precision: str = "double") -> dict:
    out = Path(out)
    n = cfg["samples"]
    parts = _map(make_sample, [(cfg, i) for i in range(n)], workers)
    for i, part in enumerate(parts):
        write_json(out / "sample" / _sample_name(i), part)
    index = {"format": FORMAT, "stage": "sample", "config": config_digest(cfg),
             "samples": [_sample_name(i) for i in range(n)]}
    write_json(_stage_file(out, "sample"), index)
    update_manifest(out, "sample", cfg, workers, precision)
    return index


def _load_sample(part: dict, precision: str = "double"):
    T = Iet.from_descriptor(part["iet"], precision)
    tau = tuple(float(parse_decimal(s)) for s in part["tau"])
    Tf = Iet.from_descriptor(part["iet"])
    phi = LogCocycle.from_descriptor(Tf, part["cocycle"])
    contrast = LogCocycle.from_descriptor(Tf, part["contrast"])
    return T, Tf, tau, phi, contrast


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------

def oracle_check(T: Iet, depth: int) -> dict:
    """Induced lengths and return times against the brute-force first return.

    The oracle runs in exact rational arithmetic on the same lengths, so its
    pieces carry no rounding of their own.
    """
    exact = Iet(T.perm, tuple(to_fraction(v) for v in T.lengths))
    worst = 0.0
    times_ok = True
    checked = 0
    for n in range(depth + 1):
        st = induce(T, n)
        fr = first_return_bruteforce(exact, induce(exact, n).total)
        ind = st.induced()
        order = list(ind.perm.top)
        times = [st.q[a] for a in order]
        lens = [float(st.lengths[a]) for a in order]
        if len(fr.pieces) != len(order) or fr.times != times:
            times_ok = False
            break
        rel = max(abs(float(a) - b) / b for a, b in zip(fr.lengths, lens))
        worst = max(worst, rel)
        checked = n
    return {"depth": checked, "times_ok": times_ok, "max_rel_length": worst,
            "ok": times_ok and worst <= 1e-12}


def symmetry_check(T: Iet, phi: LogCocycle, n: int, points: int) -> dict:
    """Reflection and midpoint identity residuals (odd cocycles only)."""
    verdict = is_odd(phi, T)
    if not verdict.ok:
        return {"applicable": False}
    worst = 0.0
    clipped = 0
    scale = np.maximum(np.arange(n + 1), 1)
    for x in quasi_random(points, 0.3) * float(T.total):
        res, clip = symmetry_profile(T, phi, x, n)
        good = ~clip
        clipped += int(clip.sum())
        if good.any():
            worst = max(worst, float((res[good] / scale[good]).max()))
    mids = midpoint_identities(T, phi, n)
    mid_worst = max((m.max_scaled for m in mids if not math.isnan(m.max_scaled)), default=0.0)
    return {"applicable": True, "n": n, "reflection_max_scaled": worst,
            "midpoint_max_scaled": mid_worst, "clipped": clipped,
            "ok": max(worst, mid_worst) <= 1e-10}


def scan_sample(cfg: dict, part: dict, precision: str) -> dict:
    with working_precision(precision):
        T, Tf, tau, phi, _ = _load_sample(part, precision)
        case = select_case(phi)
        alpha = case_letter(T.perm, case)
        starts = list(quasi_random(cfg["cancellation"]["points"]) * float(Tf.total))
        M_hat = cancellation_profile(Tf, phi, starts, cfg["cancellation"]["r"])
        if cfg["eta"] == "auto":
            eta = choose_eta(phi.C_plus, phi.C_minus, case, M_hat, T.perm)
        else:
            eta = float(cfg["eta"])
        sc = scan_good_times(T, tau, cfg["nu"], cfg["delta"], cfg["horizon"], q_cap=cfg["q_cap"])
        good = [r.n for r in sc.good_times(alpha)]
        checks = {
            "oracle": oracle_check(Tf, min(cfg["checks"]["oracle_depth"], cfg["horizon"])),
            "symmetry": symmetry_check(Tf, phi, cfg["checks"]["symmetry_n"],
                                       cfg["checks"]["symmetry_points"]),
        }
    return {
        "index": part["index"], "case": case, "alpha": alpha, "M_hat": M_hat, "eta": eta,
        "delta": cfg["delta"], "nu": cfg["nu"],
        "records": [r.to_record() for r in sc.records],
        "degenerate_at": sc.degenerate_at, "capped_at": sc.capped_at,
        "good_times": good, "checks": checks,
    }


def _stage_parts(out: Path, stage: str, cfg: dict, needed_by: str):
    index = read_stage(out, stage, cfg, needed_by)
    return [_read_part(out, stage, name) for name in index["samples"]]


def _write_stage(out: Path, stage: str, cfg: dict, parts: list, workers: int, precision: str,
                 extra: Optional[dict] = None) -> dict:
    names = []
    for part in parts:
        name = _sample_name(part["index"])
        write_json(out / stage / name, part)
        names.append(name)
    index = {"format": FORMAT, "stage": stage, "config": config_digest(cfg), "samples": names}
    index.update(extra or {})
    write_json(_stage_file(out, stage), index)
    update_manifest(out, stage, cfg, workers, precision)
    return index


def cmd_scan(cfg: dict, out, workers: int = 1, precision: str = "double") -> dict:
    out = Path(out)
    samples = _stage_parts(out, "sample", cfg, "scan")
    parts = _map(scan_sample, [(cfg, p, precision) for p in samples], workers)
    return _write_stage(out, "scan", cfg, parts, workers, precision, {"precision": precision})


# ---------------------------------------------------------------------------
# towers
# ---------------------------------------------------------------------------

def towers_sample(cfg: dict, part: dict, scan: dict, precision: str) -> dict:
    with working_precision(precision):
        T, Tf, tau, _, _ = _load_sample(part, precision)
        alpha, eta = scan["alpha"], scan["eta"]
        entries, reports = [], []
        for n in scan["good_times"]:
            st = induce(T, n, tau)
            try:
                Xi = build_Xi(T, st, alpha, eta)
            except StructuralError as exc:
                # a floor crossing a discontinuity is itself a failed claim
                entries.append({"n": n, "error": str(exc), "anchor_candidates": []})
                continue
            rep = audit_tower(Xi, T, st, scan["delta"])
            reports.append(rep)
            stf = induce(Tf, n, tau)
            shifts = locate_center_shifts(Tf, stf, tau)
            anchors = centers_in_tower(Tf, stf, alpha)
            entries.append({"n": n, "tower": Xi.to_dict(), "audit": rep.to_dict(),
                            "centers": shifts.to_dict(),
                            "anchor_candidates": [[str(lab), fl] for lab, _, fl in anchors]})
        floor = measure_lower_bound(eta, scan["nu"], T.d, float(T.total))
        trend = check_partial_rigidity(reports, floor)
    return {"index": part["index"], "alpha": alpha, "eta": eta, "towers": entries,
            "trend": {"verdict": trend.verdict, "measure_floor": floor,
                      "measures": trend.measures, "sym_diffs": trend.sym_diffs,
                      "sup_disps": trend.sup_disps, "detail": trend.detail}}


def cmd_towers(cfg: dict, out, workers: int = 1, precision: str = "double") -> dict:
    out = Path(out)
    samples = _stage_parts(out, "sample", cfg, "towers")
    scans = _stage_parts(out, "scan", cfg, "towers")
    args = [(cfg, p, s, precision) for p, s in zip(samples, scans)]
    parts = _map(towers_sample, args, workers)
    return _write_stage(out, "towers", cfg, parts, workers, precision)


# ---------------------------------------------------------------------------
# criterion
# ---------------------------------------------------------------------------

def criterion_times(towers: dict, limit: int) -> list:
    """Good times whose tower over ``alpha`` contains an original center."""
    return [e["n"] for e in towers["towers"] if e["anchor_candidates"]][:limit]


def criterion_one(cfg: dict, part: dict, scan: dict, n: int) -> dict:
    _, T, tau, phi, contrast = _load_sample(part)
    st = induce(T, n, tau)
    Xi = build_Xi(T, st, scan["alpha"], scan["eta"])
    rep = run_criterion(T, phi, st, Xi, cfg["ks"], scan["M_hat"], scan["delta"],
                        derivative=cfg["derivative_bounds"])
    c_val, c_err = tightness_integral(T, contrast, Xi)
    out = rep.to_dict()
    out.update({
        "sample": part["index"],
        "tightness_bound": rep.tightness_bound,
        "tightness_ok": rep.tightness_ok(),
        "k_threshold": rep.oscillation_ok(),
        "contrast": {"tightness": c_val, "tightness_err": c_err,
                     "mean_abs": c_val / rep.measure},
    })
    return out


def cmd_criterion(cfg: dict, out, workers: int = 1, precision: str = "double") -> dict:
    out = Path(out)
    samples = _stage_parts(out, "sample", cfg, "criterion")
    scans = _stage_parts(out, "scan", cfg, "criterion")
    towers = _stage_parts(out, "towers", cfg, "criterion")
    jobs = []
    for p, s, t in zip(samples, scans, towers):
        for n in criterion_times(t, cfg["max_criterion_times"]):
            jobs.append((cfg, p, s, n))
    results = _map(criterion_one, jobs, workers)
    by_sample = {p["index"]: [] for p in samples}
    for r in results:
        by_sample[r["sample"]].append(r)
    parts = [{"index": i, "reports": reps} for i, reps in sorted(by_sample.items())]
    selftest = linear_phase_selftest(range(1, max(cfg["ks"] + [1000]) + 1))
    return _write_stage(out, "criterion", cfg, parts, workers, "double",
                        {"quadrature_selftest": selftest})


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _strictly_increasing(values) -> bool:
    return len(values) >= 2 and all(b > a for a, b in zip(values, values[1:]))


def _line(name: str, ok: Optional[bool], detail: str) -> str:
    tag = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    return f"[{tag}] {name}: {detail}"


def summarize(scans, towers, crits, selftest: float) -> list:
    lines = []
    oracle = [s["checks"]["oracle"] for s in scans]
    lines.append(_line("induction oracle", all(o["ok"] for o in oracle),
                       f"max rel length err {max(o['max_rel_length'] for o in oracle):.2e}"))
    sym = [s["checks"]["symmetry"] for s in scans if s["checks"]["symmetry"]["applicable"]]
    lines.append(_line("symmetry identities", all(x["ok"] for x in sym) if sym else None,
                       f"{len(sym)} odd-cocycle sample(s); max residual/n "
                       f"{max((max(x['reflection_max_scaled'], x['midpoint_max_scaled']) for x in sym), default=0):.2e}"))
    entries = [e for t in towers for e in t["towers"]]
    passed = sum(1 for e in entries if "audit" in e and e["audit"]["claims_ok"])
    lines.append(_line("tower claims", passed == len(entries) if entries else None,
                       f"{passed}/{len(entries)} towers pass"))
    extended = sum(1 for e in entries if "audit" in e and e["audit"]["all_ok"])
    lines.append(_line("tower extended checks", extended == len(entries) if entries else None,
                       f"{extended}/{len(entries)} towers also pass orbit disjointness, "
                       f"continuity, gap structure and alternation"))
    cs = [e["centers"] for e in entries if "centers" in e]
    nonneg = [c["nonnegative_ok"] for c in cs if c["forward_condition"]]
    lines.append(_line("center matching", all(c["set_equality"] for c in cs) and all(nonneg) if cs else None,
                       f"set equality {sum(c['set_equality'] for c in cs)}/{len(cs)}, "
                       f"nonnegative under the sign condition {sum(nonneg)}/{len(nonneg)}"))
    lines.append(_line("quadrature self-test", selftest <= 1e-12, f"max |int exp(2 pi i k x)| = {selftest:.2e}"))
    reps = [r for c in crits for r in c["reports"]]
    if reps:
        lines.append(_line("criterion tightness", all(r["tightness_ok"] for r in reps),
                           f"{sum(r['tightness_ok'] for r in reps)}/{len(reps)} below D' + |anchor| + err"))
        ks = [r["k_threshold"] for r in reps]
        lines.append(_line("criterion oscillation", all(k is not None and k <= 1000 for k in ks),
                           f"K per good time {ks}"))
        inc, inc_mean = [], []
        for c in crits:
            if len(c["reports"]) >= 2:
                inc.append(_strictly_increasing([r["contrast"]["tightness"] for r in c["reports"]]))
                inc_mean.append(_strictly_increasing([r["contrast"]["mean_abs"] for r in c["reports"]]))
        lines.append(_line("contrast tightness increasing", all(inc) if inc else None,
                           f"{sum(inc)}/{len(inc)} samples"))
        lines.append(_line("contrast mean |S_h| increasing (normalized by Leb(Xi))",
                           all(inc_mean) if inc_mean else None, f"{sum(inc_mean)}/{len(inc_mean)} samples"))
    else:
        lines.append(_line("criterion", None, "no good time with an anchored tower"))
    return lines


def cmd_report(cfg: dict, out, workers: int = 1, precision: str = "double") -> dict:
    out = Path(out)
    scans = _stage_parts(out, "scan", cfg, "report")
    towers = _stage_parts(out, "towers", cfg, "report")
    crit_index = read_stage(out, "criterion", cfg, "report")
    crits = [_read_part(out, "criterion", name) for name in crit_index["samples"]]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["sample", "n", "alpha", "q_alpha", "h", "measure", "eta", "tightness", "tightness_err",
            "tightness_bound", "anchor_value", "k_threshold", "contrast_tightness", "contrast_mean_abs"]
    w.writerow(cols)
    osc = io.StringIO()
    wo = csv.writer(osc, lineterminator="\n")
    wo.writerow(["sample", "n", "k", "modulus", "err", "measure"])
    for c in crits:
        for r in c["reports"]:
            w.writerow([r["sample"], r["n"], r["alpha"], r["q_alpha"], r["h"], repr(r["measure"]),
                        repr(r["eta_used"]), repr(r["tightness"]), repr(r["tightness_err"]),
                        repr(r["tightness_bound"]), "" if r["anchor"]["value"] is None else repr(r["anchor"]["value"]),
                        "" if r["k_threshold"] is None else r["k_threshold"],
                        repr(r["contrast"]["tightness"]), repr(r["contrast"]["mean_abs"])])
            for o in r["oscillation"]:
                wo.writerow([r["sample"], r["n"], o["k"], repr(o["modulus"]), repr(o["err"]),
                             repr(r["measure"])])
    rdir = out / "report"
    rdir.mkdir(parents=True, exist_ok=True)
    (rdir / "criterion.csv").write_text(buf.getvalue())
    (rdir / "oscillation.csv").write_text(osc.getvalue())
    lines = summarize(scans, towers, crits, crit_index["quadrature_selftest"])
    good = sum(len(s["good_times"]) for s in scans)
    head = [f"ietlab {__version__} report", f"samples: {len(scans)}, good times: {good}, "
            f"criterion runs: {sum(len(c['reports']) for c in crits)}", ""]
    (rdir / "summary.txt").write_text("\n".join(head + lines) + "\n")
    index = {"format": FORMAT, "stage": "report", "config": config_digest(cfg),
             "files": ["criterion.csv", "oscillation.csv", "summary.txt"], "lines": lines}
    write_json(_stage_file(out, "report"), index)
    update_manifest(out, "report", cfg, workers, precision)
    return index


COMMANDS = {"sample": cmd_sample, "scan": cmd_scan, "towers": cmd_towers,
            "criterion": cmd_criterion, "report": cmd_report}


def run_all(cfg: dict, out, workers: int = 1, precision: str = "double") -> dict:
    result = None
    for stage in STAGES:
        result = COMMANDS[stage](cfg, out, workers, precision)
    return result
