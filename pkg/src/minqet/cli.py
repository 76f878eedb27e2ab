"""Command-line front end: verify, report, sweep, evolve, optimize.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
All floats in CSV output are printed with 17 significant digits so that
parsing them back gives bit-identical values.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import json
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytic, entanglement, measurement, optimizer, protocol, qmath
from .model import ModelParams, build_hamiltonian, ground_state, spectrum_closed

SWEEP_COLUMNS = [
    "h",
    "k",
    "E_A",
    "maxE_B_closed",
    "maxE_B_numeric",
    "delta_S",
    "mutual_info",
    "bound32_lhs",
    "bound32_rhs",
    "bound770_lhs",
    "bound770_rhs",
    "delta_S_bits",
    "povm_sha256",
]

EVOLVE_COLUMNS = ["t", "HB_bruteforce", "HB_closed", "V_expect"]

PAIR_GRID = [(hh, kk) for hh in (0.5, 1.0, 2.0) for kk in (0.5, 1.0, 2.0)]


def fmt(x: float) -> str:
    return f"{x:.16e}"


def povm_sha256(meas: measurement.MeasurementModel) -> str:
    """Hash of the canonical JSON form, identifying the measurement."""
    text = json.dumps(
        measurement.to_json_obj(meas), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(text.encode("ascii")).hexdigest()


def resolve_povm(text: str) -> measurement.MeasurementModel:
    """Load a measurement from a JSON file path or a builtin:NAME tag.

    Builtins: ``builtin:projective``, ``builtin:weak(U)`` with U in [0, 1],
    ``builtin:identity``.
    """
    if text.startswith("builtin:"):
        name = text[len("builtin:") :]
        if name == "projective":
            return measurement.projective_pair()
        if name == "identity":
            return measurement.identity_measurement()
        weak = re.fullmatch(r"weak\(([^)]+)\)", name)
        if weak:
            return measurement.weak_pair(float(weak.group(1)))
        raise ValueError(
            f"unknown builtin measurement {name!r}; "
            "expected projective, weak(U), or identity"
        )
    with open(text, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{text}: {exc}") from exc
    return measurement.from_json_obj(obj)


def parse_range(text: str) -> np.ndarray:
    """Parse MIN:MAX:N[:log] (or a bare value) into a grid of positives."""
    parts = text.split(":")
    if len(parts) == 1:
        value = float(parts[0])
        if value <= 0.0:
            raise ValueError(f"grid values must be positive, got {value}")
        return np.array([value])
    if len(parts) not in (3, 4):
        raise ValueError(f"range {text!r} is not MIN:MAX:N or MIN:MAX:N:log")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    scale = parts[3] if len(parts) == 4 else "linear"
    if scale not in ("linear", "log"):
        raise ValueError(f"range scale must be 'linear' or 'log', got {scale!r}")
    if n < 1:
        raise ValueError(f"range needs at least one point, got {n}")
    if not 0.0 < lo <= hi:
        raise ValueError(f"range bounds must satisfy 0 < MIN <= MAX, got {text!r}")
    if scale == "log":
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


# ---------------------------------------------------------------------------
# verify


@dataclass
class CheckOutcome:
    name: str
    status: str  # PASS | FAIL | SKIP
    residual: float | None = None
    budget: float | None = None
    detail: str = ""


def _golden_max(fun, lo: float, hi: float, iters: int = 80) -> float:
    """Golden-section maximum of a smooth unimodal function on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fun(d)
    mid = 0.5 * (a + b)
    return max(fc, fd, fun(mid))


def _random_params(rng: np.random.Generator) -> ModelParams:
    h, k = np.exp(rng.uniform(math.log(0.25), math.log(4.0), size=2))
    return ModelParams(h=float(h), k=float(k))


def _random_axis(rng: np.random.Generator) -> tuple[float, float, float]:
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return (float(v[0]), float(v[1]), float(v[2]))


def _ensemble_residuals(seed: int, size: int) -> dict[str, float]:
    """One pass over `size` random measurements, accumulating per-check maxima."""
    rng = np.random.default_rng([seed, 1])
    worst: dict[str, float] = {
        "measurement-completeness": 0.0,
        "input-energy": 0.0,
        "post-measurement-passivity": 0.0,
        "teleported-energy-routes": 0.0,
        "entanglement-consumption": 0.0,
        "reduced-eigenvalues": 0.0,
        "mutual-information": 0.0,
        "entanglement-nonnegative": 0.0,
        "bound-32": 0.0,
        "bound-770": 0.0,
        "omega-maximum": 0.0,
        "axis-minimum": 0.0,
        "envelope-peak": 0.0,
    }
    two_omega_grid = 2.0 * np.linspace(0.0, math.pi, 256, endpoint=False)
    psi_grid = np.linspace(0.0, math.pi, 64, endpoint=False)
    for i in range(size):
        if i % 3 == 0:
            h, k = PAIR_GRID[(i // 3) % len(PAIR_GRID)]
            params = ModelParams(h=h, k=k)
        else:
            params = _random_params(rng)
        meas = measurement.random_measurement(rng, n_outcomes=(2, 3, 4, 6)[i % 4])

        worst["measurement-completeness"] = max(
            worst["measurement-completeness"],
            max(measurement.constraint_residuals(meas).values()),
        )

        parts = build_hamiltonian(params)
        g = ground_state(params)
        e_a_brute = 0.0
        rho_post = np.zeros((4, 4), dtype=complex)
        for mu in range(meas.n_outcomes):
            phi = measurement.kraus_on_full_space(meas, mu) @ g
            e_a_brute += float(np.real(phi.conj() @ parts.total @ phi))
            rho_post += np.outer(phi, phi.conj())
        worst["input-energy"] = max(
            worst["input-energy"],
            abs(e_a_brute - measurement.input_energy_closed(meas, params)),
        )
        worst["post-measurement-passivity"] = max(
            worst["post-measurement-passivity"],
            abs(qmath.expectation(rho_post, parts.h_b)),
            abs(qmath.expectation(rho_post, parts.v)),
        )

        report = protocol.run(params, meas, protocol.optimal_policy(params, meas))
        max_eb = analytic.max_EB_closed(params, meas.weights)
        worst["teleported-energy-routes"] = max(
            worst["teleported-energy-routes"], abs(report.e_b - max_eb)
        )

        delta_closed = analytic.delta_S_closed(params, meas.weights)
        worst["entanglement-consumption"] = max(
            worst["entanglement-consumption"], abs(report.delta_s - delta_closed)
        )
        worst["mutual-information"] = max(
            worst["mutual-information"], abs(report.mutual_info - report.delta_s)
        )
        worst["entanglement-nonnegative"] = max(
            worst["entanglement-nonnegative"], -report.delta_s
        )
        worst["bound-32"] = max(
            worst["bound-32"], report.bound32_rhs - report.delta_s
        )
        worst["bound-770"] = max(worst["bound-770"], report.bound770_rhs - max_eb)

        for (prob, rho_b), w in zip(
            entanglement.reduced_post_states(params, meas), meas.weights
        ):
            if rho_b is None:
                continue
            vals, _ = qmath.hermitian_eig(rho_b)
            lam_plus, lam_minus = analytic.lambda_pm(params, w.p, w.q)
            worst["reduced-eigenvalues"] = max(
                worst["reduced-eigenvalues"],
                abs(float(vals[1]) - lam_plus),
                abs(float(vals[0]) - lam_minus),
            )

        # scalar objective spot checks on one random outcome of this model
        w = meas.weights[int(rng.integers(meas.n_outcomes))]
        axis = _random_axis(rng)
        closed_max, omega_star = analytic.max_over_omega(params, w.p, w.q, axis)
        x_coef = analytic.X_of(params, w.p, w.q, axis)
        g_coef = params.h * params.k * w.q * axis[1]
        q_grid = x_coef * (np.cos(two_omega_grid) - 1.0) - g_coef * np.sin(
            two_omega_grid
        )
        scale = max(1.0, abs(x_coef) + abs(g_coef))
        refined = _golden_max(
            lambda om: analytic.Q_of(params, w.p, w.q, om, axis),
            omega_star - 0.1,
            omega_star + 0.1,
        )
        worst["omega-maximum"] = max(
            worst["omega-maximum"],
            (float(np.max(q_grid)) - closed_max) / scale,
            abs(refined - closed_max) / scale,
            abs(analytic.Q_of(params, w.p, w.q, omega_star, axis) - closed_max)
            / scale,
        )

        for z in (0.0, 0.37, 1.0):
            closed_min = analytic.min_X_over_psi(params, w.p, w.q, z)
            root_z = math.sqrt(z)
            nx = root_z * np.cos(psi_grid)
            nz = root_z * np.sin(psi_grid)
            x_vals = w.p * (
                params.h**2 * (1.0 - nz**2) + 2.0 * params.k**2 * (1.0 - nx**2)
            ) - 3.0 * params.h * params.k * w.q * nx * nz
            worst["axis-minimum"] = max(
                worst["axis-minimum"],
                (closed_min - float(np.min(x_vals))) / scale,
            )

        a, _, c = analytic.abc_constants(params, w.p, w.q)
        t0 = analytic.T_profile(params, w.p, w.q, 0.0)
        env_scale = max(1.0, a)
        worst["envelope-peak"] = max(
            worst["envelope-peak"],
            abs(t0 - (math.hypot(a, math.sqrt(c)) - a)) / env_scale,
            (0.0 if analytic.t_sign_check(params, w.p, w.q) else 1.0),
        )
    return worst


def _check_eigensolver(seed: int, size: int) -> float:
    rng = np.random.default_rng([seed, 2])
    worst = 0.0
    for _ in range(size):
        raw = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        a = raw + raw.conj().T
        vals, vecs = qmath.hermitian_eig(a)
        recon = vecs @ np.diag(vals) @ vecs.conj().T
        worst = max(
            worst,
            float(np.max(np.abs(recon - a))),
            float(np.max(np.abs(vecs.conj().T @ vecs - np.eye(4)))),
        )
        if not np.all(np.diff(vals) >= -1e-12):
            worst = max(worst, 1.0)
    return worst


def _check_ground_state() -> float:
    worst = 0.0
    for h in np.geomspace(0.1, 10.0, 5):
        for k in np.geomspace(0.1, 10.0, 5):
            params = ModelParams(h=float(h), k=float(k))
            parts = build_hamiltonian(params)
            g = ground_state(params)
            scale = 4.0 * params.eps
            worst = max(worst, float(qmath.norm(parts.total @ g)) / scale)
            vals, _ = qmath.hermitian_eig(parts.total)
            worst = max(worst, abs(float(vals[0])) / scale)
            worst = max(
                worst,
                float(np.max(np.abs(vals - spectrum_closed(params)))) / scale,
            )
    return worst


def _check_optimizer(seed: int, size: int) -> float:
    rng = np.random.default_rng([seed, 3])
    worst = 0.0
    for _ in range(size):
        params = _random_params(rng)
        meas = measurement.random_measurement(rng, n_outcomes=int(rng.integers(2, 5)))
        closed = analytic.max_EB_closed(params, meas.weights)
        numeric = optimizer.maximize_over_policy(params, meas).best_value
        worst = max(worst, abs(numeric - closed) / max(closed, 1e-9))
    return worst


def _check_no_go(seed: int, size: int) -> float:
    rng = np.random.default_rng([seed, 4])
    worst = 0.0
    for _ in range(size):
        params = _random_params(rng)
        meas = measurement.random_measurement(rng, n_outcomes=2)
        cost = protocol.passive_unitary_energy(
            params, meas, protocol.random_local_unitary(rng)
        )
        worst = max(worst, -cost)
    return worst


def _check_bound770_equality(seed: int, size: int) -> float:
    rng = np.random.default_rng([seed, 5])
    worst = 0.0
    for i in range(size):
        params = _random_params(rng)
        masses = rng.dirichlet(np.ones(int(rng.integers(1, 4))))
        weights = []
        for mass in masses:
            weights.append(measurement.OutcomeWeights(mass / 2.0, mass / 2.0))
            weights.append(measurement.OutcomeWeights(mass / 2.0, -mass / 2.0))
        meas = measurement.weights_to_coeffs(weights)
        max_eb = analytic.max_EB_closed(params, meas.weights)
        if i < 20:
            delta = entanglement.consumption(params, meas).delta_s
        else:
            delta = analytic.delta_S_closed(params, meas.weights)
        rhs = analytic.bounds(params).c770 * delta
        worst = max(worst, abs(max_eb - rhs) / max(max_eb, 1e-12))
    return worst


def _check_time_evolution() -> float:
    worst = 0.0
    cases = [
        (ModelParams(1.0, 1.0), measurement.projective_pair()),
        (ModelParams(2.0, 0.5), measurement.weak_pair(0.3)),
    ]
    for params, meas in cases:
        t_peak = math.pi / (4.0 * params.k)
        times = np.linspace(0.0, 2.0 * t_peak, 64)
        for sample in protocol.evolve_series(params, meas, times):
            worst = max(
                worst,
                abs(sample.hb_bruteforce - sample.hb_closed),
                abs(sample.v_expect),
            )
        peak = protocol.evolve_HB(params, meas, t_peak)
        e_a = measurement.input_energy_closed(meas, params)
        worst = max(worst, abs(peak - e_a))
    return worst


def _check_kernel_shape() -> float:
    worst = 0.0
    xs = np.linspace(0.0, 1.0, 1024)
    for h, k in PAIR_GRID:
        params = ModelParams(h=h, k=k)
        for x in xs:
            fe = analytic.rescaled_fbar(params, float(x), "E")
            fi = analytic.rescaled_fbar(params, float(x), "I")
            worst = max(worst, fe - x, x - fi)
    return worst


def _check_weak_limit() -> float:
    worst = 0.0
    for h, k in PAIR_GRID:
        params = ModelParams(h=h, k=k)
        c32 = analytic.bounds(params).c32
        errs = []
        for u in (1e-1, 1e-2, 1e-3):
            ratio = analytic.weak_limit_ratio(params, u)
            errs.append(abs(ratio / c32 - 1.0))
        curvature = 2.0 * errs[0] / 1e-2
        for u, err in zip((1e-1, 1e-2, 1e-3), errs):
            worst = max(worst, err - curvature * u * u)
        worst = max(worst, errs[1] - errs[0], errs[2] - errs[1])
    return worst


def _check_integrity(inject_fault: bool) -> float:
    worst = 0.0
    builtins = (
        measurement.projective_pair(),
        measurement.weak_pair(0.5),
        measurement.identity_measurement(),
    )
    for m in builtins:
        measurement.validate(m)
        worst = max(worst, max(measurement.constraint_residuals(m).values()))
    if inject_fault:
        bad = object.__new__(measurement.KrausCoefficients)
        for field, value in (("m", 0.9), ("l", 0.6), ("alpha", 0.0), ("delta", 0.0)):
            object.__setattr__(bad, field, value)
        broken = object.__new__(measurement.MeasurementModel)
        object.__setattr__(broken, "coeffs", (bad,))
        measurement.validate(broken)
        raise RuntimeError("corrupted measurement slipped through validation")
    return worst


def cmd_verify(args) -> int:
    seed, ensemble = args.seed, args.ensemble
    results: list[CheckOutcome] = []

    def record(name: str, budget: float, fn) -> None:
        try:
            residual = fn()
        except Exception as exc:  # verify reports, never crashes
            results.append(
                CheckOutcome(
                    name,
                    "FAIL",
                    detail=f"{type(exc).__name__}: {exc}",
                )
            )
            return
        status = "PASS" if residual <= budget else "FAIL"
        results.append(CheckOutcome(name, status, residual, budget))

    def skip(name: str) -> None:
        results.append(CheckOutcome(name, "SKIP", detail="ensemble checks disabled"))

    record("builtin-measurement-integrity", 1e-12, lambda: _check_integrity(args.self_test_fault))
    record("ground-state", 1e-9, _check_ground_state)
    record("time-evolution", 1e-9, _check_time_evolution)
    record("kernel-shape", 1e-12, _check_kernel_shape)
    record("weak-limit", 0.0, _check_weak_limit)

    ensemble_budgets = {
        "measurement-completeness": 1e-12,
        "input-energy": 1e-10,
        "post-measurement-passivity": 1e-10,
        "teleported-energy-routes": 1e-10,
        "entanglement-consumption": 1e-10,
        "reduced-eigenvalues": 1e-10,
        "mutual-information": 1e-10,
        "entanglement-nonnegative": 1e-12,
        "bound-32": 1e-10,
        "bound-770": 1e-10,
        "omega-maximum": 1e-9,
        "axis-minimum": 1e-9,
        "envelope-peak": 1e-9,
    }
    if ensemble > 0:
        try:
            pool = _ensemble_residuals(seed, ensemble)
        except Exception as exc:
            for name in ensemble_budgets:
                results.append(
                    CheckOutcome(name, "FAIL", detail=f"{type(exc).__name__}: {exc}")
                )
        else:
            for name, budget in ensemble_budgets.items():
                status = "PASS" if pool[name] <= budget else "FAIL"
                results.append(CheckOutcome(name, status, pool[name], budget))
        record("eigensolver-reconstruction", 1e-12, lambda: _check_eigensolver(seed, min(ensemble, 200)))
        record("optimizer-vs-closed", 1e-7, lambda: _check_optimizer(seed, min(ensemble, 5)))
        record("no-go-passive", 1e-10, lambda: _check_no_go(seed, min(ensemble, 200)))
        record("bound-770-equality", 1e-9, lambda: _check_bound770_equality(seed, min(ensemble, 100)))
    else:
        for name in ensemble_budgets:
            skip(name)
        for name in (
            "eigensolver-reconstruction",
            "optimizer-vs-closed",
            "no-go-passive",
            "bound-770-equality",
        ):
            skip(name)

    failures = []
    for r in results:
        if r.status == "SKIP":
            print(f"SKIP {r.name:32s} {r.detail}")
            continue
        tail = ""
        if r.residual is not None:
            tail = f"residual {r.residual:.3e}  budget {r.budget:.1e}"
        elif r.detail:
            tail = r.detail
        print(f"{r.status} {r.name:32s} {tail}")
        if r.status == "FAIL":
            entry = {"check": r.name}
            if r.residual is not None:
                entry["residual"] = r.residual
                entry["budget"] = r.budget
            if r.detail:
                error_class = r.detail.split(":", 1)[0]
                entry["error"] = error_class
                entry["message"] = r.detail
            failures.append(entry)

    n_pass = sum(1 for r in results if r.status == "PASS")
    n_fail = sum(1 for r in results if r.status == "FAIL")
    n_skip = sum(1 for r in results if r.status == "SKIP")
    print(
        f"verify: {len(results)} checks, {n_pass} passed, {n_fail} failed, "
        f"{n_skip} skipped (seed {seed}, ensemble {ensemble})"
    )
    if failures:
        print(json.dumps({"failures": failures}), file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    params = ModelParams(h=args.h, k=args.k)
    meas = resolve_povm(args.povm)
    measurement.validate(meas)
    policy = protocol.optimal_policy(params, meas)
    report = protocol.run(params, meas, policy)
    max_eb = analytic.max_EB_closed(params, meas.weights)
    coeffs = analytic.bounds(params)
    bound32_rhs = coeffs.c32 * max_eb / params.eps
    bound770_rhs = coeffs.c770 * report.delta_s
    payload = {
        "params": {"h": params.h, "k": params.k, "eps": params.eps},
        "povm": {
            "source": args.povm,
            "sha256": povm_sha256(meas),
            "outcomes": measurement.to_json_obj(meas)["outcomes"],
            "weights": [{"p": w.p, "q": w.q} for w in meas.weights],
        },
        "energies": {
            "E_A_closed": measurement.input_energy_closed(meas, params),
            "E_A_bruteforce": report.e_a,
            "maxE_B_closed": max_eb,
            "E_B_bruteforce": report.e_b,
            "total_final_energy": report.total_final_energy,
        },
        "entanglement": {
            "ground_entropy": entanglement.ground_entropy(params),
            "delta_S": report.delta_s,
            "delta_S_closed": analytic.delta_S_closed(params, meas.weights),
            "mutual_info": report.mutual_info,
        },
        "bounds": {
            "c32": coeffs.c32,
            "c770": coeffs.c770,
            "bound32": {
                "lhs": report.delta_s,
                "rhs": bound32_rhs,
                "slack": report.delta_s - bound32_rhs,
            },
            "bound770": {
                "lhs": max_eb,
                "rhs": bound770_rhs,
                "slack": max_eb - bound770_rhs,
            },
        },
        "policy": [
            {"omega": u.omega, "n": list(u.n)} for u in policy.unitaries
        ],
        "per_outcome": [
            {
                "probability": oc.probability,
                "H_A": oc.h_a,
                "H_B": oc.h_b,
                "V": oc.v,
                "total": oc.total,
            }
            for oc in report.per_outcome
        ],
    }
    print(json.dumps(payload, indent=2))
    return 0


# ---------------------------------------------------------------------------
# sweep


def _sweep_cell(job) -> list:
    h, k, povm_obj, sha = job
    params = ModelParams(h=h, k=k)
    meas = measurement.from_json_obj(povm_obj)
    report = protocol.run(params, meas, protocol.optimal_policy(params, meas))
    max_eb = analytic.max_EB_closed(params, meas.weights)
    numeric = optimizer.maximize_over_policy(params, meas).best_value
    return [
        fmt(h),
        fmt(k),
        fmt(report.e_a),
        fmt(max_eb),
        fmt(numeric),
        fmt(report.delta_s),
        fmt(report.mutual_info),
        fmt(report.delta_s),
        fmt(report.bound32_rhs),
        fmt(max_eb),
        fmt(report.bound770_rhs),
        fmt(analytic.nats_to_bits(report.delta_s)),
        sha,
    ]


def cmd_sweep(args) -> int:
    h_values = parse_range(args.h)
    k_values = parse_range(args.k)
    meas = resolve_povm(args.povm)
    measurement.validate(meas)
    povm_obj = measurement.to_json_obj(meas)
    sha = povm_sha256(meas)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    jobs = [
        (float(h), float(k), povm_obj, sha) for h in h_values for k in k_values
    ]
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_cell, jobs, chunksize=8))
    else:
        rows = [_sweep_cell(job) for job in jobs]

    csv_path = out_dir / "sweep.csv"
    with open(csv_path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        writer.writerows(rows)

    meta = {
        "h_range": args.h,
        "k_range": args.k,
        "povm_source": args.povm,
        "povm_sha256": sha,
        "rows": len(rows),
        "columns": SWEEP_COLUMNS,
        "seedless": True,
    }
    with open(out_dir / "metadata.json", "w", encoding="ascii") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    print(f"wrote {len(rows)} rows to {csv_path}")
    return 0


# ---------------------------------------------------------------------------
# evolve


def cmd_evolve(args) -> int:
    if args.t_max <= 0.0:
        raise ValueError(f"--t-max must be positive, got {args.t_max}")
    if args.points < 2:
        raise ValueError(f"--points must be at least 2, got {args.points}")
    params = ModelParams(h=args.h, k=args.k)
    meas = resolve_povm(args.povm)
    measurement.validate(meas)
    times = np.linspace(0.0, args.t_max, args.points)
    samples = protocol.evolve_series(params, meas, times)
    rows = [
        [fmt(s.t), fmt(s.hb_bruteforce), fmt(s.hb_closed), fmt(s.v_expect)]
        for s in samples
    ]
    if args.out:
        with open(args.out, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(EVOLVE_COLUMNS)
            writer.writerows(rows)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(EVOLVE_COLUMNS)
        writer.writerows(rows)
    return 0


# ---------------------------------------------------------------------------
# optimize


def cmd_optimize(args) -> int:
    params = ModelParams(h=args.h, k=args.k)
    if args.over == "weights":
        result = optimizer.maximize_over_weights(params, n_outcomes=args.n_outcomes)
        payload = {
            "over": "weights",
            "params": {"h": params.h, "k": params.k},
            "best_value": result.best_value,
            "projective_limit": analytic.f_E(params, 1.0),
            "weights": [{"p": w.p, "q": w.q} for w in result.best_weights],
            "evaluations": result.evaluations,
            "converged": result.converged,
        }
    else:
        if not args.povm:
            raise ValueError("optimize --over policy needs --povm")
        meas = resolve_povm(args.povm)
        measurement.validate(meas)
        result = optimizer.maximize_over_policy(params, meas)
        payload = {
            "over": "policy",
            "params": {"h": params.h, "k": params.k},
            "povm": {"source": args.povm, "sha256": povm_sha256(meas)},
            "best_value": result.best_value,
            "closed_form_max": analytic.max_EB_closed(params, meas.weights),
            "policy": [
                {"omega": u.omega, "n": list(u.n)}
                for u in result.best_policy.unitaries
            ],
            "evaluations": result.evaluations,
            "converged": result.converged,
        }
    print(json.dumps(payload, indent=2))
    return 0


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="minqet",
        description="Exact two-qubit energy-teleportation laboratory.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the cross-module property suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--ensemble", type=int, default=1000,
                   help="random models per ensemble check (0 skips them)")
    v.add_argument("--self-test-fault", action="store_true",
                   help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="single-run JSON report")
    r.add_argument("--h", type=float, required=True)
    r.add_argument("--k", type=float, required=True)
    r.add_argument("--povm", required=True,
                   help="JSON file or builtin:projective|weak(U)|identity")
    r.set_defaults(func=cmd_report)

    s = sub.add_parser("sweep", help="CSV over an (h, k) grid")
    s.add_argument("--h", required=True, help="MIN:MAX:N[:log] or a single value")
    s.add_argument("--k", required=True, help="MIN:MAX:N[:log] or a single value")
    s.add_argument("--povm", required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("evolve", help="post-measurement energy vs time, CSV")
    e.add_argument("--h", type=float, required=True)
    e.add_argument("--k", type=float, required=True)
    e.add_argument("--povm", required=True)
    e.add_argument("--t-max", type=float, required=True)
    e.add_argument("--points", type=int, default=256)
    e.add_argument("--out", default="", help="CSV path (default: stdout)")
    e.set_defaults(func=cmd_evolve)

    o = sub.add_parser("optimize", help="numeric maximization, JSON report")
    o.add_argument("--h", type=float, required=True)
    o.add_argument("--k", type=float, required=True)
    o.add_argument("--povm", default="",
                   help="measurement for --over policy")
    o.add_argument("--over", choices=("policy", "weights"), default="policy")
    o.add_argument("--n-outcomes", type=int, default=2,
                   help="outcome count for --over weights")
    o.set_defaults(func=cmd_optimize)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
