"""Acceptance suite: one test per shipped criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines.  Tolerances are fixed here, not tuned at run time.
"""

import math
import time

import numpy as np

from sensorplace import cli, fileio
from sensorplace.evaluate import build_model, observe, reconstruct, reconstruction_error, score_logdet
from sensorplace.experiments import (
    METHOD_FULL_OBSERVATION,
    ExperimentConfig,
    generate_synthetic_flow,
    run_random_benchmark,
    run_reconstruction_study,
)
from sensorplace.pod import compute_pod, mode_amplitudes
from sensorplace.selection import (
    select_convex,
    select_random,
    select_scalar_greedy,
    select_vector_greedy,
)

from oracles import exhaustive_step_argmax, gram_det_gain


def report(label: str, passed: bool, detail: str = ""):
    line = f"{label}: {'PASS' if passed else 'FAIL'}"
    if detail:
        line += f"  [{detail}]"
    print(line)
    assert passed, line


def test_a1_full_scale_benchmark_ordering():
    """Vector greedy > scalar greedy > random in mean log det, by > 3 pooled SEs."""
    start = time.perf_counter()
    cfg = ExperimentConfig(
        r_values=(4, 6, 8, 10),
        base_seed=20250809,
        n_per_component=1000,
        components=2,
        trials=100,
        methods=("vector-greedy", "scalar-greedy-component-1", "random"),
    )
    rep = run_random_benchmark(cfg)
    elapsed = time.perf_counter() - start

    def sem(cell):
        return cell.std / math.sqrt(cell.trials)

    failures = []
    min_margin = math.inf
    for r in cfg.r_values:
        vec = rep.cell("vector-greedy", r)
        sca = rep.cell("scalar-greedy-component-1", r)
        rnd = rep.cell("random", r)
        for hi, lo in ((vec, sca), (sca, rnd)):
            pooled = math.hypot(sem(hi), sem(lo))
            margin = (hi.mean - lo.mean) / pooled
            min_margin = min(min_margin, margin)
            if hi.mean - lo.mean <= 3.0 * pooled:
                failures.append(f"r={r}: {hi.method} vs {lo.method} margin {margin:.2f}")
    ok = not failures and elapsed < 120.0
    report(
        "A1 full-scale benchmark ordering",
        ok,
        f"min gap {min_margin:.1f} pooled SEs, {elapsed:.1f}s" + "; ".join(failures),
    )


def test_a2_greedy_steps_match_exhaustive_search():
    """Each greedy step attains the exhaustive per-step determinant maximum."""
    rng = np.random.default_rng(777)
    violations = []
    steps_checked = 0
    for instance in range(50):
        s = (1, 2, 3)[instance % 3]
        dof = int(rng.integers(4, 17))
        r = int(rng.integers(s, 7))
        p = max(1, r // s)
        p = min(p, dof)
        candidate = rng.standard_normal((s * dof, r))
        selections = [select_vector_greedy(candidate, p, components=s)]
        if s == 1:
            selections.append(select_scalar_greedy(candidate, p))
        for sel in selections:
            picked: list[int] = []
            for loc in sel.locations:
                oracle_loc, oracle_val = exhaustive_step_argmax(candidate, picked, s)
                steps_checked += 1
                if loc != oracle_loc:
                    chosen_val = gram_det_gain(candidate, picked, loc, s)
                    if abs(chosen_val - oracle_val) > 1e-9 * max(1.0, abs(oracle_val)):
                        violations.append(
                            f"instance {instance}: chose {loc} ({chosen_val:.3e}), "
                            f"oracle {oracle_loc} ({oracle_val:.3e})"
                        )
                picked.append(loc)
    report(
        "A2 per-step exhaustive optimality",
        not violations,
        f"{steps_checked} steps checked" + "; ".join(violations[:3]),
    )


def test_a3_squared_determinant_equals_gain_product():
    """For square budgets, det(C)^2 equals the product of the step gains."""
    rng = np.random.default_rng(888)
    worst = 0.0
    ok = True
    for case in range(100):
        s = (1, 2, 3)[case % 3]
        p = 1 + case % 4
        r = s * p
        dof = int(rng.integers(max(p, 6), 21))
        candidate = rng.standard_normal((s * dof, r))
        sel = select_vector_greedy(candidate, p, components=s)
        det_sq = math.exp(2.0 * score_logdet(build_model(candidate, sel)))
        product = float(np.prod(sel.step_gains))
        rel = abs(det_sq - product) / abs(product)
        worst = max(worst, rel)
        ok &= rel <= 1e-8
    report("A3 determinant equals gain product", ok, f"worst relative error {worst:.2e}")


def test_a4_exact_reconstruction_square_noiseless():
    """Noiseless known-rank data is reconstructed exactly at the square budget."""
    cases = {1: (2, 4, 8, 12), 2: (4, 8, 12), 3: (3, 6, 9, 12)}
    worst = 0.0
    ok = True
    for s, r_list in cases.items():
        for r in r_list:
            data = generate_synthetic_flow(
                40, s, true_rank=r, n_snapshots=2 * r + 10, seed=1000 + 10 * s + r
            )
            basis = compute_pod(data, r)
            sel = select_vector_greedy(basis, r // s)
            y = observe(basis, sel, data)
            rec = reconstruct(build_model(basis, sel), y)
            err = reconstruction_error(mode_amplitudes(basis, data), rec.amplitudes)
            worst = max(worst, err)
            ok &= err <= 1e-8
    report("A4 exact noiseless reconstruction", ok, f"worst error {worst:.2e}")


def test_a5_noisy_reconstruction_error_ordering():
    """Under observation noise: full obs <= vector greedy <= random, in the mean."""
    data = generate_synthetic_flow(150, 2, true_rank=12, n_snapshots=120, seed=2024)
    cfg = ExperimentConfig(
        r_values=(4, 8, 12),
        base_seed=31,
        n_per_component=150,
        components=2,
        trials=20,
        methods=("vector-greedy", "random"),
        noise_sigma=0.01,
    )
    rep = run_reconstruction_study(cfg, data)
    failures = []
    for r in cfg.r_values:
        vec = rep.cell("vector-greedy", r).mean
        rnd = rep.cell("random", r).mean
        full = rep.cell(METHOD_FULL_OBSERVATION, r).mean
        if not vec <= rnd:
            failures.append(f"r={r}: vector {vec:.4f} > random {rnd:.4f}")
        if not full <= vec:
            failures.append(f"r={r}: full {full:.4f} > vector {vec:.4f}")
    report("A5 noisy-error ordering", not failures, "; ".join(failures) or "all ranks ordered")


def test_a6_single_component_reduction():
    """Vector and scalar greedy agree exactly when there is one component."""
    rng = np.random.default_rng(999)
    mismatches = 0
    for _ in range(100):
        r = int(rng.integers(1, 9))
        n = int(rng.integers(r, 41))
        p = min(r, n)
        candidate = rng.standard_normal((n, r))
        a = select_scalar_greedy(candidate, p)
        b = select_vector_greedy(candidate, p, components=1)
        mismatches += a.locations != b.locations
    report("A6 single-component reduction", mismatches == 0, f"{mismatches} mismatches")


def test_a7_scale_and_permutation_invariance():
    """Index sequences survive positive scaling and follow location permutations."""
    rng = np.random.default_rng(555)
    failures = 0
    for instance in range(50):
        s = (1, 2, 3)[instance % 3]
        dof = int(rng.integers(5, 15))
        p = int(rng.integers(1, 4))
        r = s * p + int(rng.integers(0, 3))
        candidate = rng.standard_normal((s * dof, r))
        base_vec = select_vector_greedy(candidate, p, components=s)
        base_sca = select_scalar_greedy(candidate, min(p, r))
        for c in (1e-3, 1e3):
            scaled = c * candidate
            failures += select_vector_greedy(scaled, p, components=s).locations != base_vec.locations
            failures += select_scalar_greedy(scaled, min(p, r)).locations != base_sca.locations
        perm = rng.permutation(dof)
        permuted = np.empty_like(candidate)
        for j in range(s):
            permuted[perm + dof * j] = candidate[np.arange(dof) + dof * j]
        mapped = select_vector_greedy(permuted, p, components=s)
        failures += mapped.locations != tuple(perm[list(base_vec.locations)])
    report("A7 scale and permutation invariance", failures == 0, f"{failures} failures")


def test_a8_cli_pipeline_fidelity(tmp_path):
    """File pipeline matches the in-process results; reruns are byte-identical."""
    data = generate_synthetic_flow(30, 2, true_rank=8, n_snapshots=40, seed=4242)
    snaps = tmp_path / "snaps.csv"
    fileio.write_matrix(snaps, data.data)
    paths = {name: tmp_path / f"{name}.csv" for name in
             ("modes", "sigma", "sel", "obs", "amps", "modes2", "sigma2", "sel2")}

    assert cli.main(["pod", str(snaps), str(paths["modes"]), str(paths["sigma"]),
                     "-s", "2", "-r", "8"]) == 0
    assert cli.main(["select", str(paths["modes"]), str(paths["sel"]),
                     "-m", "vector-greedy", "-p", "4", "-s", "2"]) == 0

    basis = compute_pod(data, 8)
    selection = select_vector_greedy(basis, 4)
    y = observe(basis, selection, data, noise_sigma=0.01, seed=99)
    fileio.write_matrix(paths["obs"], y)
    assert cli.main(["reconstruct", str(paths["modes"]), str(paths["sel"]),
                     str(paths["obs"]), str(paths["amps"])]) == 0

    expected = reconstruct(build_model(basis, selection), y).amplitudes
    got = fileio.read_matrix(paths["amps"])
    max_diff = float(np.max(np.abs(got - expected)))

    assert cli.main(["pod", str(snaps), str(paths["modes2"]), str(paths["sigma2"]),
                     "-s", "2", "-r", "8"]) == 0
    assert cli.main(["select", str(paths["modes2"]), str(paths["sel2"]),
                     "-m", "vector-greedy", "-p", "4", "-s", "2"]) == 0
    byte_identical = (
        paths["modes"].read_bytes() == paths["modes2"].read_bytes()
        and paths["sel"].read_bytes() == paths["sel2"].read_bytes()
    )
    ok = max_diff <= 1e-12 and byte_identical
    report(
        "A8 CLI pipeline fidelity",
        ok,
        f"max |cli - library| = {max_diff:.2e}, reruns byte-identical: {byte_identical}",
    )


def test_a9_convex_beats_median_random():
    """Rounded relaxation beats the median random selection on most instances."""
    wins = 0
    for instance in range(20):
        rng = np.random.default_rng(7000 + instance)
        candidate = rng.standard_normal((2 * 40, 8))  # s=2, 40 locations, r=8
        sel = select_convex(candidate, 4, components=2)
        value = score_logdet(build_model(candidate, sel))
        scores = []
        for k in range(200):
            rand = select_random(40, 4, seed=k, components=2)
            scores.append(score_logdet(build_model(candidate, rand)))
        wins += value > float(np.median(scores))
    report("A9 convex beats median random", wins >= 18, f"{wins}/20 instances")
