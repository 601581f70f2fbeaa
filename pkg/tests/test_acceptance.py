"""Acceptance gate: ten end-to-end criteria, one test per criterion.

Each test is self-contained (plus the shared session corpus fixtures) and
asserts the released behavior at the stated tolerances.  The terminal summary
hook in conftest.py prints one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import json
import time

import numpy as np
import pytest

import fluorunmix as fu
import oracles
from fluorunmix.cli import main as cli_main
from fluorunmix.dataio import read_columns_csv, write_columns_csv

TABLE_LAMBDAS = {"nnls": 0.0, "snnls": 0.3, "ista": 1.4, "snpr": 0.35}


# ---------------------------------------------------------------------------
# 1. exact recovery on noiseless spectra


def test_criterion_1(library):
    """NNLS recovers noiseless mixtures to 1e-8; the iterative solvers with
    lambda=0 recover to 1e-3; 100 spectra, all four solvers, under 5 s."""
    rng = np.random.default_rng(101)
    B = library.matrix
    worst = {algo: 0.0 for algo in fu.ALGORITHMS}
    t0 = time.perf_counter()
    for _ in range(100):
        c0 = rng.uniform(0.0, 1.0, library.k)
        c0[rng.random(library.k) < 0.4] = 0.0
        s = fu.synthesize_clean(B, c0[:, None])[:, 0]
        for algo in fu.ALGORITHMS:
            res = fu.solve(algo, B, s, fu.SolverConfig(lam=0.0))
            worst[algo] = max(worst[algo], float(np.max(np.abs(res.c - c0))))
    elapsed = time.perf_counter() - t0
    assert worst["nnls"] < 1e-8, f"nnls max abs error {worst['nnls']:.3e}"
    for algo in ("snnls", "ista", "snpr"):
        assert worst[algo] < 1e-3, f"{algo} max abs error {worst[algo]:.3e}"
    assert elapsed < 5.0, f"400 noiseless solves took {elapsed:.2f} s"


# ---------------------------------------------------------------------------
# 2. solver objectives match a brute-force lattice search


def test_criterion_2(library):
    """On 50 random k<=3 sub-library instances every solver's final objective
    is within 5e-3 of an exhaustive 1e-3-step lattice minimum of its own
    loss over [0, 2]^k."""
    rng = np.random.default_rng(202)
    B = library.matrix
    gaps = []
    cross_checked = 0
    for i in range(50):
        k = int(rng.integers(1, 4))
        cols = rng.choice(library.k, size=k, replace=False)
        Bk = B[:, cols]
        c_true = rng.uniform(0.2, 1.2, k)
        s = np.maximum(Bk @ c_true + rng.normal(0.0, 0.01, library.m), 0.0)
        batches = {
            "nnls": oracles.lasso_loss_batch(Bk, s, 0.0),
            "snnls": oracles.lasso_loss_batch(Bk, s, TABLE_LAMBDAS["snnls"]),
            "ista": oracles.lasso_loss_batch(Bk, s, 0.05),
            "snpr": oracles.poisson_loss_batch(Bk, s, 0.25),
        }
        lattice = {
            algo: oracles.refine_grid_min(batch, k)[1]
            for algo, batch in batches.items()
        }
        # the coarse-to-fine search is only trusted because it reproduces the
        # full fine lattice; spot-check that on the first few small instances
        if cross_checked < 3 and k <= 2:
            for algo, batch in batches.items():
                _, full = oracles.full_grid_min(batch, k, step=1e-3)
                assert abs(lattice[algo] - full) < 1e-12, (
                    f"refined lattice missed the full-grid minimum "
                    f"({algo}, instance {i})"
                )
            cross_checked += 1
        lams = {"nnls": 0.0, "snnls": 0.3, "ista": 0.05, "snpr": 0.25}
        for algo, lam in lams.items():
            res = fu.solve(algo, Bk, s, fu.SolverConfig(lam=lam))
            if algo == "snpr":
                loss = fu.poisson_nll(res.c, Bk, s, lam)
            else:
                loss = fu.ls_lasso_loss(res.c, Bk, s, lam)
            gaps.append((abs(loss - lattice[algo]), algo, i))
    assert cross_checked == 3
    worst = max(gaps)
    assert worst[0] <= 5e-3, (
        f"objective gap {worst[0]:.3e} vs lattice for {worst[1]} "
        f"on instance {worst[2]}"
    )


# ---------------------------------------------------------------------------
# 3. analytic gradients match central differences


def test_criterion_3(library):
    """Analytic gradients of both penalized losses agree with central finite
    differences to relative error < 1e-5 at 100 random interior points."""
    rng = np.random.default_rng(303)
    B = library.matrix
    worst = 0.0
    for _ in range(100):
        c = rng.uniform(0.2, 1.5, library.k)
        s = np.maximum(
            B @ rng.uniform(0.0, 1.0, library.k) + rng.normal(0.0, 0.05, library.m),
            0.0,
        )
        pairs = (
            (lambda x: fu.ls_lasso_loss(x, B, s, 0.3), fu.grad_ls_lasso(c, B, s, 0.3)),
            (lambda x: fu.poisson_nll(x, B, s, 0.25), fu.grad_poisson_nll(c, B, s, 0.25)),
        )
        for loss_fn, grad in pairs:
            j = int(rng.integers(library.k))
            fd = oracles.central_difference(loss_fn, c, j)
            rel = abs(fd - grad[j]) / max(abs(grad[j]), 1e-12)
            worst = max(worst, rel)
    assert worst < 1e-5, f"worst gradient relative error {worst:.3e}"


# ---------------------------------------------------------------------------
# 4. headline abundance-error ratio


def test_criterion_4(library, bench_sim, bench_solutions):
    """On the standard n=1000 corpus the lasso solver's abundance error is at
    most 0.85x the NNLS error, within a 60 s budget."""
    truth = bench_sim["sim"].truth
    ista, ista_wall = bench_solutions["ista_1.4"]
    nnls, nnls_wall = bench_solutions["nnls"]
    ratio = fu.abundance_mse(ista, truth) / fu.abundance_mse(nnls, truth)
    assert ratio <= 0.85, f"abundance error ratio {ratio:.4f}"
    total = bench_sim["sim_seconds"] + ista_wall + nnls_wall
    assert total < 60.0, f"corpus + solves took {total:.1f} s"


# ---------------------------------------------------------------------------
# 5. false-positive and reconstruction orderings


def test_criterion_5(library, bench_sim, bench_solutions):
    """False positives: ista(1.4) < snpr(0.35) < nnls.  Reconstruction error:
    nnls is at least as good as every sparse solver."""
    sim = bench_sim["sim"]
    fp = {
        key: fu.count_false_positives(C, sim.truth)
        for key, (C, _) in bench_solutions.items()
    }
    assert fp["ista_1.4"] < fp["snpr_0.35"] < fp["nnls"], f"false positives {fp}"
    recon = {
        key: fu.reconstruction_mse(sim.spectra, library.matrix, C)
        for key, (C, _) in bench_solutions.items()
    }
    for key in ("ista_1.4", "snnls_0.3", "snpr_0.35"):
        assert recon["nnls"] <= recon[key], f"reconstruction mse {recon}"


# ---------------------------------------------------------------------------
# 6. sparsity ordering


def test_criterion_6(bench_solutions):
    """Mean L0 of the lasso solutions is strictly below the NNLS mean L0."""
    l0_ista = float(fu.l0_counts(bench_solutions["ista_1.4"][0]).mean())
    l0_nnls = float(fu.l0_counts(bench_solutions["nnls"][0]).mean())
    assert l0_ista < l0_nnls, f"mean L0 ista {l0_ista:.2f} vs nnls {l0_nnls:.2f}"


# ---------------------------------------------------------------------------
# 7. noise-distribution analysis


def test_criterion_7(library):
    """On a fixed-abundance n=5000 photon-noise corpus the analysis prefers
    the variance-equals-mean model (KL ordering), with mean-variance slope in
    [0.9, 1.15] and R^2 > 0.8; a constant-variance control reverses the KL
    ordering."""
    scale = 1e4
    stats = fu.default_abundance_stats()
    config = fu.SimulationConfig(
        n=5000,
        seed=2024,
        stats=fu.AbundanceStats(means=stats.means, stds=np.zeros(library.k)),
        smoothing_window=1,
        smoothing_order=0,
        intensity_scale=scale,
    )
    sim = fu.simulate(library, config)
    report = fu.analyze_noise(sim.spectra * scale)
    assert 0.9 <= report.slope <= 1.15, f"slope {report.slope:.4f}"
    assert report.r_squared > 0.8, f"R^2 {report.r_squared:.4f}"
    assert report.mean_kl_poisson < report.mean_kl_constant, (
        f"KL poisson {report.mean_kl_poisson:.4f} "
        f"vs constant {report.mean_kl_constant:.4f}"
    )
    # control: identical clean signal, additive constant-variance noise
    rng = np.random.default_rng(7)
    mu = scale * fu.synthesize_clean(library.matrix, sim.truth)
    counts = np.maximum(mu + rng.normal(0.0, np.sqrt(500.0), mu.shape), 0.0)
    control = fu.analyze_noise(counts)
    assert control.mean_kl_constant < control.mean_kl_poisson, (
        f"control KL poisson {control.mean_kl_poisson:.4f} "
        f"vs constant {control.mean_kl_constant:.4f}"
    )


# ---------------------------------------------------------------------------
# 8. runtime sanity


def test_criterion_8(library):
    """Every solver runs a 310x9 spectrum in under 5 ms, and nnls and snpr
    place within the two fastest of the four.  Measured on a corpus at the
    simulator's default count scale (all-defaults configuration)."""
    S = fu.simulate(library, fu.SimulationConfig(n=64, seed=2024)).spectra
    per_ms = {}
    for algo, lam in TABLE_LAMBDAS.items():
        config = fu.SolverConfig(lam=lam)
        best = np.inf
        for _ in range(3):
            t0 = time.perf_counter()
            for j in range(S.shape[1]):
                fu.solve(algo, library.matrix, S[:, j], config)
            best = min(best, time.perf_counter() - t0)
        per_ms[algo] = best / S.shape[1] * 1e3
    readable = {a: round(v, 3) for a, v in per_ms.items()}
    slow = sorted(a for a, v in per_ms.items() if v >= 5.0)
    fastest_two = sorted(per_ms, key=per_ms.get)[:2]
    ordering_ok = {"nnls", "snpr"} <= set(fastest_two)
    absolute_msg = "PASS" if not slow else f"FAIL ({slow} at/above 5 ms)"
    ordering_msg = (
        "PASS"
        if ordering_ok
        else f"FAIL (two fastest are {fastest_two}; snpr measures slowest)"
    )
    assert not slow and ordering_ok, (
        f"per-spectrum ms {readable} | absolute leg (< 5 ms each): "
        f"{absolute_msg} | fastest-two leg (nnls and snpr among the two "
        f"fastest): {ordering_msg}"
    )


# ---------------------------------------------------------------------------
# 9. simulator statistics match analytic oracles


def test_criterion_9(library):
    """Ground-truth nonzero fractions match the Normal-tail probability
    within 3-sigma binomial bounds at n=10000, and the photon-noise
    variance/mean ratio pooled over bright pixels is within 15% of 1."""
    n, scale = 10000, 1e4
    config = fu.SimulationConfig(
        n=n, seed=909, smoothing_window=1, smoothing_order=0, intensity_scale=scale
    )
    sim = fu.simulate(library, config)
    stats = config.stats
    for j in range(library.k):
        p = oracles.normal_tail(stats.means[j], stats.stds[j], config.threshold)
        observed = float(np.mean(sim.truth[j] > 0))
        bound = 3.0 * np.sqrt(p * (1.0 - p) / n)
        assert abs(observed - p) <= bound, (
            f"endmember {library.names[j]}: nonzero fraction {observed:.4f} "
            f"vs Normal-tail {p:.4f} (3-sigma bound {bound:.4f})"
        )
    mu = scale * fu.synthesize_clean(library.matrix, sim.truth)
    counts = sim.spectra * scale
    bright = mu >= 100.0
    assert bright.sum() > 1_000_000  # the pooled estimate is well powered
    pooled = float(((counts - mu)[bright] ** 2).sum() / mu[bright].sum())
    assert 0.85 <= pooled <= 1.15, f"pooled variance/mean ratio {pooled:.4f}"


# ---------------------------------------------------------------------------
# 10. round trips and byte-identical reruns


def test_criterion_10(library, tmp_path):
    """CSV export/import reproduces libraries and spectra to 1e-9, and
    same-seed CLI runs produce byte-identical artifacts (runtime excluded)."""
    lib_csv = tmp_path / "library.csv"
    fu.export_library(library, lib_csv)
    lib2 = fu.load_library(lib_csv)
    assert lib2.grid.isclose(library.grid)
    assert lib2.names == library.names
    np.testing.assert_allclose(lib2.matrix, library.matrix, atol=1e-9)

    rng = np.random.default_rng(1010)
    S = rng.uniform(0.0, 5.0, (library.m, 4))
    ids = [f"s{j}" for j in range(4)]
    spec_csv = tmp_path / "spectra.csv"
    write_columns_csv(spec_csv, library.grid.wavelengths, ids, S)
    wavelengths, ids2, S2 = read_columns_csv(spec_csv, "wavelength_nm")
    assert ids2 == ids
    np.testing.assert_allclose(wavelengths, library.grid.wavelengths, atol=1e-9)
    np.testing.assert_allclose(S2, S, atol=1e-9)

    sim_dirs = [tmp_path / "sim_a", tmp_path / "sim_b"]
    for d in sim_dirs:
        assert cli_main(["simulate", "--n", "5", "--seed", "77", "--out", str(d)]) == 0
    for name in ("spectra.csv", "truth.csv", "meta.json"):
        assert (sim_dirs[0] / name).read_bytes() == (sim_dirs[1] / name).read_bytes()

    unmix_dirs = [tmp_path / "un_a", tmp_path / "un_b"]
    for d in unmix_dirs:
        assert (
            cli_main(
                [
                    "unmix",
                    "--spectra",
                    str(sim_dirs[0] / "spectra.csv"),
                    "--algo",
                    "ista",
                    "--lambda",
                    "1.4",
                    "--out",
                    str(d),
                ]
            )
            == 0
        )
    a, b = unmix_dirs
    assert (a / "abundances.csv").read_bytes() == (b / "abundances.csv").read_bytes()
    da = json.loads((a / "diagnostics.json").read_text())
    db = json.loads((b / "diagnostics.json").read_text())
    da.pop("runtime")
    db.pop("runtime")
    assert da == db
