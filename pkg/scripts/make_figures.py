#!/usr/bin/env python3
"""
Render the standard figure set from scratch (no prior runs required).

Produces (under --out, default results/figures/):
  library.svg        - the nine endmember emission profiles
  spectra.svg        - a handful of simulated noisy mixtures
  loss_traces.svg    - per-iteration objective for the iterative solvers
  abundances.svg     - recovered vs true abundances for one spectrum
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from fluorunmix import (
    SimulationConfig,
    SolverConfig,
    simulate,
    solve,
    synthetic_default_library,
)
from fluorunmix.plots import render_line_chart, render_scatter_chart

TRACE_SOLVERS = (("snnls", 0.3), ("ista", 1.4), ("snpr", 0.35))


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--out", type=Path, default=Path("results/figures"))
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    library = synthetic_default_library()
    x = library.grid.wavelengths

    figures: dict[str, str] = {}

    figures["library.svg"] = render_line_chart(
        x,
        {name: library.matrix[:, j] for j, name in enumerate(library.names)},
        xlabel="wavelength (nm)",
        ylabel="normalized emission",
        title="endmember library",
    )

    sim = simulate(library, SimulationConfig(n=6, seed=args.seed))
    figures["spectra.svg"] = render_line_chart(
        x,
        {f"spec {j + 1}": sim.spectra[:, j] for j in range(sim.spectra.shape[1])},
        xlabel="wavelength (nm)",
        ylabel="intensity (counts / scale)",
        title="simulated noisy mixtures",
    )

    s = sim.spectra[:, 0]
    traces = {}
    for algo, lam in TRACE_SOLVERS:
        res = solve(algo, library.matrix, s, SolverConfig(lam=lam))
        trace = np.asarray(res.loss_trace[:200], dtype=float)
        # each solver minimizes its own objective, so plot relative progress
        span = max(trace.max() - trace.min(), 1e-12)
        traces[f"{algo} (lam={lam:g})"] = (trace - trace.min()) / span
    n_iters = max(t.size for t in traces.values())
    padded = {
        name: np.pad(t, (0, n_iters - t.size), constant_values=t[-1])
        for name, t in traces.items()
    }
    figures["loss_traces.svg"] = render_line_chart(
        np.arange(1, n_iters + 1),
        padded,
        xlabel="iteration",
        ylabel="objective (scaled to [0, 1] per solver)",
        title="solver convergence on one noisy spectrum",
    )

    res = solve("ista", library.matrix, s, SolverConfig(lam=1.4))
    figures["abundances.svg"] = render_scatter_chart(
        sim.truth[:, 0],
        res.c,
        xlabel="true abundance",
        ylabel="recovered abundance",
        title="ista (lam=1.4) recovery, spectrum 1",
        fit=(1.0, 0.0),
    )

    for name, svg in figures.items():
        path = args.out / name
        path.write_text(svg, encoding="utf-8")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
