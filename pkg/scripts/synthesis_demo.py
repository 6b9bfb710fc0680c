"""Build an operator from a finite list of eigenvalues and check its spectrum.

The given ``lambda_0..lambda_K`` are completed by ``lambda_k = k^2``; the
reconstruction returns ``M`` and ``H`` (with ``h = 0``), whose forward spectrum
is compared with the input.  ``--out`` writes ``M`` as CSV.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from convspec import Grid, Spectrum, algorithm_2, find_spectrum, write_function


@dataclass
class SynthesisConfig:
    perturbations: tuple[complex, ...] = (0.05, -0.08, 0.1, -0.03, 0.06)
    n: int = 512
    check_up_to: int = 50
    seed: int | None = None


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--seed", type=int, help="draw random perturbations of size <= 0.1 instead")
    p.add_argument("--out", type=Path)
    args = p.parse_args(argv)
    cfg = SynthesisConfig(n=args.n, seed=args.seed)
    shifts = np.array(cfg.perturbations, dtype=complex)
    if cfg.seed is not None:
        rng = np.random.default_rng(cfg.seed)
        shifts = 0.1 * rng.uniform(-1, 1, shifts.size) * np.exp(1j * rng.uniform(0, 2 * np.pi, shifts.size))
    k = np.arange(shifts.size + 1)
    values = (k**2).astype(complex)
    values[: shifts.size] += shifts
    s = Spectrum(values, "squares")
    sol = algorithm_2(s, Grid(cfg.n))
    fwd = find_spectrum(sol.M, sol.bc, cfg.check_up_to)
    target = np.concatenate([values, np.arange(s.K + 1, cfg.check_up_to + 1) ** 2])
    print(f"H = {sol.H_recovered:.10f}")
    print(f"M(0) = {sol.M.values[0]:.6f}, M(pi) = {sol.M.values[-1]:.6f}")
    print(f"max |lambda_fwd - lambda| for k <= {cfg.check_up_to}: {np.max(np.abs(fwd.values - target)):.3e}")
    for j in range(s.K + 1):
        print(f"  k={j}: input {values[j]:.6f}  forward {fwd.values[j]:.6f}")
    if args.out:
        write_function(sol.M, args.out)


if __name__ == "__main__":
    main()
