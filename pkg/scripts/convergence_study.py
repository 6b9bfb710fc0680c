"""Grid and truncation convergence of the forward and inverse solvers.

Prints two tables: the two-path discrepancy of ``Delta`` against ``n`` and the
kernel reconstruction error against the number of eigenvalues ``K``.
"""

from __future__ import annotations

import argparse
import math
from dataclasses import dataclass, field

import numpy as np

from convspec import BoundaryCoefficients, Grid, algorithm_1, find_spectrum
from convspec.grid import l2_norm
from convspec.validation import two_path_discrepancy

KERNELS = {"x/2": lambda x: x / 2, "1": lambda x: 1 + 0 * x, "sin x": np.sin, "cos 2x": lambda x: np.cos(2 * x)}


@dataclass
class StudyConfig:
    kernel: str = "1"
    h: complex = 1.0
    H: complex = 1.0
    grids: tuple[int, ...] = (128, 256, 512, 1024)
    eig_counts: tuple[int, ...] = (10, 25, 50, 100, 150)
    n_inverse: int = 512
    fraction: float = 0.9
    bc: BoundaryCoefficients = field(init=False)

    def __post_init__(self):
        self.bc = BoundaryCoefficients(self.h, self.H)


def grid_table(cfg: StudyConfig) -> None:
    print(f"two-path discrepancy, M = {cfg.kernel}, (h, H) = ({cfg.h}, {cfg.H})")
    print(f"{'n':>6} {'discrepancy':>12} {'ratio':>7}")
    prev = None
    for n in cfg.grids:
        d = two_path_discrepancy(Grid(n).sample(KERNELS[cfg.kernel]), cfg.bc)
        ratio = f"{prev / d:7.2f}" if prev else " " * 7
        print(f"{n:>6} {d:12.3e} {ratio}")
        prev = d


def truncation_table(cfg: StudyConfig) -> None:
    g = Grid(cfg.n_inverse)
    M = g.sample(KERNELS[cfg.kernel])
    s = find_spectrum(M, cfg.bc, max(cfg.eig_counts))
    upto = g.index_upto(cfg.fraction * math.pi)
    ref = l2_norm(M.values, g, upto=upto)
    print(f"\nreconstruction error on [0, {cfg.fraction} pi], n = {cfg.n_inverse}")
    print(f"{'K':>6} {'rel L2':>12} {'alpha':>24}")
    for K in cfg.eig_counts:
        sol = algorithm_1(s.truncated(K), cfg.bc, g)
        err = l2_norm(sol.M.values - M.values, g, upto=upto) / ref
        print(f"{K:>6} {err:12.3e} {sol.alpha:24.12f}")


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--kernel", choices=sorted(KERNELS), default="1")
    p.add_argument("--h", type=complex, default=1.0)
    p.add_argument("--H", type=complex, default=1.0)
    args = p.parse_args(argv)
    cfg = StudyConfig(args.kernel, args.h, args.H)
    grid_table(cfg)
    truncation_table(cfg)


if __name__ == "__main__":
    main()
