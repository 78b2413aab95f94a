"""Packaged example bialgebras and generating functionals.

Five algebras ship with the library, each with one canonical generating
functional:

  fz2   F(Z/2), jump generator (value -1 at the identity indicator, +1 at
        the flip); the workhorse two-state example with noise dimension 1.
  fz3   F(Z/3), rate-1 jump by the generator.
  fs3   F(S3), rate-1 jumps by the three transpositions (noise dimension 3,
        noncommutative coproduct).
  cz2   C[Z/2], the sign generator (0 at u0, -2 at u1).
  cz4   C[Z/4], spectral measure on two characters (noise dimension 2).

A deliberately corrupted copy of fz2 (counit evaluated at the non-identity
point) is shipped for negative tests.  `write_packaged` regenerates the JSON
files under data/; `packaged_path` resolves them at runtime.
"""

from __future__ import annotations

import itertools
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .bialgebra import Bialgebra, descriptor_to_dict, function_algebra, group_algebra
from .serialize import encode_complex

PACKAGED_NAMES = ("fz2", "fz3", "fs3", "cz2", "cz4")


def cyclic_table(n: int) -> np.ndarray:
    g = np.arange(n)
    return (g[:, None] + g[None, :]) % n


def s3_table() -> np.ndarray:
    perms = list(itertools.permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}
    table = np.zeros((6, 6), dtype=int)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            comp = tuple(p[q[x]] for x in range(3))  # apply q, then p
            table[i, j] = index[comp]
    return table


def trivial_table() -> np.ndarray:
    return np.zeros((1, 1), dtype=int)


def _s3_transpositions() -> list[int]:
    perms = list(itertools.permutations(range(3)))
    return [i for i, p in enumerate(perms)
            if sum(p[x] != x for x in range(3)) == 2]


def packaged_algebra(name: str) -> Bialgebra:
    if name == "fz2":
        return function_algebra(cyclic_table(2))
    if name == "fz3":
        return function_algebra(cyclic_table(3))
    if name == "fs3":
        return function_algebra(s3_table())
    if name == "cz2":
        return group_algebra(cyclic_table(2))
    if name == "cz4":
        return group_algebra(cyclic_table(4))
    raise KeyError(f"unknown packaged algebra {name!r}; have {PACKAGED_NAMES}")


def packaged_generator(name: str) -> np.ndarray:
    if name == "fz2":
        return np.array([-1.0, 1.0], dtype=complex)
    if name == "fz3":
        return np.array([-1.0, 1.0, 0.0], dtype=complex)
    if name == "fs3":
        gamma = np.zeros(6, dtype=complex)
        trans = _s3_transpositions()
        gamma[trans] = 1.0
        gamma[0] = -float(len(trans))
        return gamma
    if name == "cz2":
        return np.array([0.0, -2.0], dtype=complex)
    if name == "cz4":
        # spectral measure with unit mass on the characters j -> i^j and
        # j -> i^{3j}: gamma(u_j) = 2 cos(pi j / 2) - 2
        return np.array([0.0, -2.0, -4.0, -2.0], dtype=complex)
    raise KeyError(f"unknown packaged generator {name!r}; have {PACKAGED_NAMES}")


def packaged_pair(name: str) -> tuple[Bialgebra, np.ndarray]:
    return packaged_algebra(name), packaged_generator(name)


def corrupted_fz2() -> Bialgebra:
    """F(Z/2) with the counit replaced by evaluation at the non-identity point."""
    B = packaged_algebra("fz2")
    bad_counit = np.array([0.0, 1.0], dtype=complex)
    return Bialgebra(B.dim, B.labels, B.mult, B.unit, B.invol, B.coprod,
                     bad_counit, B.rep_blocks)


# -- file layout -------------------------------------------------------------


def write_packaged(directory) -> list[Path]:
    """Write all packaged descriptor and generator files into a directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in PACKAGED_NAMES:
        B, gamma = packaged_pair(name)
        alg_path = directory / f"{name}.json"
        with open(alg_path, "w", encoding="utf-8") as fh:
            json.dump(descriptor_to_dict(B), fh, indent=1, sort_keys=True)
            fh.write("\n")
        gen_path = directory / f"{name}_gamma.json"
        with open(gen_path, "w", encoding="utf-8") as fh:
            json.dump({"coeffs": encode_complex(gamma)}, fh, indent=1, sort_keys=True)
            fh.write("\n")
        spec_path = directory / f"{name}_spec.json"
        with open(spec_path, "w", encoding="utf-8") as fh:
            json.dump({"algebra": f"{name}.json", "gamma": f"{name}_gamma.json"},
                      fh, indent=1, sort_keys=True)
            fh.write("\n")
        written += [alg_path, gen_path, spec_path]
    bad_path = directory / "fz2_bad_counit.json"
    with open(bad_path, "w", encoding="utf-8") as fh:
        json.dump(descriptor_to_dict(corrupted_fz2()), fh, indent=1, sort_keys=True)
        fh.write("\n")
    written.append(bad_path)
    return written


def packaged_path(filename: str) -> Path:
    """Path of a packaged data file (descriptor, generator or spec JSON)."""
    return Path(resources.files("qlevy").joinpath("data", filename))
