"""Seeded instance generators.

All generators are deterministic per seed and emit exact rational sizes on
coarse grids, which keeps downstream arithmetic cheap.  The guillotine
generator records the exact optimal height in the instance metadata: its
boxes tile [0,1] x [0,1] x [0,H], so the volume bound meets the tiling
witness and the optimum is H exactly.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .errors import ContractError, DomainError
from .model import (Box3, Instance, Packing, Placement, Rational, as_fraction,
                    validate_packing)

ZERO = Fraction(0)
ONE = Fraction(1)


def _grid_uniform(rng: random.Random, lo: Fraction, hi: Fraction,
                  denom: int) -> Fraction:
    a = max(1, -((-lo * denom).__floor__()))   # ceil(lo*denom), at least 1
    b = (hi * denom).__floor__()
    if b < a:
        raise DomainError(f"empty size range [{lo}, {hi}] on grid 1/{denom}")
    return Fraction(rng.randint(a, b), denom)


def gen_uniform(n: int, seed: int, lo: Rational = "1/20", hi: Rational = 1,
                denom: int = 1000) -> Instance:
    """Independent uniform grid sizes in [lo, hi] for all three extents."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    rng = random.Random(seed)
    sizes = [(_grid_uniform(rng, lo, hi, denom),
              _grid_uniform(rng, lo, hi, denom),
              _grid_uniform(rng, lo, hi, denom)) for _ in range(n)]
    return Instance.from_sizes(sizes, {"generator": "uniform", "seed": seed})


def gen_harmonic_adversarial(n: int, seed: int, k: int = 12,
                             denom: int = 1000) -> Instance:
    """Lengths sit just above a class boundary 1/(t+1), the placement that
    wastes the most slip width; widths and heights are uniform."""
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    rng = random.Random(seed)
    sizes = []
    for _ in range(n):
        t = rng.randint(1, k)
        # eta in (0, 1/(t(t+1))] keeps the length inside class t
        eta = Fraction(rng.randint(1, denom), denom) * Fraction(1, t * (t + 1))
        length = Fraction(1, t + 1) + eta
        sizes.append((length,
                      _grid_uniform(rng, Fraction(1, 20), ONE, denom),
                      _grid_uniform(rng, Fraction(1, 20), ONE, denom)))
    return Instance.from_sizes(
        sizes, {"generator": "harmonic-adversarial", "seed": seed, "k": k})


def gen_square_base(n: int, seed: int, lo: Rational = "1/10",
                    hi: Rational = 1, denom: int = 100) -> Instance:
    """Square-base boxes: width equals length exactly."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    rng = random.Random(seed)
    sizes = []
    for _ in range(n):
        side = _grid_uniform(rng, lo, hi, denom)
        sizes.append((side, side, _grid_uniform(rng, Fraction(1, 20), ONE, denom)))
    return Instance.from_sizes(
        sizes, {"generator": "square-base", "seed": seed})


def gen_guillotine(height: int, cuts: int, seed: int,
                   grid: int = 64) -> Instance:
    """Recursively cut a filled strip prefix of integer height H into boxes.

    Starts from H unit slabs and applies axis-aligned cuts at 1/grid lattice
    coordinates, so the boxes exactly tile [0,1]^2 x [0,H] and OPT = H.
    """
    if height < 1:
        raise DomainError(f"guillotine height must be >= 1, got {height}")
    rng = random.Random(seed)
    g = Fraction(1, grid)
    # pieces are (x0, y0, z0, l, w, h); all coordinates on the 1/grid lattice
    pieces = [(ZERO, ZERO, Fraction(i), ONE, ONE, ONE) for i in range(height)]
    done = 0
    attempts = 0
    while done < cuts and attempts < cuts * 20:
        attempts += 1
        idx = rng.randrange(len(pieces))
        x0, y0, z0, l, w, h = pieces[idx]
        axis = rng.randrange(3)
        start, extent = ((x0, l), (y0, w), (z0, h))[axis]
        lo_tick = int(start / g) + 1
        hi_tick = int((start + extent) / g)
        if (start + extent) % g == 0:
            hi_tick -= 1
        if lo_tick > hi_tick:
            continue  # no interior lattice plane; piece too thin on this axis
        cut = Fraction(rng.randint(lo_tick, hi_tick), grid)
        first = cut - start
        second = extent - first
        if axis == 0:
            a = (x0, y0, z0, first, w, h)
            b = (cut, y0, z0, second, w, h)
        elif axis == 1:
            a = (x0, y0, z0, l, first, h)
            b = (x0, cut, z0, l, second, h)
        else:
            a = (x0, y0, z0, l, w, first)
            b = (x0, y0, cut, l, w, second)
        pieces[idx] = a
        pieces.append(b)
        done += 1
    sizes = [(l, w, h) for (_, _, _, l, w, h) in pieces]
    inst = Instance.from_sizes(sizes, {
        "generator": "guillotine-cut", "seed": seed,
        "opt_height": str(height), "cuts": done,
    })
    # the pieces themselves witness OPT = H: they tile the strip prefix
    witness = Packing(tuple(Placement(i, x0, y0, z0)
                            for i, (x0, y0, z0, *_rest) in enumerate(pieces)),
                      Fraction(height))
    report = validate_packing(inst, witness)
    if not report.ok:
        raise ContractError("guillotine pieces failed to tile the strip")
    return inst


GENERATORS = {
    "uniform": gen_uniform,
    "harmonic-adversarial": gen_harmonic_adversarial,
    "square-base": gen_square_base,
    "guillotine-cut": gen_guillotine,
}


def gen_instance(name: str, seed: int, **params) -> Instance:
    """Dispatch by generator name; unknown names are usage errors."""
    if name not in GENERATORS:
        raise DomainError(
            f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    return GENERATORS[name](seed=seed, **params)
