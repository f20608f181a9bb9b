"""
Point-set construction (Sobol, Halton, rank-1 lattices, van der Corput, pseudo-random)
and star discrepancy diagnostics.
"""

import itertools
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from qmcd.config import settings
from qmcd.errors import BudgetExceededError, InvalidArgumentError, UnsupportedDimensionError
from qmcd.models.inference import SamplerKind, SamplerSpec
from qmcd.models.point_set import PointSet, SequenceFamily
from qmcd.services.direction_numbers import OUTPUT_BITS, get_direction_numbers
from qmcd.utils.seeding import philox

logger = logging.getLogger(__name__)

_BELOW_ONE = np.nextafter(1.0, 0.0)

# Extensible base-2 rank-1 lattice (good for every n = 2^m up to 2^20); reduced mod n on use.
LATTICE_GENERATING_VECTOR = (1, 182667, 469891, 498753, 110745, 446247, 250185, 118627, 245333, 283199)


def _check_counts(n: int, s: int) -> None:
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if s < 1:
        raise InvalidArgumentError(f"s must be >= 1, got {s}")


def _first_primes(count: int) -> List[int]:
    limit = max(16, int(count * (math.log(count + 1) + math.log(math.log(count + 2)) + 3)))
    while True:
        sieve = np.ones(limit + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, int(limit ** 0.5) + 1):
            if sieve[p]:
                sieve[p * p::p] = False
        primes = np.flatnonzero(sieve)
        if len(primes) >= count:
            return [int(p) for p in primes[:count]]
        limit *= 2


def _radical_inverse(index: np.ndarray, base: int, permutations: Optional[np.ndarray] = None) -> np.ndarray:
    """Base-b radical inverse of each index; `permutations[k]` relabels digit k (identity when None)."""
    n_digits = int(OUTPUT_BITS / math.log2(base))
    digits = np.empty((n_digits, len(index)), dtype=np.int64)
    rest = index.astype(np.int64)
    for k in range(n_digits):
        rest, digits[k] = np.divmod(rest, base)
    if permutations is not None:
        digits = np.take_along_axis(permutations, digits, axis=1)
    acc = np.zeros(len(index), dtype=np.float64)
    for k in range(n_digits - 1, -1, -1):
        acc = (acc + digits[k]) / base
    return np.minimum(acc, _BELOW_ONE)


def van_der_corput(n: int, base: int = 2) -> PointSet:
    if base < 2:
        raise InvalidArgumentError(f"base must be >= 2, got {base}")
    _check_counts(n, 1)
    points = _radical_inverse(np.arange(n), base)
    return PointSet(points=points[:, None], family=SequenceFamily.VAN_DER_CORPUT)


def _linear_scramble(v: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Left-multiply each 52-bit direction number by a random unit lower-triangular GF(2) matrix."""
    lower = np.tril(rng.integers(0, 2, size=(OUTPUT_BITS, OUTPUT_BITS), dtype=np.uint64), k=-1)
    lower += np.eye(OUTPUT_BITS, dtype=np.uint64)
    weights = np.uint64(1) << (np.uint64(OUTPUT_BITS - 1) - np.arange(OUTPUT_BITS, dtype=np.uint64))
    row_masks = (lower * weights).sum(axis=1, dtype=np.uint64)
    # parity of (row mask & v) gives output digit r for every direction number
    bits = row_masks[:, None] & v[None, :]
    for shift in (32, 16, 8, 4, 2, 1):
        bits ^= bits >> np.uint64(shift)
    bits &= np.uint64(1)
    return (bits * weights[:, None]).sum(axis=0, dtype=np.uint64)


def sobol(n: int, s: int, scramble_seed: Optional[int] = None) -> PointSet:
    """Gray-code Sobol points starting at the origin, optionally linear-matrix scrambled and digitally shifted."""
    _check_counts(n, s)
    v = np.array(get_direction_numbers().direction_numbers(s))
    n_bits = max(1, int(n - 1).bit_length())
    if n_bits > OUTPUT_BITS:
        raise InvalidArgumentError(f"n = {n} exceeds 2^{OUTPUT_BITS}")
    v = v[:, :n_bits]

    shift = np.zeros(s, dtype=np.uint64)
    if scramble_seed is not None:
        children = np.random.SeedSequence(scramble_seed).spawn(s)
        for j, child in enumerate(children):
            rng = philox(child)
            v[j] = _linear_scramble(v[j], rng)
            shift[j] = rng.integers(0, 2 ** OUTPUT_BITS, dtype=np.uint64)

    index = np.arange(n, dtype=np.uint64)
    gray = index ^ (index >> np.uint64(1))
    acc = np.broadcast_to(shift, (n, s)).copy()
    for k in range(n_bits):
        selected = ((gray >> np.uint64(k)) & np.uint64(1)).astype(bool)
        acc[selected] ^= v[:, k]
    points = acc.astype(np.float64) * 2.0 ** -OUTPUT_BITS
    return PointSet(points=points, family=SequenceFamily.SOBOL, seed=scramble_seed)


def halton_permutations(s: int, scramble_seed: int) -> List[np.ndarray]:
    """Uniform random digit permutations, one per (dimension, digit position)."""
    bases = _first_primes(s)
    children = np.random.SeedSequence(scramble_seed).spawn(s)
    perms = []
    for base, child in zip(bases, children):
        rng = philox(child)
        n_digits = int(OUTPUT_BITS / math.log2(base))
        perms.append(np.stack([rng.permutation(base) for _ in range(n_digits)]))
    return perms


def halton(
    n: int,
    s: int,
    scramble_seed: Optional[int] = None,
    permutations: Optional[Sequence[np.ndarray]] = None,
) -> PointSet:
    """Halton points with the j-th prime as base of dimension j; index 0 gives the origin when unscrambled.

    `permutations[j]` overrides the digit relabelling of dimension j, either one permutation
    of range(base) for every digit or one row per digit position.
    """
    _check_counts(n, s)
    bases = _first_primes(s)
    if permutations is None and scramble_seed is not None:
        permutations = halton_permutations(s, scramble_seed)
    if permutations is not None and len(permutations) != s:
        raise InvalidArgumentError(f"need {s} permutation tables, got {len(permutations)}")
    index = np.arange(n)
    columns = []
    for j, base in enumerate(bases):
        perm = None
        if permutations is not None:
            n_digits = int(OUTPUT_BITS / math.log2(base))
            perm = np.broadcast_to(np.asarray(permutations[j], dtype=np.int64), (n_digits, base))
        columns.append(_radical_inverse(index, base, perm))
    return PointSet(points=np.column_stack(columns), family=SequenceFamily.HALTON, seed=scramble_seed)


def korobov_vector(n: int, s: int, a: int) -> List[int]:
    """Korobov generating vector (1, a, a^2, ...) mod n."""
    z, value = [], 1
    for _ in range(s):
        z.append(value % n)
        value = (value * a) % n
    return z


def lattice_generating_vector(n: int, s: int) -> List[int]:
    if s > len(LATTICE_GENERATING_VECTOR):
        raise UnsupportedDimensionError(
            f"built-in lattice vector covers s <= {len(LATTICE_GENERATING_VECTOR)}, got {s}; pass generating_vector"
        )
    return [z % n for z in LATTICE_GENERATING_VECTOR[:s]]


def rank1_lattice(
    n: int,
    s: int,
    generating_vector: Optional[Sequence[int]] = None,
    shift_seed: Optional[int] = None,
    shift: Optional[Sequence[float]] = None,
    baker: bool = False,
) -> PointSet:
    """Point i is frac(i z / n + shift); `baker` applies the tent transform 1 - |2x - 1| afterwards."""
    _check_counts(n, s)
    z = np.asarray(generating_vector if generating_vector is not None else lattice_generating_vector(n, s), dtype=np.int64)
    if z.shape != (s,):
        raise InvalidArgumentError(f"generating vector must have {s} entries, got {z.shape}")
    for component in z:
        if math.gcd(int(component), n) != 1:
            logger.warning(f"generating vector component {int(component)} is not coprime with n={n}")
    if shift is not None and shift_seed is not None:
        raise InvalidArgumentError("give either shift or shift_seed, not both")
    if shift_seed is not None:
        delta = philox(shift_seed).random(s)
    elif shift is not None:
        delta = np.asarray(shift, dtype=np.float64)
    else:
        delta = np.zeros(s)

    index = np.arange(n, dtype=np.int64)
    points = ((index[:, None] * (z % n)[None, :]) % n) / n + delta
    points -= np.floor(points)
    if baker:
        points = 1.0 - np.abs(2.0 * points - 1.0)
    points = np.minimum(points, _BELOW_ONE)
    return PointSet(points=points, family=SequenceFamily.LATTICE, seed=shift_seed)


def pseudo_random(n: int, s: int, seed: int) -> PointSet:
    _check_counts(n, s)
    return PointSet(points=philox(seed).random((n, s)), family=SequenceFamily.PSEUDO_RANDOM, seed=seed)


def draw_points(sampler: SamplerSpec, n: int, s: int, seed: int) -> PointSet:
    """MC or RQMC point set for a sampler choice; `seed` drives the draw or the randomization."""
    if sampler.kind == SamplerKind.MC:
        return pseudo_random(n, s, seed)
    if sampler.family == SequenceFamily.SOBOL:
        return sobol(n, s, scramble_seed=seed)
    if sampler.family == SequenceFamily.HALTON:
        return halton(n, s, scramble_seed=seed)
    if sampler.family == SequenceFamily.LATTICE:
        return rank1_lattice(n, s, shift_seed=seed)
    raise InvalidArgumentError(f"{sampler.family.value} cannot be used as an RQMC sampler")


def star_discrepancy_1d(ps: PointSet) -> float:
    if ps.s != 1:
        raise InvalidArgumentError(f"star_discrepancy_1d needs s = 1, got s = {ps.s}")
    u = np.sort(ps.points[:, 0])
    i = np.arange(1, ps.n + 1)
    return float(max(np.max(i / ps.n - u), np.max(u - (i - 1) / ps.n)))


def star_discrepancy_lower_bound(
    ps: PointSet, budget: Optional[int] = None, nodes: Optional[int] = None, node_seed: int = 0
) -> float:
    """Largest local discrepancy over the grid of point coordinates and 1, with open and closed boxes.

    The first s-1 axes are enumerated; counts along the last axis come from one sorted search per node.
    Work is measured as (enumerated nodes) x n and checked against `budget`. With `nodes`, only that many
    grid nodes on the first s-1 axes are drawn, seeded by `node_seed`.
    """
    budget = budget if budget is not None else settings.star_budget
    n, s = ps.n, ps.s
    x = ps.points
    grids = [np.unique(np.append(x[:, k], 1.0)) for k in range(s)]
    last_grid = grids[-1]
    if nodes is not None and s > 1:
        if nodes < 1:
            raise InvalidArgumentError(f"nodes must be >= 1, got {nodes}")
        picks = philox(node_seed).integers(0, [len(g) for g in grids[:-1]], size=(nodes, s - 1))
        prefix = (tuple(g[i] for g, i in zip(grids[:-1], row)) for row in picks)
        prefix_nodes = nodes
    else:
        prefix = itertools.product(*grids[:-1])
        prefix_nodes = math.prod(len(g) for g in grids[:-1])

    best = 0.0
    work = 0
    for node in prefix:
        if work + n > budget:
            raise BudgetExceededError(
                f"star discrepancy grid needs {prefix_nodes * n} operations, budget is {budget}",
                budget=budget,
                partial_result=best,
            )
        work += n
        node = np.asarray(node, dtype=np.float64)
        open_mask = np.all(x[:, :-1] < node, axis=1) if s > 1 else np.ones(n, dtype=bool)
        closed_mask = np.all(x[:, :-1] <= node, axis=1) if s > 1 else np.ones(n, dtype=bool)
        last_open = np.sort(x[open_mask, -1])
        last_closed = np.sort(x[closed_mask, -1])
        open_count = np.searchsorted(last_open, last_grid, side="left")
        closed_count = np.searchsorted(last_closed, last_grid, side="right")
        volume = float(np.prod(node)) * last_grid
        local = np.maximum(volume - open_count / n, closed_count / n - volume)
        best = max(best, float(np.max(local)))
    return best
