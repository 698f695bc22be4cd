"""Conflict-free banked buffer mapping and its machine checks.

The on-chip buffer is split into 2p banks of n/(2p) words.  Element i
lands at

    bank   = (i XOR floor(i / n_part)) mod 2p
    offset = floor(i / (2p))

The XOR term separates the strided accesses of the first iteration half
from the sequential accesses of the second, so that every 2p-wide parallel
round hits 2p distinct banks while the global stream 0..n-1 stays burst
contiguous per bank.  verify_conflict_free and verify_burst certify both
properties by brute force rather than trusting the derivation.
"""

from dataclasses import dataclass, field

from .modmath import is_power_of_two

READ = "read"
WRITE = "write"


class BadConfig(ValueError):
    """Geometry outside the supported envelope, message names the constraint."""


def validate_geometry(n: int, n_part: int, p: int) -> None:
    if not is_power_of_two(n):
        raise BadConfig(f"n={n} must be a power of two")
    if not is_power_of_two(n_part):
        raise BadConfig(f"n_part={n_part} must be a power of two")
    if not is_power_of_two(p):
        raise BadConfig(f"p={p} must be a power of two")
    if p < 2:
        raise BadConfig(f"p={p} must be at least 2")
    if 2 * p > n_part:
        raise BadConfig(f"2p={2 * p} exceeds n_part={n_part}")
    if n_part > n:
        raise BadConfig(f"n_part={n_part} exceeds n={n}")
    if n > n_part * n_part:
        raise BadConfig(
            f"n={n} exceeds n_part**2={n_part * n_part}; "
            "the two-half iteration scheme covers at most 2*log2(n_part) stages"
        )


@dataclass
class BankLayout:
    """The 2p x n/(2p) element arrangement produced by the XOR mapping."""

    n: int
    n_part: int
    p: int
    banks: int
    depth: int
    arrangement: list = field(repr=False)  # arrangement[bank][offset] -> global index

    def bank_of(self, i: int) -> int:
        return (i ^ (i // self.n_part)) % self.banks

    def offset_of(self, i: int) -> int:
        return i // self.banks

    def place(self, i: int) -> tuple:
        return self.bank_of(i), self.offset_of(i)


def map_layout(n: int, n_part: int, p: int) -> BankLayout:
    """Build and sanity-check the banked arrangement for (n, n_part, p)."""
    validate_geometry(n, n_part, p)
    banks = 2 * p
    depth = n // banks
    arrangement = [[None] * depth for _ in range(banks)]
    for i in range(n):
        b = (i ^ (i // n_part)) % banks
        off = i // banks
        if arrangement[b][off] is not None:
            raise BadConfig(f"collision at bank {b} offset {off}")
        arrangement[b][off] = i
    return BankLayout(n=n, n_part=n_part, p=p, banks=banks, depth=depth, arrangement=arrangement)


@dataclass
class AccessRound:
    """One 2p-wide parallel buffer access."""

    iteration: int
    round: int
    direction: str  # READ or WRITE
    touches: list  # (bank, offset, global_index) triples


def iteration_index_groups(n: int, n_part: int, p: int):
    """Yield (iteration, [round index lists]) for the whole transform.

    First-half iteration k owns the stride-n/n_part coset {u*(n/n_part)+k};
    its elements are enumerated with the block coordinate varying fastest so
    that each 2p-chunk spans either 2p distinct blocks or all blocks at 2p/M
    distinct within-block positions, which is what keeps banks disjoint.
    Second-half iteration h owns the contiguous block [h*n_part, (h+1)*n_part)
    and is chunked sequentially.  A single-pass transform (n == n_part)
    degenerates to one sequentially-chunked iteration.
    """
    validate_geometry(n, n_part, p)
    width = 2 * p
    m = n // n_part
    if m == 1:
        yield 0, [list(range(c, c + width)) for c in range(0, n, width)]
        return
    g_count = n_part // m  # m <= n_part is guaranteed by n <= n_part**2
    for k in range(m):
        order = [(b * g_count + g) * m + k for g in range(g_count) for b in range(m)]
        yield k, [order[c : c + width] for c in range(0, n_part, width)]
    for h in range(m):
        base = h * n_part
        yield m + h, [
            list(range(base + c, base + c + width)) for c in range(0, n_part, width)
        ]


def access_schedule(layout: BankLayout, config, schedule) -> list:
    """Enumerate every read and write round of every iteration.

    Writes mirror reads: each iteration writes back exactly the elements it
    consumed, through the same bank pattern.
    """
    if (layout.n, layout.n_part, layout.p) != (config.n, config.n_part, config.p):
        raise BadConfig("layout and config geometry disagree")
    rounds = []
    total_iterations = 0
    for iteration, groups in iteration_index_groups(layout.n, layout.n_part, layout.p):
        total_iterations += 1
        for direction in (READ, WRITE):
            for r, idxs in enumerate(groups):
                touches = [(layout.bank_of(i), layout.offset_of(i), i) for i in idxs]
                rounds.append(AccessRound(iteration, r, direction, touches))
    if total_iterations != schedule.iterations:
        raise BadConfig(
            f"schedule expects {schedule.iterations} iterations, enumerated {total_iterations}"
        )
    return rounds


@dataclass
class ConflictReport:
    rounds_checked: int
    conflicts: list  # dicts naming the offending round
    max_distinct_offsets: int  # word-line locality metric, reported not asserted

    @property
    def clean(self) -> bool:
        return not self.conflicts

    def to_dict(self) -> dict:
        return {
            "rounds_checked": self.rounds_checked,
            "conflicts": self.conflicts,
            "conflict_free": self.clean,
            "max_distinct_offsets": self.max_distinct_offsets,
        }


def verify_conflict_free(rounds: list) -> ConflictReport:
    """Flag every round whose touches do not cover pairwise-distinct banks."""
    conflicts = []
    max_offsets = 0
    for rnd in rounds:
        banks = [t[0] for t in rnd.touches]
        offsets = {t[1] for t in rnd.touches}
        if len(offsets) > max_offsets:
            max_offsets = len(offsets)
        if len(set(banks)) != len(banks):
            seen = {}
            for b in banks:
                seen[b] = seen.get(b, 0) + 1
            conflicts.append(
                {
                    "iteration": rnd.iteration,
                    "round": rnd.round,
                    "direction": rnd.direction,
                    "duplicated_banks": sorted(b for b, c in seen.items() if c > 1),
                }
            )
    return ConflictReport(len(rounds), conflicts, max_offsets)


@dataclass
class BurstReport:
    burst_clean: bool
    violations: list

    def to_dict(self) -> dict:
        return {"burst_clean": self.burst_clean, "violations": self.violations}


def verify_burst(layout: BankLayout) -> BurstReport:
    """Stream 0..n-1 and confirm each bank sees offsets 0,1,2,... gap free.

    This is the property that lets a sequential HBM burst be scattered into
    the banks (and gathered back out) without reordering buffers.
    """
    next_offset = [0] * layout.banks
    violations = []
    for i in range(layout.n):
        b, off = layout.place(i)
        if off != next_offset[b]:
            violations.append({"index": i, "bank": b, "offset": off, "expected": next_offset[b]})
        next_offset[b] = off + 1
    for b, nxt in enumerate(next_offset):
        if nxt != layout.depth:
            violations.append({"bank": b, "filled": nxt, "depth": layout.depth})
    return BurstReport(not violations, violations)
