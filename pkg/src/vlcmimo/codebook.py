"""Permutation-matrix space-time codes with dimming control.

A codeword is an ``n_t x n_t`` binary matrix; row ``i`` is the on/off pattern
of transmit antenna ``i`` and column ``s`` is time slot ``s``.  Messages of
``k = floor(log2(n_t!))`` bits are ranked into permutations via factoradic
(Lehmer) digits; dimmed codebooks stretch every row's single 1 into a cyclic
run of ``M = gamma * n_t`` ones (``fill``) or complement the permutation
matrix (``complement``, only for ``M = n_t - 1``).

Positions are counted right to left: position ``p`` lives in display column
``n_t - 1 - p``.
"""

from __future__ import annotations

import enum
import functools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityExceeded, InvalidMessage, InvalidParameter, NotACodeword

__all__ = [
    "Method",
    "CodebookSpec",
    "parse_gamma",
    "message_length",
    "code_rate",
    "lehmer_digits",
    "positions_from_digits",
    "digits_from_positions",
    "encode",
    "decode",
    "encode_batch",
    "decode_batch",
    "dim_expand",
    "dim_contract",
    "complement",
    "validate",
    "enumerate_codebook",
    "codebook_matrices",
    "min_hamming_distance",
    "min_euclidean_distance",
    "max_run_length",
    "scan_max_run_length",
    "max_nt_for_flicker",
    "dimming_weight_table",
    "format_codebook_text",
    "format_codebook_json",
    "parse_codebook_text",
]

MAX_NT = 64
MAX_ENUM_K = 24
# int64 factoradic arithmetic in the vectorised paths
MAX_BATCH_NT = 20


class Method(str, enum.Enum):
    FILL = "fill"
    COMPLEMENT = "complement"


def parse_gamma(value, n_t: int) -> Fraction:
    """Parse a dimming factor given as ``"f/n"``, a decimal, or a number.

    Decimal input is snapped to the nearest multiple of ``1/n_t`` when it
    lies within 1e-3 of one (so ``"0.1667"`` works for ``n_t = 6``).
    """
    if isinstance(value, Fraction):
        gamma = value
    elif isinstance(value, int):
        gamma = Fraction(value)
    elif isinstance(value, str) and "/" in value:
        try:
            num, den = value.split("/")
            gamma = Fraction(int(num), int(den))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidParameter(f"cannot parse gamma {value!r}") from exc
    else:
        try:
            g = float(value)
        except (TypeError, ValueError) as exc:
            raise InvalidParameter(f"cannot parse gamma {value!r}") from exc
        weight = round(g * n_t)
        if abs(g * n_t - weight) > 1e-3:
            raise InvalidParameter(f"gamma={value} is not a multiple of 1/{n_t}")
        gamma = Fraction(weight, n_t)
    if (gamma * n_t).denominator != 1:
        raise InvalidParameter(f"gamma={gamma} is not a multiple of 1/{n_t}")
    return gamma


@dataclass(frozen=True)
class CodebookSpec:
    """One codebook: antenna count, row weight ``M`` and construction method."""

    n_t: int
    weight: int = 1
    method: Method = Method.FILL

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not isinstance(self.n_t, (int, np.integer)) or not 2 <= self.n_t <= MAX_NT:
            raise InvalidParameter(f"n_t must be an integer in [2, {MAX_NT}], got {self.n_t!r}")
        if not 1 <= self.weight <= self.n_t - 1:
            raise InvalidParameter(
                f"gamma*n_t must lie in [1, n_t-1]; got M={self.weight} for n_t={self.n_t}"
            )
        if self.method is Method.COMPLEMENT and self.weight != self.n_t - 1:
            raise InvalidParameter("complement method requires gamma = (n_t-1)/n_t")

    @classmethod
    def from_gamma(cls, n_t: int, gamma, method: Method | str = Method.FILL) -> "CodebookSpec":
        if not isinstance(n_t, (int, np.integer)) or n_t < 2:
            raise InvalidParameter(f"n_t must be an integer >= 2, got {n_t!r}")
        g = parse_gamma(gamma, n_t)
        return cls(int(n_t), int(g * n_t), Method(method))

    @property
    def gamma(self) -> Fraction:
        return Fraction(self.weight, self.n_t)

    @property
    def fill(self) -> int:
        """Extra ones added per row by the fill construction."""
        return 0 if self.method is Method.COMPLEMENT else self.weight - 1

    @property
    def k(self) -> int:
        return message_length(self.n_t)

    @property
    def size(self) -> int:
        return 1 << self.k

    def __str__(self):
        return f"n_t={self.n_t} gamma={self.weight}/{self.n_t} method={self.method.value}"


def _check_nt(n_t) -> int:
    if not isinstance(n_t, (int, np.integer)) or n_t < 2:
        raise InvalidParameter(f"n_t must be an integer >= 2, got {n_t!r}")
    return int(n_t)


def message_length(n_t: int) -> int:
    """Maximal message length ``floor(log2(n_t!))``, computed exactly."""
    n_t = _check_nt(n_t)
    return math.factorial(n_t).bit_length() - 1


def code_rate(n_t: int) -> Fraction:
    """Bits per time slot, ``k / n_t``."""
    return Fraction(message_length(n_t), _check_nt(n_t))


def lehmer_digits(message: int, n_t: int) -> list[int]:
    """Factoradic digits ``P_1..P_n`` of ``message`` (most significant first)."""
    digits = []
    residue = message
    for i in range(1, n_t + 1):
        base = math.factorial(n_t - i)
        digits.append(residue // base)
        residue %= base
    return digits


def positions_from_digits(digits: Sequence[int]) -> list[int]:
    """Row ``i`` takes the ``P_i``-th smallest position not used by rows above."""
    unused = list(range(len(digits)))
    return [unused.pop(d) for d in digits]


def digits_from_positions(positions: Sequence[int]) -> list[int]:
    """Undo :func:`positions_from_digits`: subtract earlier rows sitting to the right."""
    return [p - sum(1 for q in positions[:r] if p > q) for r, p in enumerate(positions)]


def _as_binary(matrix) -> np.ndarray:
    x = np.asarray(matrix)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise NotACodeword(f"expected a square matrix, got shape {x.shape}")
    if x.dtype == np.uint8:
        if x.max(initial=0) > 1:
            raise NotACodeword("matrix entries must be 0 or 1")
        return x
    if not np.all((x == 0) | (x == 1)):
        raise NotACodeword("matrix entries must be 0 or 1")
    return x.astype(np.uint8)


def complement(matrix) -> np.ndarray:
    return (1 - np.asarray(matrix)).astype(np.uint8)


def dim_expand(perm, f: int) -> np.ndarray:
    """Extend each row's 1 by ``f`` ones to its right, wrapping to column 0."""
    x = np.asarray(perm, dtype=np.uint8)
    n = x.shape[-1]
    if not 0 <= f <= n - 2:
        raise InvalidParameter(f"fill count f={f} outside [0, {n - 2}]")
    out = x.copy()
    for shift in range(1, f + 1):
        out |= np.roll(x, shift, axis=-1)
    return out


def _run_starts(x: np.ndarray) -> np.ndarray:
    # a run starts at a 1 whose cyclic left neighbour is 0
    left = np.concatenate((x[..., -1:], x[..., :-1]), axis=-1)
    return x & (1 - left)


def dim_contract(matrix, f: int) -> np.ndarray:
    """Collapse each row's cyclic run of ``f + 1`` ones to its first element."""
    x = _as_binary(matrix)
    n = x.shape[1]
    if not 0 <= f <= n - 2:
        raise InvalidParameter(f"fill count f={f} outside [0, {n - 2}]")
    return _contract(x, f)


def _contract(x: np.ndarray, f: int) -> np.ndarray:
    starts = _run_starts(x)
    bad = (x.sum(axis=1) != f + 1) | (starts.sum(axis=1) != 1)
    if np.any(bad):
        rows = [int(r) + 1 for r in np.flatnonzero(bad)]
        raise NotACodeword(f"rows {rows} are not single cyclic runs of length {f + 1}")
    return starts.astype(np.uint8)


def _check_message(spec: CodebookSpec, message) -> int:
    if isinstance(message, (bool, np.bool_)) or not isinstance(message, (int, np.integer)):
        raise InvalidMessage(f"message must be an integer, got {message!r}")
    if not 0 <= message < spec.size:
        raise InvalidMessage(f"message {message} outside [0, 2^{spec.k})")
    return int(message)


def encode(spec: CodebookSpec, message: int) -> np.ndarray:
    """Map ``message`` in ``[0, 2^k)`` to its code matrix."""
    message = _check_message(spec, message)
    n = spec.n_t
    cols = n - 1 - np.asarray(positions_from_digits(lehmer_digits(message, n)))
    x = np.zeros((n, n), dtype=np.uint8)
    if spec.method is Method.COMPLEMENT:
        x[np.arange(n), cols] = 1
        return 1 - x
    # the 1 of each row plus its fill run, wrapping past the last column
    x[np.arange(n)[:, None], (cols[:, None] + np.arange(spec.fill + 1)) % n] = 1
    return x


def decode(spec: CodebookSpec, matrix) -> int:
    """Recover the message from a code matrix; raises :class:`NotACodeword`."""
    x = _as_binary(matrix)
    if x.shape[0] != spec.n_t:
        raise NotACodeword(f"expected {spec.n_t}x{spec.n_t}, got {x.shape}")
    if spec.method is Method.COMPLEMENT:
        x = complement(x)
    perm = _contract(x, spec.fill)
    positions = [spec.n_t - 1 - int(c) for c in perm.argmax(axis=1)]
    if len(set(positions)) != spec.n_t:
        raise NotACodeword("run starts do not form a permutation")
    value = 0
    for i, d in enumerate(digits_from_positions(positions)):
        value += math.factorial(spec.n_t - 1 - i) * d
    if value >= spec.size:
        raise NotACodeword(f"permutation rank {value} is outside the 2^{spec.k} codebook")
    return value


def validate(spec: CodebookSpec, matrix) -> bool:
    """Codebook membership in O(n_t^2), without enumerating the codebook."""
    x = np.asarray(matrix)
    if x.shape != (spec.n_t, spec.n_t):
        return False
    if np.any(x.sum(axis=0) != spec.weight) or np.any(x.sum(axis=1) != spec.weight):
        return False
    try:
        message = decode(spec, x)
    except NotACodeword:
        return False
    return bool(np.array_equal(encode(spec, message), x))


def _check_batch_nt(spec: CodebookSpec):
    if spec.n_t > MAX_BATCH_NT:
        raise CapacityExceeded(f"vectorised coding supports n_t <= {MAX_BATCH_NT}")


def _factorial_weights(n: int) -> np.ndarray:
    return np.array([math.factorial(n - 1 - i) for i in range(n)], dtype=np.int64)


def encode_batch(spec: CodebookSpec, messages) -> np.ndarray:
    """Vectorised :func:`encode`; returns an ``(N, n_t, n_t)`` uint8 array."""
    _check_batch_nt(spec)
    msgs = np.asarray(messages, dtype=np.int64).reshape(-1)
    if msgs.size and (msgs.min() < 0 or msgs.max() >= spec.size):
        raise InvalidMessage(f"messages outside [0, 2^{spec.k})")
    n = spec.n_t
    count = msgs.size
    residue = msgs.copy()
    used = np.zeros((count, n), dtype=bool)
    out = np.zeros((count, n, n), dtype=np.uint8)
    rows = np.arange(count)
    for i, base in enumerate(_factorial_weights(n)):
        digit = residue // base
        residue = residue % base
        # index of the (digit+1)-th unused position
        free_rank = np.cumsum(~used, axis=1) - 1
        pos = np.argmax((free_rank == digit[:, None]) & ~used, axis=1)
        used[rows, pos] = True
        out[rows, i, n - 1 - pos] = 1
    if spec.method is Method.COMPLEMENT:
        return 1 - out
    return dim_expand(out, spec.fill)


def decode_batch(spec: CodebookSpec, matrices) -> np.ndarray:
    """Vectorised decode; non-codewords map to ``-1`` instead of raising."""
    _check_batch_nt(spec)
    x = np.asarray(matrices).astype(np.uint8)
    n = spec.n_t
    if x.ndim != 3 or x.shape[1:] != (n, n):
        raise InvalidParameter(f"expected shape (N, {n}, {n}), got {x.shape}")
    if spec.method is Method.COMPLEMENT:
        x = 1 - x
    starts = _run_starts(x)
    ok = np.all(x.sum(axis=2) == spec.fill + 1, axis=1)
    ok &= np.all(starts.sum(axis=2) == 1, axis=1)
    pos = n - 1 - starts.argmax(axis=2)
    ok &= np.all(np.sort(pos, axis=1) == np.arange(n), axis=1)
    # digit_r = pos_r - #{t < r : pos_t < pos_r}
    lower = np.tril(np.ones((n, n), dtype=bool), -1)
    smaller_above = (pos[:, None, :] < pos[:, :, None]) & lower
    digits = pos - smaller_above.sum(axis=2)
    value = digits @ _factorial_weights(n)
    ok &= value < spec.size
    return np.where(ok, value, -1)


def _check_enumerable(spec: CodebookSpec):
    if spec.k > MAX_ENUM_K:
        raise CapacityExceeded(f"k={spec.k} exceeds the enumeration guard k <= {MAX_ENUM_K}")


def enumerate_codebook(spec: CodebookSpec) -> Iterator[np.ndarray]:
    """Yield ``encode(spec, m)`` for ``m = 0 .. 2^k - 1``."""
    _check_enumerable(spec)
    for m in range(spec.size):
        yield encode(spec, m)


@functools.lru_cache(maxsize=32)
def _cached_matrices(spec: CodebookSpec) -> np.ndarray:
    out = encode_batch(spec, np.arange(spec.size))
    out.flags.writeable = False
    return out


def codebook_matrices(spec: CodebookSpec) -> np.ndarray:
    """All codewords stacked as a read-only ``(2^k, n_t, n_t)`` array."""
    _check_enumerable(spec)
    return _cached_matrices(spec)


def min_hamming_distance(spec: CodebookSpec, chunk: int = 2048) -> int:
    """Exhaustive minimum pairwise Hamming distance."""
    flat = codebook_matrices(spec).reshape(spec.size, -1).astype(np.int32)
    weights = flat.sum(axis=1)
    best = flat.shape[1]
    for lo in range(0, spec.size, chunk):
        block = flat[lo : lo + chunk]
        dist = weights[lo : lo + chunk, None] + weights[None, :] - 2 * (block @ flat.T)
        idx = np.arange(lo, lo + block.shape[0])
        dist[idx - lo, idx] = flat.shape[1] + 1
        best = min(best, int(dist.min()))
    return best


def min_euclidean_distance(spec: CodebookSpec, e_s: float = 1.0) -> float:
    """Minimum Euclidean distance of the codewords sent at amplitude ``sqrt(e_s)``."""
    return math.sqrt(min_hamming_distance(spec) * e_s)


def max_run_length(spec: CodebookSpec) -> int:
    """Worst-case zero run per antenna across consecutive codewords, ``2 n_t (1 - gamma)``."""
    return 2 * (spec.n_t - spec.weight)


def _leading_zeros(rows: np.ndarray) -> np.ndarray:
    n = rows.shape[-1]
    has_one = rows.any(axis=-1)
    return np.where(has_one, rows.argmax(axis=-1), n)


def scan_max_run_length(spec: CodebookSpec) -> int:
    """Brute-force longest zero run over every ordered pair of codewords.

    A run crossing a codeword boundary is the trailing zeros of one row plus
    the leading zeros of the same antenna's row in the next codeword; every
    row holds at least one 1, so no run spans three codewords.
    """
    c = codebook_matrices(spec)
    n = spec.n_t
    lead = _leading_zeros(c)  # (N, n)
    trail = _leading_zeros(c[..., ::-1])
    best = int((trail.max(axis=0) + lead.max(axis=0)).max())
    # runs inside a single row
    padded = np.concatenate([np.ones(c.shape[:2] + (1,), np.uint8), c, np.ones(c.shape[:2] + (1,), np.uint8)], axis=-1)
    for s in range(n + 2):
        for e in range(s + 1, n + 2):
            gap = e - s - 1
            if gap <= best:
                continue
            inner = padded[..., s + 1 : e]
            if np.any((padded[..., s] == 1) & (padded[..., e] == 1) & ~inner.any(axis=-1)):
                best = gap
    return best


def max_nt_for_flicker(t_b: float, mftp: float = 5e-3) -> int:
    """Largest antenna count whose worst-case run ``(2 n_t - 2) t_b`` fits in ``mftp``.

    Evaluated as ``floor((mftp + 2 t_b) / (2 t_b))`` in exact decimal
    arithmetic so that exact boundary cases such as 0.1 ms -> 26 are not lost to
    floating-point rounding.
    """
    if t_b <= 0 or mftp <= 0:
        raise InvalidParameter("bit period and MFTP must be positive")
    tb = Fraction(str(t_b))
    mf = Fraction(str(mftp))
    return math.floor((mf + 2 * tb) / (2 * tb))


def dimming_weight_table(n_t: int) -> dict:
    """Dimming factors and codeword weights of the plain and complemented codes."""
    n_t = _check_nt(n_t)
    return {
        "n_t": n_t,
        "gamma_actual": 1 / n_t,
        "gamma_c": 1 - 1 / n_t,
        "wt_actual": n_t,
        "wt_c": n_t * (n_t - 1),
    }


def format_codebook_text(spec: CodebookSpec, matrices) -> str:
    lines = [f"# n_t={spec.n_t} gamma={spec.weight}/{spec.n_t} method={spec.method.value} k={spec.k}"]
    blocks = []
    for x in matrices:
        blocks.append("\n".join(" ".join(str(int(b)) for b in row) for row in x))
    return lines[0] + "\n" + "\n\n".join(blocks) + "\n"


def format_codebook_json(matrices) -> str:
    data = [["".join(str(int(b)) for b in row) for row in x] for x in matrices]
    return json.dumps(data)


def parse_codebook_text(text: str) -> tuple[dict, list[np.ndarray]]:
    """Read the text dump back into its header fields and matrices."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing codebook header line")
    header = dict(item.split("=", 1) for item in lines[0][1:].split())
    matrices, rows = [], []
    for line in lines[1:] + [""]:
        if line.strip():
            rows.append([int(v) for v in line.split()])
        elif rows:
            matrices.append(np.array(rows, dtype=np.uint8))
            rows = []
    return header, matrices
