"""ML, ZF and MMSE detection of code matrices.

Received model: ``Y = E_s H X + N`` with i.i.d. ``N(0, N0/2)`` noise entries.
The linear detectors equalise, keep the ``gamma n_t`` largest entries of each
row, and accept the result only if it is a codeword; otherwise a message is
drawn uniformly at random.  They never enumerate the codebook.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .codebook import CodebookSpec, codebook_matrices, decode_batch
from .errors import InvalidParameter

__all__ = [
    "Detector",
    "LinkConfig",
    "received",
    "quantize_rows",
    "ml_metrics",
    "ml_detect_batch",
    "equalize",
    "linear_detect_batch",
    "detect_batch",
    "ml_detect",
    "zf_detect",
    "mmse_detect",
]


class Detector(str, enum.Enum):
    ML = "ml"
    ZF = "zf"
    MMSE = "mmse"


@dataclass(frozen=True)
class LinkConfig:
    """Signal scale ``e_s`` and noise level ``n0`` (per-entry variance ``n0 / 2``)."""

    e_s: float
    n0: float = 1.0
    detector: Detector = Detector.ML

    def __post_init__(self):
        object.__setattr__(self, "detector", Detector(self.detector))
        if not self.e_s > 0 or not self.n0 > 0:
            raise InvalidParameter("e_s and n0 must be positive")

    @classmethod
    def from_snr_db(cls, snr_db: float, spec: CodebookSpec, n0: float = 1.0,
                    detector: Detector | str = Detector.ML) -> "LinkConfig":
        """Pick ``E_s`` so that ``gamma E_s n_t^2 / N0`` equals the requested SNR."""
        snr = 10.0 ** (snr_db / 10.0)
        e_s = snr * n0 / (float(spec.gamma) * spec.n_t**2)
        return cls(e_s, n0, Detector(detector))

    @property
    def sigma2(self) -> float:
        return self.n0 / 2.0

    def snr_db(self, spec: CodebookSpec) -> float:
        return 10.0 * math.log10(float(spec.gamma) * self.e_s * spec.n_t**2 / self.n0)


def received(h, x, cfg: LinkConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw ``E_s H X + N``; ``h`` and ``x`` may carry matching leading batch axes."""
    mean = cfg.e_s * (np.asarray(h, float) @ np.asarray(x, float))
    return mean + rng.normal(0.0, math.sqrt(cfg.sigma2), size=mean.shape)


def quantize_rows(x_hat, f_total: int) -> np.ndarray:
    """Set the ``f_total`` largest entries of every row to 1, the rest to 0.

    Entries are ranked by signed value; ties go to the lower column index.
    """
    x = np.asarray(x_hat, dtype=float)
    n = x.shape[-1]
    if not 1 <= f_total <= n - 1:
        raise InvalidParameter(f"f_total={f_total} outside [1, {n - 1}]")
    top = np.argsort(-x, axis=-1, kind="stable")[..., :f_total]
    out = np.zeros(x.shape, dtype=np.uint8)
    np.put_along_axis(out, top, 1, axis=-1)
    return out


def ml_metrics(y, h, codewords, e_s: float) -> np.ndarray:
    """``||Y - E_s H X_c||_F^2`` for every trial and codeword, shape ``(T, C)``."""
    y = np.asarray(y, float)
    h = np.asarray(h, float)
    c = np.asarray(codewords, float)
    n_cw, n_t, _ = c.shape
    # H @ [X_0 | X_1 | ...] in one batched product
    flat = c.transpose(1, 0, 2).reshape(n_t, n_cw * n_t)
    hx = (h @ flat).reshape(h.shape[0], h.shape[1], n_cw, n_t)
    resid = y[:, :, None, :] - e_s * hx
    return np.einsum("trcs,trcs->tc", resid, resid)


def ml_detect_batch(y, h, spec: CodebookSpec, cfg: LinkConfig, chunk: int | None = None) -> np.ndarray:
    """Exhaustive ML over the codebook; exact ties resolve to the smaller message."""
    codewords = codebook_matrices(spec)
    y = np.asarray(y, float)
    h = np.asarray(h, float)
    if chunk is None:
        per_trial = spec.size * h.shape[1] * spec.n_t
        chunk = max(1, 4_000_000 // per_trial)
    out = np.empty(y.shape[0], dtype=np.int64)
    for lo in range(0, y.shape[0], chunk):
        sl = slice(lo, lo + chunk)
        out[sl] = ml_metrics(y[sl], h[sl], codewords, cfg.e_s).argmin(axis=1)
    return out


def equalize(y, h, cfg: LinkConfig, detector: Detector | str) -> np.ndarray:
    """Linear estimate of the transmitted matrix, normalised by ``E_s``.

    ZF uses the Moore-Penrose pseudo-inverse (``H^-1`` for square
    nonsingular ``H``).  MMSE regularises the effective channel ``G = E_s H``:
    ``(G^T G + (N0/2) I)^-1 G^T Y``.
    """
    detector = Detector(detector)
    y = np.asarray(y, float)
    h = np.asarray(h, float)
    if detector is Detector.ZF:
        return np.linalg.pinv(h) @ y / cfg.e_s
    if detector is Detector.MMSE:
        g = cfg.e_s * h
        gt = np.swapaxes(g, -1, -2)
        gram = gt @ g + cfg.sigma2 * np.eye(h.shape[-1])
        return np.linalg.solve(gram, gt @ y)
    raise InvalidParameter(f"{detector.value} is not a linear detector")


def linear_detect_batch(y, h, spec: CodebookSpec, cfg: LinkConfig, detector: Detector | str,
                        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """ZF/MMSE detection; returns ``(messages, fallback_mask)``."""
    x_hat = equalize(y, h, cfg, detector)
    decided = decode_batch(spec, quantize_rows(x_hat, spec.weight))
    fallback = decided < 0
    # one draw per trial keeps the fallback stream aligned with trial order
    guesses = rng.integers(0, spec.size, size=decided.shape[0])
    return np.where(fallback, guesses, decided), fallback


def detect_batch(detector: Detector | str, y, h, spec: CodebookSpec, cfg: LinkConfig,
                 rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray]:
    detector = Detector(detector)
    if detector is Detector.ML:
        msgs = ml_detect_batch(y, h, spec, cfg)
        return msgs, np.zeros(msgs.shape, dtype=bool)
    if rng is None:
        raise InvalidParameter("linear detectors need an RNG for the random fallback")
    return linear_detect_batch(y, h, spec, cfg, detector, rng)


def _single(y, h):
    y = np.asarray(y, float)
    h = getattr(h, "gains", h)
    return y[None], np.asarray(h, float)[None]


def ml_detect(y, h, spec: CodebookSpec, cfg: LinkConfig) -> int:
    yb, hb = _single(y, h)
    return int(ml_detect_batch(yb, hb, spec, cfg)[0])


def zf_detect(y, h, spec: CodebookSpec, cfg: LinkConfig, rng: np.random.Generator | None = None) -> int:
    yb, hb = _single(y, h)
    rng = rng if rng is not None else np.random.default_rng()
    return int(linear_detect_batch(yb, hb, spec, cfg, Detector.ZF, rng)[0][0])


def mmse_detect(y, h, spec: CodebookSpec, cfg: LinkConfig, rng: np.random.Generator | None = None) -> int:
    yb, hb = _single(y, h)
    rng = rng if rng is not None else np.random.default_rng()
    return int(linear_detect_batch(yb, hb, spec, cfg, Detector.MMSE, rng)[0][0])
