"""Per-trial observables and empirical CDFs."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np

RSS_FLOOR_DB = -250.0


@dataclass(frozen=True, eq=False)
class TrialStatistics:
    trial_index: int
    frobenius_norm: float
    capacity_bits: float
    rss_per_link: Optional[np.ndarray] = None  # K x M linear power
    states: Optional[tuple] = None

    @property
    def frobenius_sq(self) -> float:
        return self.frobenius_norm ** 2


def frobenius_norm(H) -> float:
    H = np.asarray(H)
    if H.size == 0:
        return 0.0
    return float(np.linalg.norm(H.reshape(-1)))


def _logdet_hpd(A: np.ndarray) -> float:
    """Natural log-determinant of a Hermitian positive-definite matrix."""
    try:
        L = np.linalg.cholesky(A)
        return float(2.0 * np.sum(np.log(np.real(np.diag(L)))))
    except np.linalg.LinAlgError:
        sign, logdet = np.linalg.slogdet(A)
        return float(logdet)


def capacity(H_bar, snr_db: float, n_tx: Optional[int] = None, gram: str = "auto") -> float:
    """Equal-power MIMO capacity ``log2 det(I + snr/n_tx * H^H H)`` in bits/s/Hz.

    ``gram`` picks the Gram matrix: ``"cols"`` uses H^H H, ``"rows"`` uses
    H H^H and ``"auto"`` takes the smaller of the two.
    """
    H = np.atleast_2d(np.asarray(H_bar, dtype=complex))
    if not np.all(np.isfinite(H)):
        raise ValueError("channel matrix has non-finite entries")
    if n_tx is None:
        n_tx = H.shape[1]
    if n_tx < 1:
        raise ValueError("n_tx must be >= 1")
    gamma = 10.0 ** (snr_db / 10.0)
    if gram == "auto":
        gram = "cols" if H.shape[1] <= H.shape[0] else "rows"
    G = H.conj().T @ H if gram == "cols" else H @ H.conj().T
    A = np.eye(G.shape[0]) + (gamma / n_tx) * G
    A = (A + A.conj().T) / 2
    return max(_logdet_hpd(A) / math.log(2.0), 0.0)


def rss_per_link(H_user) -> np.ndarray:
    """Per-antenna received power of one user, averaged over the user's antennas."""
    H_user = np.asarray(H_user)
    if H_user.ndim == 1:
        H_user = H_user[:, None]
    return np.mean(np.abs(H_user) ** 2, axis=1)


def to_db(power, floor_db: float = RSS_FLOOR_DB) -> np.ndarray:
    power = np.asarray(power, dtype=float)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power)
    return np.maximum(db, floor_db)


@dataclass(frozen=True, eq=False)
class CdfSummary:
    """Empirical CDF: sorted samples with cumulative probabilities i/n."""

    values: np.ndarray
    probabilities: np.ndarray

    @property
    def n(self) -> int:
        return self.values.size

    def percentile(self, q: float) -> float:
        """Nearest-rank percentile, ``q`` in [0, 1]."""
        if not 0.0 <= q <= 1.0:
            raise ValueError("q must lie in [0, 1]")
        rank = max(1, math.ceil(q * self.n - 1e-9))
        return float(self.values[rank - 1])

    def median(self) -> float:
        return self.percentile(0.5)

    def spread(self, lo: float = 0.1, hi: float = 0.9) -> float:
        return self.percentile(hi) - self.percentile(lo)

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.n

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value", "cumulative_probability"])
        for v, p in zip(self.values, self.probabilities):
            w.writerow([repr(float(v)), repr(float(p))])


def empirical_cdf(samples: Sequence[float]) -> CdfSummary:
    values = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    if values.size == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    probs = np.arange(1, values.size + 1) / values.size
    return CdfSummary(values, probs)
