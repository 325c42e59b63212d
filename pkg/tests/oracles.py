"""Independent reference implementations used to check the package.

Everything here is computed from first principles with mpmath arbitrary
precision (or plain per-pair scans for retrieval), sharing no code with
the package under test. Floats are converted to mpf exactly, so the
references see the same inputs the implementation sees.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np

mp.mp.dps = 60


def curve_value(theta: float, tau: float, alpha: float) -> mp.mpf:
    t = mp.mpf(theta)
    if t <= 0:
        return mp.mpf(0)
    return t ** mp.mpf(alpha) / mp.mpf(tau) ** (mp.mpf(alpha) - 1)


def similarity_after_curve(theta: float, tau: float, alpha: float) -> mp.mpf:
    t = max(mp.mpf(theta), mp.mpf(0))
    if t >= mp.mpf(tau):
        return t
    return curve_value(float(t), tau, alpha)


def gate_factor(d: float, delta: float | None) -> mp.mpf:
    if delta is None:
        return mp.mpf(1)
    dd = mp.mpf(d)
    if dd <= 0:
        return mp.mpf(1)
    return min(mp.mpf(delta) / dd, mp.mpf(1))


def confidence(theta_adj: mp.mpf, d_adj: mp.mpf) -> mp.mpf:
    return min(mp.mpf(1), max(mp.mpf(0), theta_adj * d_adj))


def probability_adjusted(p: float, conf: mp.mpf) -> mp.mpf:
    return mp.mpf(p) * (mp.mpf(1) - conf)


def loss_multiplier(conf: mp.mpf, tau: float, alpha: float) -> mp.mpf:
    z = mp.mpf(alpha) * (mp.mpf(tau) - conf)
    return mp.mpf(1) - mp.mpf(1) / (mp.mpf(1) + mp.e ** z)


def loss_adjusted(l: float, conf: mp.mpf, tau: float, alpha: float) -> mp.mpf:
    return mp.mpf(l) * loss_multiplier(conf, tau, alpha)


def full_adjustment(
    score: float,
    theta: float,
    d: float,
    tau: float,
    alpha: float,
    delta: float | None,
    kind: str,
) -> dict:
    """End-to-end reference for one event; returns mpf intermediates."""
    theta_adj = similarity_after_curve(theta, tau, alpha)
    d_adj = gate_factor(d, delta)
    conf = confidence(theta_adj, d_adj)
    if kind == "probability":
        adjusted = probability_adjusted(score, conf)
    else:
        adjusted = loss_adjusted(score, conf, tau, alpha)
    return {
        "theta_adjusted": theta_adj,
        "d_adjusted": d_adj,
        "fp_confidence": conf,
        "score_adjusted": adjusted,
    }


def brute_force_nearest(query: np.ndarray, rows: list[tuple[int, np.ndarray]]) -> tuple[int, float, float] | None:
    """Per-pair exhaustive scan: (id, cosine, distance) of the best match.

    Ties keep the earliest row, which is the lowest id when rows are in
    insertion order.
    """
    if not rows:
        return None
    qn = float(np.linalg.norm(query))
    best_id, best_theta = None, -2.0
    best_row = None
    for ann_id, row in rows:
        theta = float(np.dot(query, row)) / (qn * float(np.linalg.norm(row)))
        if theta > best_theta:
            best_id, best_theta, best_row = ann_id, theta, row
    d = float(np.linalg.norm(query - best_row))
    theta = 1.0 if d == 0.0 else min(1.0, max(-1.0, best_theta))
    return best_id, theta, d


def brute_force_nearest_fast(query: np.ndarray, ids: np.ndarray, matrix: np.ndarray) -> tuple[int, float, float]:
    """Vectorized scan for large stores; still a single unnormalized pass."""
    sims = (matrix @ query) / (np.linalg.norm(matrix, axis=1) * np.linalg.norm(query))
    best = int(np.argmax(sims))
    d = float(np.linalg.norm(query - matrix[best]))
    theta = 1.0 if d == 0.0 else min(1.0, max(-1.0, float(sims[best])))
    return int(ids[best]), theta, d


def tolerant_equal(value: float, reference: mp.mpf, rel: float = 1e-10, abs_floor: float = 1e-12) -> bool:
    """|value - reference| <= max(rel * |reference|, abs_floor).

    The absolute floor absorbs float64 underflow on quantities whose exact
    value is far below representable precision.
    """
    err = abs(mp.mpf(value) - reference)
    return err <= max(rel * abs(reference), mp.mpf(abs_floor))
