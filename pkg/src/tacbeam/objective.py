"""SI-SNR, utterance-level PIT and the SI-SNR improvement metric.

SI-SNR here does NOT remove means: the estimate is projected onto the raw
target. Absolute dB values therefore differ slightly from zero-mean variants.
The regularizer is scaled by the estimate energy, so scores are exactly
invariant to rescaling the estimate and saturate at +100 dB.
"""
from itertools import permutations

import numpy as np

EPS = 1e-10
FLOOR = EPS * EPS
_DB = 10.0 / np.log(10.0)


def _check_pair(est, target):
    est = np.asarray(est, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if est.shape[-1] != target.shape[-1]:
        raise ValueError(f"length mismatch: {est.shape[-1]} vs {target.shape[-1]}")
    if np.any(np.sum(target * target, axis=-1) == 0.0):
        raise ValueError("target is all zeros")
    return est, target


def _terms(est, target):
    tt = np.sum(target * target, axis=-1)
    et = np.sum(est * target, axis=-1)
    s = (et / tt)[..., None] * target
    r = est - s
    return s, r, np.sum(s * s, axis=-1), np.sum(r * r, axis=-1), np.sum(est * est, axis=-1)


def si_snr(est, target):
    """Scale-invariant SNR in dB along the last axis.

    With ``s`` the projection of ``est`` onto ``target`` and ``r = est - s``::

        10 log10((|s|^2 + 1e-20 |est|^2) / (|r|^2 + 1e-10 |est|^2))

    For unit-scale signals this agrees with the plain ``|s|^2 / (|r|^2 + 1e-10)``
    to well below 1e-9 dB, but stays exactly scale invariant: a perfect
    estimate scores 100 dB and an orthogonal one -200 dB whatever the level.
    An all-zero estimate scores -200 dB.
    """
    est, target = _check_pair(est, target)
    _, _, ps, pr, pe = _terms(est, target)
    silent = pe == 0.0
    num = np.where(silent, FLOOR, ps + FLOOR * pe)
    den = np.where(silent, 1.0, pr + EPS * pe)
    return 10.0 * np.log10(num / den)


def si_snr_grad(est, target):
    """d si_snr / d est, same shape as ``est``."""
    est, target = _check_pair(est, target)
    s, r, ps, pr, pe = _terms(est, target)
    ok = (pe > 0.0)[..., None]
    num = np.where(ok, (ps + FLOOR * pe)[..., None], 1.0)
    den = np.where(ok, (pr + EPS * pe)[..., None], 1.0)
    # d|s|^2 = 2 s, d|r|^2 = 2 r, d|est|^2 = 2 est
    g = 2.0 * _DB * ((s + FLOOR * est) / num - (r + EPS * est) / den)
    return np.where(ok, g, 0.0)


def pairwise_si_snr(ests, targets):
    """Matrix M[j, k] = si_snr(ests[j], targets[k]) for (C, S) inputs."""
    return si_snr(np.asarray(ests)[:, None, :], np.asarray(targets)[None, :, :])


def upit_loss(ests, targets):
    """Utterance-level PIT loss for one utterance.

    Returns ``(loss, perm)`` where ``loss = min_pi mean_j -si_snr(ests[j],
    targets[pi[j]])`` over all C! assignments and ``perm`` is the minimizer
    (ties resolve to the lexicographically first permutation).
    """
    ests = np.asarray(ests, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if ests.shape != targets.shape or ests.ndim != 2:
        raise ValueError(f"ests {ests.shape} and targets {targets.shape} must both be (C, S)")
    C = ests.shape[0]
    if C > 6:
        raise ValueError("exhaustive PIT supports at most 6 sources")
    M = pairwise_si_snr(ests, targets)
    best, best_perm = np.inf, None
    for perm in permutations(range(C)):
        loss = -np.mean(M[np.arange(C), perm])
        if loss < best:
            best, best_perm = loss, perm
    return float(best), tuple(best_perm)


def upit_loss_batch(ests, targets):
    """Mean uPIT loss over a batch (B, C, S), the permutations, and d loss / d ests.

    The gradient flows through each utterance's best permutation only.
    """
    B, C, _ = ests.shape
    losses, perms = [], []
    grad = np.zeros_like(ests, dtype=np.float64)
    for b in range(B):
        loss, perm = upit_loss(ests[b], targets[b])
        losses.append(loss)
        perms.append(perm)
        grad[b] = -si_snr_grad(ests[b], targets[b][list(perm)]) / (C * B)
    return float(np.mean(losses)), perms, grad


def si_snri(est, target, mixture_ref):
    """SI-SNR of ``est`` minus SI-SNR of the unprocessed reference mixture."""
    return si_snr(est, target) - si_snr(mixture_ref, target)
