"""Scoring of blind equalizers.

A blind equalizer may deliver its symbols shifted in time, scaled, offset,
inverted or with permuted labels. Scoring therefore clusters the output into
``M`` levels, decides each sample to the nearest level, and searches integer
delays and label permutations for the lowest symbol error rate.
"""
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from scipy.signal import find_peaks
from scipy.stats import binomtest

from . import channel as ch
from .numerics import no_grad

SER_THRESHOLD = 0.07
MA_LENGTH = 10


class DegenerateClustering(RuntimeError):
    pass


def estimate_levels(z, M, max_iter=50, retries=3):
    """1-D k-means with quantile initialization; returns ``M`` centres in ascending order."""
    z = np.asarray(z, dtype=np.float64).ravel()
    if len(z) < M:
        raise ValueError(f"need at least {M} samples to estimate {M} levels")
    zs = np.sort(z)
    for attempt in range(retries + 1):
        # the first try uses mid-quantiles, retries spread the start points outwards
        q = (np.arange(M) + 0.5) / M
        if attempt:
            q = np.clip(0.5 + (q - 0.5) * (1 + 0.25 * attempt), 0.0, 1.0)
        centres = np.quantile(zs, q)
        ok = True
        for _ in range(max_iter):
            edges = 0.5 * (centres[1:] + centres[:-1])
            bounds = np.searchsorted(zs, edges, side="right")
            starts = np.concatenate(([0], bounds))
            stops = np.concatenate((bounds, [len(zs)]))
            counts = stops - starts
            if np.any(counts == 0):
                ok = False
                break
            sums = np.add.reduceat(zs, starts)
            new = sums / counts
            if np.array_equal(new, centres):
                break
            centres = new
        if ok:
            return np.sort(centres)
    raise DegenerateClustering(f"k-means left an empty cluster after {retries} retries")


def decide(z, centres):
    """Index of the nearest centre for every sample (centres ascending)."""
    centres = np.asarray(centres)
    edges = 0.5 * (centres[1:] + centres[:-1])
    return np.searchsorted(edges, np.asarray(z), side="right")


_perm_cache = {}


def _label_permutations(M):
    p = _perm_cache.get(M)
    if p is None:
        p = np.array(list(permutations(range(M))), dtype=np.intp)
        _perm_cache[M] = p
    return p


@dataclass
class AmbiguityResult:
    shift: int
    permutation: tuple  # decided label d stands for true label permutation[d]
    ser: float
    errors: int
    n_compared: int
    decisions: np.ndarray = field(repr=False, default=None)


def resolve_decisions(decisions, true_indices, M, max_shift=20):
    """Best integer delay and label permutation between decided and transmitted indices.

    ``shift = s`` compares ``decisions[k + s]`` with ``true_indices[k]``.
    """
    d = np.asarray(decisions, dtype=np.intp)
    t = np.asarray(true_indices, dtype=np.intp)
    n = min(len(d), len(t))
    perms = _label_permutations(M)
    cols = np.arange(M)
    best = None
    for s in range(-max_shift, max_shift + 1):
        if s >= 0:
            dd, tt = d[s:n], t[:n - s]
        else:
            dd, tt = d[:n + s], t[-s:n]
        m = len(dd)
        if m == 0:
            continue
        conf = np.bincount(tt * M + dd, minlength=M * M).reshape(M, M)
        correct = conf[perms, cols].sum(axis=1)
        k = int(np.argmax(correct))
        errors = m - int(correct[k])
        ser = errors / m
        if best is None or ser < best.ser or (ser == best.ser and abs(s) < abs(best.shift)):
            best = AmbiguityResult(s, tuple(int(v) for v in perms[k]), ser, errors, m)
    return best


def resolve_ambiguity(z, true_indices, alphabet, max_shift=20):
    """Decide ``z`` against k-means levels, then search delays and label permutations."""
    M = alphabet.M if hasattr(alphabet, "M") else int(alphabet)
    try:
        centres = estimate_levels(z, M)
        d = decide(z, centres)
    except DegenerateClustering:
        d = np.zeros(len(z), dtype=np.intp)
    res = resolve_decisions(d, true_indices, M, max_shift)
    res.decisions = d
    return res


@dataclass
class Evaluation:
    ser: float
    shift: int
    permutation: tuple
    z: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    decisions: np.ndarray = field(repr=False)

    @property
    def mapped_decisions(self):
        """Decisions expressed as transmit labels after the permutation."""
        return np.asarray(self.permutation)[self.decisions]


def evaluate_equalizer(model, spec, n_symbols=10_000, rng=None, max_shift=20):
    """Equalize one fresh frame in evaluation mode and score it."""
    idx = ch.draw_symbols(n_symbols, spec.constellation, rng)
    frame = ch.transmit(idx, spec, rng)
    was_training = getattr(model, "training", False)
    if hasattr(model, "eval"):
        model.eval()
    with no_grad():
        z = np.array(model(frame.y).data, dtype=np.float64)
    if was_training:
        model.train()
    res = resolve_ambiguity(z, idx, spec.constellation, max_shift)
    return Evaluation(res.ser, res.shift, res.permutation, z, idx, res.decisions)


def estimate_ser(model, spec, n_symbols=10_000, rng=None, max_shift=20):
    return evaluate_equalizer(model, spec, n_symbols, rng, max_shift).ser


def moving_average_min(estimates, length=MA_LENGTH):
    """Unweighted sliding mean (valid part) and its minimum.

    Each averaged value is clamped into the range of its own window so that
    rounding can never push it below the smallest estimate it averages.
    """
    e = np.asarray(estimates, dtype=np.float64)
    if len(e) < length:
        raise ValueError(f"need at least {length} estimates, got {len(e)}")
    win = np.lib.stride_tricks.sliding_window_view(e, length)
    ma = np.clip(win.mean(axis=1), win.min(axis=1), win.max(axis=1))
    return ma, float(ma.min())


@dataclass
class SerTrace:
    estimates: np.ndarray
    ti: np.ndarray = None
    ma_length: int = MA_LENGTH
    n_symbols: int = 10_000

    def __post_init__(self):
        self.estimates = np.asarray(self.estimates, dtype=np.float64)
        self.ma, self.min_after_ma = moving_average_min(self.estimates, self.ma_length)

    @property
    def raw_min(self):
        return float(self.estimates.min())

    def wilson_intervals(self, alpha=0.05):
        return [wilson_interval(e, self.n_symbols, alpha) for e in self.estimates]


def wilson_interval(ser, n, alpha=0.05):
    k = int(round(ser * n))
    ci = binomtest(k, n).proportion_ci(confidence_level=1 - alpha, method="wilson")
    return ci.low, ci.high


@dataclass
class RunAggregate:
    min_after_ma: list
    successful: list  # run indices
    mean_ser: float
    min_ser: float
    threshold: float = SER_THRESHOLD

    @property
    def n_runs(self):
        return len(self.min_after_ma)

    @property
    def n_failed(self):
        return self.n_runs - len(self.successful)


def aggregate_runs(traces, threshold=SER_THRESHOLD):
    """Mean over successful runs; a run succeeds if its MA minimum is within ``threshold`` of the best run's."""
    if not traces:
        raise ValueError("need at least one run")
    mins = [t.min_after_ma for t in traces]
    best = min(mins)
    ok = [i for i, m in enumerate(mins) if m - best < threshold]
    return RunAggregate(
        min_after_ma=mins,
        successful=ok,
        mean_ser=float(np.mean([mins[i] for i in ok])),
        min_ser=float(min(t.raw_min for t in traces)),
        threshold=threshold,
    )


def pmf_distance(decisions, M):
    """Total-variation distance between the empirical symbol PMF and the uniform PMF."""
    d = np.asarray(decisions, dtype=np.intp)
    freq = np.bincount(d, minlength=M)[:M] / len(d)
    return 0.5 * float(np.sum(np.abs(freq - 1.0 / M)))


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray  # one row per transmit symbol, or a single row

    def rows(self):
        for s, row in enumerate(self.counts):
            for b, c in enumerate(row):
                yield s, float(self.edges[b]), float(self.edges[b + 1]), int(c)


def output_histogram(z, bins=60, true_indices=None, M=None):
    """Histogram of equalizer outputs, split by transmitted symbol when ``true_indices`` is given."""
    if bins < 10:
        raise ValueError("use at least 10 bins")
    z = np.asarray(z, dtype=np.float64)
    lo, hi = float(z.min()), float(z.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    if true_indices is None:
        return Histogram(edges, np.histogram(z, edges)[0][None, :])
    t = np.asarray(true_indices)
    M = M or int(t.max()) + 1
    counts = np.stack([np.histogram(z[t == m], edges)[0] for m in range(M)])
    return Histogram(edges, counts)


def count_modes(counts, prominence=0.1, smooth=3):
    """Number of separated peaks in a histogram row.

    Peaks must rise above their surroundings by ``prominence`` times the
    row's maximum after a short moving-average smoothing.
    """
    c = np.asarray(counts, dtype=np.float64)
    if c.max() <= 0:
        return 0
    if smooth > 1:
        c = np.convolve(c, np.ones(smooth) / smooth, mode="same")
    padded = np.concatenate(([0.0], c, [0.0]))
    peaks, _ = find_peaks(padded, prominence=prominence * c.max())
    return len(peaks)
