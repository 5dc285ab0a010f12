"""Two-sample tests used by the experiment harness (thin wrappers over scipy.stats)."""
from __future__ import annotations

import numpy as np
from scipy import stats as _st

from .errors import InputError


def ks_statistic(a, b):
    """Two-sample Kolmogorov-Smirnov (D, asymptotic p-value)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise InputError("KS needs two nonempty samples")
    res = _st.ks_2samp(a, b, method="asymp")
    return float(res.statistic), float(res.pvalue)


def pooled_count_table(a, b, min_expected: float = 5.0):
    """2 x k table of integer-valued samples, merging the upper tail until every
    expected cell count reaches ``min_expected``."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    top = int(max(a.max(initial=0), b.max(initial=0)))
    ca = np.bincount(a, minlength=top + 1).astype(float)
    cb = np.bincount(b, minlength=top + 1).astype(float)
    frac = len(a) / (len(a) + len(b))
    # merge from the right while the smallest expected count in the last bin is too small
    while len(ca) > 1 and min(frac, 1 - frac) * (ca[-1] + cb[-1]) < min_expected:
        ca[-2] += ca[-1]
        cb[-2] += cb[-1]
        ca, cb = ca[:-1], cb[:-1]
    return np.vstack([ca, cb])


def chi2_two_sample(a, b, min_expected: float = 5.0):
    """Chi-square homogeneity test of two integer samples: (statistic, p-value, dof)."""
    if len(a) == 0 or len(b) == 0:
        raise InputError("chi-square needs two nonempty samples")
    table = pooled_count_table(a, b, min_expected)
    if table.shape[1] < 2:
        return 0.0, 1.0, 0
    chi2, p, dof, _ = _st.chi2_contingency(table, correction=False)
    return float(chi2), float(p), int(dof)


def chi2_goodness_of_fit(counts, probs, min_expected: float = 5.0):
    """Pearson goodness of fit of observed category counts to probabilities (cells with tiny
    expectation are merged into one)."""
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    probs = probs / probs.sum()
    exp = probs * counts.sum()
    small = exp < min_expected
    if small.any() and not small.all():
        counts = np.append(counts[~small], counts[small].sum())
        exp = np.append(exp[~small], exp[small].sum())
    if len(counts) < 2:
        return 0.0, 1.0
    res = _st.chisquare(counts, exp)
    return float(res.statistic), float(res.pvalue)


def mean_se(x):
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(len(x))) if len(x) > 1 else float("nan")
