"""Welch's unequal-variance t-test and the pairwise condition-comparison matrix.

The t-distribution survival function is evaluated through the regularized
incomplete beta function:  P(|T| > t) = I_x(df/2, 1/2)  with
x = df / (df + t^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

TWO_SIDED = "two-sided"
GREATER = "greater"
LESS = "less"


@dataclass(frozen=True)
class TestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    n_a: int
    n_b: int


def t_survival(t: float, df: float) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    half_tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + t * t))
    return half_tail if t >= 0 else 1.0 - half_tail


def welch_t_test(a, b, sided: str = TWO_SIDED) -> TestResult:
    """Two-sample mean comparison without the equal-variance assumption.

    t = (mean_a - mean_b) / sqrt(s2_a/n_a + s2_b/n_b), with
    Welch-Satterthwaite degrees of freedom; requires two or more values per
    sample and variance in at least one of them.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n_a, n_b = len(a), len(b)
    if n_a < 2 or n_b < 2:
        raise ValueError("each sample needs at least 2 values")
    va = a.var(ddof=1)
    vb = b.var(ddof=1)
    sa, sb = va / n_a, vb / n_b
    if sa + sb == 0.0:
        raise ValueError("combined variance is zero in both samples")
    se = math.sqrt(sa + sb)
    t = (a.mean() - b.mean()) / se
    df = (sa + sb) ** 2 / (
        (sa * sa) / (n_a - 1) + (sb * sb) / (n_b - 1)
    )
    if sided == TWO_SIDED:
        p = 2.0 * t_survival(abs(t), df)
    elif sided == GREATER:
        p = t_survival(t, df)
    elif sided == LESS:
        p = t_survival(-t, df)
    else:
        raise ValueError(f"unknown sidedness {sided!r}")
    return TestResult(t_statistic=float(t), degrees_of_freedom=float(df),
                      p_value=float(min(p, 1.0)), n_a=n_a, n_b=n_b)


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def holm_adjust(p_values: list[float]) -> list[float]:
    """Holm step-down adjustment, monotone and capped at 1."""
    m = len(p_values)
    order = np.argsort(p_values)
    adjusted = [0.0] * m
    running = 0.0
    for i, idx in enumerate(order):
        running = max(running, (m - i) * p_values[idx])
        adjusted[idx] = min(1.0, running)
    return adjusted


@dataclass(frozen=True)
class PairwiseMatrix:
    """Lower-triangular pairwise tests: rows are conditions 2..n, columns 1..n-1."""

    labels: tuple[str, ...]
    p: np.ndarray            # (n-1, n-1); NaN above the diagonal or on failure
    t: np.ndarray
    errors: dict[tuple[str, str], str]

    def cell(self, row_label: str, col_label: str) -> float:
        r = self.labels.index(row_label) - 1
        c = self.labels.index(col_label)
        return float(self.p[r, c])

    def flat_p(self) -> list[float]:
        n = len(self.labels)
        return [float(self.p[r - 1, c]) for r in range(1, n) for c in range(r)]

    def to_rows(self, holm: bool = False) -> list[list[str]]:
        """CSV rows mirroring the published matrix shape, with significance stars."""
        n = len(self.labels)
        flat = self.flat_p()
        if holm:
            kept = [v for v in flat if not math.isnan(v)]
            adjusted = iter(holm_adjust(kept))
            flat = [next(adjusted) if not math.isnan(v) else v for v in flat]
        cells = iter(flat)
        rows = [[""] + list(self.labels[:-1])]
        for r in range(1, n):
            row = [self.labels[r]]
            for c in range(n - 1):
                if c < r:
                    p = next(cells)
                    row.append("failed" if math.isnan(p) else
                               f"{p:.3g}{significance_stars(p)}")
                else:
                    row.append("-")
            rows.append(row)
        return rows


def pairwise_matrix(groups: list[tuple[str, list[float]]]) -> PairwiseMatrix:
    """One Welch test per unordered pair of groups; failed cells are NaN.

    groups is an ordered list of (label, samples); ordering fixes the
    matrix layout.
    """
    if len(groups) < 2:
        raise ValueError("need at least 2 groups")
    labels = tuple(label for label, _ in groups)
    n = len(groups)
    p = np.full((n - 1, n - 1), np.nan)
    t = np.full((n - 1, n - 1), np.nan)
    errors: dict[tuple[str, str], str] = {}
    for r in range(1, n):
        for c in range(r):
            try:
                res = welch_t_test(groups[r][1], groups[c][1])
                p[r - 1, c] = res.p_value
                t[r - 1, c] = res.t_statistic
            except ValueError as exc:
                errors[(labels[r], labels[c])] = str(exc)
    return PairwiseMatrix(labels=labels, p=p, t=t, errors=errors)
