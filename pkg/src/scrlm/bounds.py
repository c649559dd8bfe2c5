"""Executable form of the recovery guarantees.

success_probability evaluates the four-term lower bound on the probability
that the extraction labels every point correctly, given N observations in
dimension p drawn from m clusters of weight at least a/m each:

    1 - 10*N^2*exp(-p/128) - m*exp(-n*a/m)
      - 2*m*exp(-p/128) - m*exp(-a*(N-1)/m)

The threshold helpers invert the bound: they return the smallest integer
parameters for which each term drops below delta/4, so that the bound
exceeds 1 - delta.  All logarithms are natural.  The two dimension
thresholds apply the strict inequality to the integer ceiling of the bound
(the form in which the guarantee region is drawn); the subsample and
sample-count thresholds apply it to the bound directly, so the working rule
n = ceil((m/a)(ln m + ln(4/delta))) itself qualifies.

The bandwidth precondition for all of this is sigma_max <= rho < sqrt(0.6).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BoundReport",
    "bandwidth_ok",
    "success_probability",
    "min_dim_for_samples",
    "min_dim_for_clusters",
    "min_subsample",
    "min_samples",
    "default_subsample_size",
    "bound_report",
    "in_guaranteed_region",
]

RHO_UPPER = math.sqrt(0.6)


def _check_counts(**kwargs):
    for name, value in kwargs.items():
        if int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value}")


def _check_weight_floor(a: float, m: int):
    if not (0.0 < a <= m):
        raise ValueError(f"weight_floor must lie in (0, m], got {a}")


def _check_delta(delta: float):
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def bandwidth_ok(sigma_max: float, rho: float) -> bool:
    """True iff sigma_max <= rho < sqrt(0.6)."""
    if sigma_max <= 0 or rho <= 0:
        raise ValueError("sigma_max and rho must be positive")
    return sigma_max <= rho < RHO_UPPER


def success_probability(n_samples: int, dim: int, n_clusters: int,
                        n_sub: int, weight_floor: float) -> float:
    """Lower bound on the probability of a fully correct labeling.

    May be negative (a vacuous bound) for small dimensions or samples.
    """
    _check_counts(n_samples=n_samples, dim=dim, n_clusters=n_clusters, n_sub=n_sub)
    _check_weight_floor(weight_floor, n_clusters)
    N, p, m, n, a = n_samples, dim, n_clusters, n_sub, weight_floor
    return (1.0
            - 10.0 * N * N * math.exp(-p / 128.0)
            - m * math.exp(-n * a / m)
            - 2.0 * m * math.exp(-p / 128.0)
            - m * math.exp(-a * (N - 1) / m))


def _strictly_above(x: float) -> int:
    return int(math.floor(x)) + 1


def min_dim_for_samples(n_samples: int, delta: float) -> int:
    """Smallest dimension strictly above ceil(128*(2 ln N + ln(40/delta)))."""
    _check_counts(n_samples=n_samples)
    _check_delta(delta)
    rhs = 128.0 * (2.0 * math.log(n_samples) + math.log(40.0 / delta))
    return int(math.ceil(rhs)) + 1


def min_dim_for_clusters(n_clusters: int, delta: float) -> int:
    """Smallest dimension strictly above ceil(128*(ln m + ln(8/delta)))."""
    _check_counts(n_clusters=n_clusters)
    _check_delta(delta)
    rhs = 128.0 * (math.log(n_clusters) + math.log(8.0 / delta))
    return int(math.ceil(rhs)) + 1


def min_subsample(n_clusters: int, weight_floor: float, delta: float) -> int:
    """Smallest subsample size strictly above (m/a)(ln m + ln(4/delta))."""
    _check_counts(n_clusters=n_clusters)
    _check_weight_floor(weight_floor, n_clusters)
    _check_delta(delta)
    m, a = n_clusters, weight_floor
    return _strictly_above((m / a) * (math.log(m) + math.log(4.0 / delta)))


def min_samples(n_clusters: int, weight_floor: float, delta: float) -> int:
    """Smallest sample count strictly above (m/a)(ln m + ln(4/delta)) + 1."""
    _check_counts(n_clusters=n_clusters)
    _check_weight_floor(weight_floor, n_clusters)
    _check_delta(delta)
    m, a = n_clusters, weight_floor
    return _strictly_above((m / a) * (math.log(m) + math.log(4.0 / delta)) + 1.0)


def default_subsample_size(n_clusters: int, weight_floor: float, delta: float) -> int:
    """The working subsample rule ceil((m/a)(ln m + ln(4/delta)))."""
    _check_counts(n_clusters=n_clusters)
    _check_weight_floor(weight_floor, n_clusters)
    _check_delta(delta)
    m, a = n_clusters, weight_floor
    return int(math.ceil((m / a) * (math.log(m) + math.log(4.0 / delta))))


@dataclass(frozen=True)
class BoundReport:
    """Probability lower bound plus the minimum-parameter thresholds for a
    given (N, p, m, n, a, delta)."""

    prob_lower_bound: float
    p_min_vs_N: int
    p_min_vs_m: int
    n_min: int
    N_min: int
    inputs: dict

    def as_dict(self) -> dict:
        return {
            "prob_lower_bound": self.prob_lower_bound,
            "p_min_vs_N": self.p_min_vs_N,
            "p_min_vs_m": self.p_min_vs_m,
            "n_min": self.n_min,
            "N_min": self.N_min,
            "inputs": dict(self.inputs),
        }


def bound_report(n_samples: int, dim: int, n_clusters: int, n_sub: int,
                 weight_floor: float, delta: float) -> BoundReport:
    return BoundReport(
        prob_lower_bound=success_probability(
            n_samples, dim, n_clusters, n_sub, weight_floor),
        p_min_vs_N=min_dim_for_samples(n_samples, delta),
        p_min_vs_m=min_dim_for_clusters(n_clusters, delta),
        n_min=min_subsample(n_clusters, weight_floor, delta),
        N_min=min_samples(n_clusters, weight_floor, delta),
        inputs={"N": n_samples, "p": dim, "m": n_clusters, "n": n_sub,
                "a": weight_floor, "delta": delta},
    )


def in_guaranteed_region(n_samples: int, dim: int, n_clusters: int, n_sub: int,
                         weight_floor: float, delta: float,
                         sigma_max: float | None = None,
                         rho: float | None = None) -> bool:
    """True when every threshold is met, i.e. a fully correct labeling is
    guaranteed with probability at least 1 - delta.

    When sigma_max and rho are supplied the bandwidth precondition is
    included in the check.
    """
    report = bound_report(n_samples, dim, n_clusters, n_sub, weight_floor, delta)
    ok = (dim >= report.p_min_vs_N and dim >= report.p_min_vs_m
          and n_sub >= report.n_min and n_samples >= report.N_min)
    if sigma_max is not None and rho is not None:
        ok = ok and bandwidth_ok(sigma_max, rho)
    return ok
